use forcelayout::error::SceneError;
use forcelayout::optimizer::step_in_place;
use forcelayout::scene::Topology;
use forcelayout::*;
use proptest::prelude::*;

fn supported_heights_exact(scene: &SceneState) -> bool {
    scene.objects.iter().all(|o| match o.parent {
        ParentRef::Floor | ParentRef::Object(_) => o.p_vert == scene.derive_vertical(o).unwrap(),
        _ => true,
    })
}

/// Follows parent links from every node; a revisit means a cycle.
fn has_cycle(parents: &[Option<usize>]) -> bool {
    (0..parents.len()).any(|start| {
        let mut cur = parents[start];
        for _ in 0..parents.len() {
            match cur {
                Some(p) if p == start => return true,
                Some(p) => cur = parents[p],
                None => return false,
            }
        }
        cur.is_some()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn json_round_trip(seed in 0u64..1000) {
        for (scene, cons) in gen_corpus(2, seed) {
            let text = scene_to_json(&scene, &cons);
            let (back, back_cons) = parse_scene(&text).unwrap();
            prop_assert_eq!(&back, &scene);
            prop_assert_eq!(&back_cons, &cons);
            prop_assert_eq!(scene_to_json(&back, &back_cons), text);
        }
    }

    #[test]
    fn supported_heights_hold_after_load_and_steps(seed in 0u64..1000) {
        let p = OptimizerParams::default();
        for (scene, cons) in gen_corpus(1, seed) {
            let (mut s, _) = parse_scene(&scene_to_json(&scene, &cons)).unwrap();
            prop_assert!(supported_heights_exact(&s));
            let field = forcelayout::forces::ForceField::new(&s, &cons).unwrap();
            let mut ledger = ForceLedger::new(s.len(), p.window);
            for _ in 0..25 {
                field.accumulate_into(&s, &p, &mut ledger);
                step_in_place(&field.topology, &mut s, &ledger, &p);
                prop_assert!(supported_heights_exact(&s));
            }
        }
    }

    #[test]
    fn cyclic_parent_graphs_are_rejected(links in prop::collection::vec(prop::option::of(0usize..8), 1..8)) {
        let n = links.len();
        let parents: Vec<Option<usize>> = links.iter().map(|l| l.map(|p| p % n)).collect();
        let objects = parents
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let o = ObjectState::new(format!("o{i}"), [1.0, 1.0], [0.5, 0.5, 0.5]);
                match p {
                    Some(p) => o.with_parent(ParentRef::Object(format!("o{p}"))),
                    None => o,
                }
            })
            .collect();
        let built = SceneState::from_parts(RoomSpec::new(4.0, 4.0, 3.0), objects);
        if has_cycle(&parents) {
            prop_assert!(matches!(built, Err(SceneError::ParentCycle(_))));
        } else {
            let s = built.unwrap();
            let topo = Topology::build(&s).unwrap();
            let pos: Vec<usize> = (0..n).map(|i| topo.order.iter().position(|&k| k == i).unwrap()).collect();
            for (i, p) in parents.iter().enumerate() {
                if let Some(p) = p {
                    prop_assert!(pos[*p] < pos[i]);
                }
            }
        }
    }
}
