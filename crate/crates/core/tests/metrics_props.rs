use forcelayout::metrics::{colliding_objects, navigability, NAV_CELL};
use forcelayout::scene::Topology;
use forcelayout::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metric_collisions_match_engine(seed in 0u64..10_000, optimized in any::<bool>()) {
        let p = OptimizerParams::default();
        for (s, c) in gen_corpus(2, seed) {
            let s = if optimized { optimize(&s, &c, &OptimizerParams { t_max: 40, ..p.clone() }).unwrap().scene } else { s };
            let ledger = accumulate(&s, &ConstraintSet::default(), &p).unwrap();
            let hit = colliding_objects(&s, &Topology::build(&s).unwrap());
            for (o, h) in ledger.objects.iter().zip(&hit) {
                prop_assert_eq!(o.has_collision(), *h);
            }
            let report = evaluate(&s);
            prop_assert_eq!(report.col_ob > 0.0, ledger.has_collision());
        }
    }

    #[test]
    fn nav_never_rises_as_furniture_is_added(
        items in prop::collection::vec((0.0..5.0f64, 0.0..4.0f64, 0.2..1.5f64, 0.2..1.5f64, 0.0..360.0f64), 1..12)
    ) {
        let mut s = SceneState::from_parts(RoomSpec::new(5.0, 4.0, 2.6), Vec::new()).unwrap();
        let mut last = navigability(&s, NAV_CELL);
        prop_assert_eq!(last, 100.0);
        for (k, (x, y, w, d, yaw)) in items.into_iter().enumerate() {
            s.objects.push(ObjectState::new(format!("o{k}"), [x, y], [w, d, 0.8]).with_yaw(yaw));
            let nav = navigability(&s, NAV_CELL);
            prop_assert!(nav <= last);
            last = nav;
        }
    }
}
