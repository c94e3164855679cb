use forcelayout::deadlock::{detect_horizontal, handle_deadlocks};
use forcelayout::fixtures::{symmetric_jam, vertical_squeeze};
use forcelayout::forces::{ForceField, ObjectForces, Source};
use forcelayout::optimizer::step_in_place;
use forcelayout::*;
use proptest::prelude::*;

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

#[test]
fn zero_residual_step_is_identity() {
    let s = SceneState::from_parts(
        RoomSpec::new(6.0, 6.0, 3.0),
        vec![
            ObjectState::new("a", [1.0, 1.0], [1.0, 1.0, 1.0]).with_yaw(33.0),
            ObjectState::new("b", [4.0, 4.0], [1.0, 0.5, 0.8]),
            ObjectState::new("c", [4.0, 4.0], [0.2, 0.2, 0.3]).with_parent(ParentRef::Object("b".into())),
        ],
    )
    .unwrap();
    let p = OptimizerParams::default();
    let ledger = accumulate(&s, &ConstraintSet::default(), &p).unwrap();
    assert_eq!(residual(&ledger), 0.0);
    assert_eq!(step(&s, &ledger, &p).unwrap(), s);
}

#[test]
fn residual_medians_trend_down() {
    let p = OptimizerParams::default();
    let corpus = gen_corpus(100, 21);
    let down = corpus
        .iter()
        .filter(|(s, c)| {
            let t = optimize(s, c, &p).unwrap().residuals;
            let h = t.len() / 2;
            t.len() < 2 || median(t[h..].to_vec()) <= median(t[..h].to_vec())
        })
        .count();
    assert!(down >= 90, "{down}/100");
}

#[test]
fn squeeze_scale_never_grows() {
    let p = OptimizerParams::default();
    let mut scenes: Vec<(SceneState, ConstraintSet)> = gen_corpus(20, 4);
    scenes.push((vertical_squeeze(), ConstraintSet::default()));
    for (s0, c) in scenes {
        let field = ForceField::new(&s0, &c).unwrap();
        let mut s = s0.clone();
        let mut ledger = ForceLedger::new(s.len(), p.window);
        let mut events = Vec::new();
        for t in 0..150 {
            let before: Vec<f64> = s.objects.iter().map(|o| o.scale[2]).collect();
            let positions: Vec<_> = s.objects.iter().map(|o| (o.p_plane, o.p_vert)).collect();
            field.accumulate_into(&s, &p, &mut ledger);
            handle_deadlocks(&s, &mut ledger, &p, t, &mut events);
            // detection only adds forces, positions are untouched until the step
            assert!(s.objects.iter().zip(&positions).all(|(o, q)| (o.p_plane, o.p_vert) == *q));
            let moved = step_in_place(&field.topology, &mut s, &ledger, &p);
            for (i, d) in moved.into_iter().enumerate() {
                ledger.push_displacement(i, d);
            }
            for (o, b) in s.objects.iter().zip(before) {
                assert!(o.scale[2] <= b && o.scale[2] >= p.sz_min);
            }
        }
    }
}

#[test]
fn jam_is_deterministic() {
    let p = OptimizerParams::default();
    let a = optimize(&symmetric_jam(), &ConstraintSet::default(), &p).unwrap();
    let b = optimize(&symmetric_jam(), &ConstraintSet::default(), &p).unwrap();
    assert_eq!(a.scene, b.scene);
    assert_eq!(a.residuals, b.residuals);
    assert_eq!(a.events, b.events);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn runs_are_bounded_and_reproducible(seed in 0u64..10_000, t_max in 1usize..120) {
        let p = OptimizerParams { t_max, seed, ..Default::default() };
        for (s, c) in gen_corpus(1, seed) {
            let a = optimize(&s, &c, &p).unwrap();
            let b = optimize(&s, &c, &p).unwrap();
            prop_assert!(a.iterations <= t_max);
            prop_assert_eq!(a.residuals.len(), a.iterations + 1);
            prop_assert_eq!(a.active_deadlocks.len(), a.residuals.len());
            if a.converged {
                prop_assert!(a.final_residual() < p.eps_conv);
            }
            prop_assert_eq!(&a.scene, &b.scene);
            prop_assert_eq!(&a.residuals, &b.residuals);
        }
    }

    #[test]
    fn evasion_is_orthogonal(
        angle in 0.0..360.0f64,
        tilt in -14.0..14.0f64,
        ma in 0.1..5.0f64,
        mb in 0.1..5.0f64,
        extra in 0.0..1.0f64,
    ) {
        let p = OptimizerParams::default();
        let dir = |deg: f64| { let r = deg.to_radians(); Vec2::new(r.cos(), r.sin()) };
        let mut obj = ObjectForces {
            contributions: vec![
                ForceContribution::planar(ForceKind::ColH, dir(angle) * ma, Source::Object(1)),
                ForceContribution::planar(ForceKind::BndH, dir(angle + 180.0 + tilt) * mb, Source::Room),
                ForceContribution::planar(ForceKind::Adj, dir(angle + 90.0) * extra * 0.01, Source::Object(2)),
            ],
            ..Default::default()
        };
        for _ in 0..p.window {
            obj.history.push_back(Default::default());
        }
        let f = detect_horizontal(&obj, &p).expect("opposing pair with no movement");
        let larger = if mb * p.w_bnd > ma * p.w_col { dir(angle + 180.0 + tilt) } else { dir(angle) };
        prop_assert!((f.norm() - p.lambda_evade).abs() <= 1e-12);
        prop_assert!(f.dot(larger).abs() <= 1e-9 * f.norm());
    }
}
