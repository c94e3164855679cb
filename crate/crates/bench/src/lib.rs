//! Fixed optimizer workloads shared by the benchmarks.

use forcelayout::fixtures::{cluttered_room, living_room, symmetric_jam};
use forcelayout::{gen_corpus, ConstraintSet, OptimizerParams, SceneState};

pub struct Workload {
    pub name: &'static str,
    pub scene: SceneState,
    pub constraints: ConstraintSet,
    pub params: OptimizerParams,
}

/// Params that never declare convergence, so every run costs exactly `iters` steps.
pub fn fixed_iterations(iters: usize) -> OptimizerParams {
    OptimizerParams {
        t_max: iters,
        eps_conv: f64::MIN_POSITIVE,
        ..Default::default()
    }
}

pub fn workloads() -> Vec<Workload> {
    let (clutter, clutter_c) = cluttered_room();
    let (living, living_c) = living_room();
    let (synth, synth_c) = gen_corpus(1, 11).remove(0);
    vec![
        Workload {
            name: "cluttered_300",
            scene: clutter,
            constraints: clutter_c,
            params: fixed_iterations(300),
        },
        Workload {
            name: "living_room",
            scene: living,
            constraints: living_c,
            params: OptimizerParams::default(),
        },
        Workload {
            name: "symmetric_jam",
            scene: symmetric_jam(),
            constraints: ConstraintSet::default(),
            params: OptimizerParams::default(),
        },
        Workload {
            name: "synthetic_11",
            scene: synth,
            constraints: synth_c,
            params: OptimizerParams::default(),
        },
    ]
}
