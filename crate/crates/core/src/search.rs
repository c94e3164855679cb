//! Random-search hyperparameter tuning with median pruning over a scene corpus.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::SearchError;
use crate::forces::{objects_collide, point_torque, protrusion_areas, ForceField};
use crate::geometry::{angle_diff_deg, footprint, nearest_distance, overlap_area, wall_clearance, Footprint};
use crate::optimizer::{optimize, OptResult};
use crate::params::OptimizerParams;
use crate::scene::{AlignTarget, ConstraintSet, SceneState};

/// Trials evaluated together; pruning only looks at earlier batches.
pub const BATCH: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Linear,
    Log,
}

/// Optimizer fields the search may vary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tunable {
    WCol,
    WVcol,
    WBnd,
    WSup,
    WAdj,
    WWall,
    WPnt,
    WAlign,
    LambdaEvade,
    TDeadlock,
    EtaTrans,
    EtaRot,
}

impl Tunable {
    pub const ALL: [Tunable; 12] = [
        Tunable::WCol,
        Tunable::WVcol,
        Tunable::WBnd,
        Tunable::WSup,
        Tunable::WAdj,
        Tunable::WWall,
        Tunable::WPnt,
        Tunable::WAlign,
        Tunable::LambdaEvade,
        Tunable::TDeadlock,
        Tunable::EtaTrans,
        Tunable::EtaRot,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Tunable::WCol => "w_col",
            Tunable::WVcol => "w_vcol",
            Tunable::WBnd => "w_bnd",
            Tunable::WSup => "w_sup",
            Tunable::WAdj => "w_adj",
            Tunable::WWall => "w_wall",
            Tunable::WPnt => "w_pnt",
            Tunable::WAlign => "w_align",
            Tunable::LambdaEvade => "lambda_evade",
            Tunable::TDeadlock => "t_deadlock",
            Tunable::EtaTrans => "eta_trans",
            Tunable::EtaRot => "eta_rot",
        }
    }

    pub fn get(self, p: &OptimizerParams) -> f64 {
        match self {
            Tunable::WCol => p.w_col,
            Tunable::WVcol => p.w_vcol,
            Tunable::WBnd => p.w_bnd,
            Tunable::WSup => p.w_sup,
            Tunable::WAdj => p.w_adj,
            Tunable::WWall => p.w_wall,
            Tunable::WPnt => p.w_pnt,
            Tunable::WAlign => p.w_align,
            Tunable::LambdaEvade => p.lambda_evade,
            Tunable::TDeadlock => f64::from(p.t_deadlock),
            Tunable::EtaTrans => p.eta_trans,
            Tunable::EtaRot => p.eta_rot,
        }
    }

    /// Sets the field; the timer is rounded to a whole number of steps, at least one.
    pub fn set(self, p: &mut OptimizerParams, v: f64) {
        match self {
            Tunable::WCol => p.w_col = v,
            Tunable::WVcol => p.w_vcol = v,
            Tunable::WBnd => p.w_bnd = v,
            Tunable::WSup => p.w_sup = v,
            Tunable::WAdj => p.w_adj = v,
            Tunable::WWall => p.w_wall = v,
            Tunable::WPnt => p.w_pnt = v,
            Tunable::WAlign => p.w_align = v,
            Tunable::LambdaEvade => p.lambda_evade = v,
            Tunable::TDeadlock => p.t_deadlock = v.round().max(1.0) as u32,
            Tunable::EtaTrans => p.eta_trans = v,
            Tunable::EtaRot => p.eta_rot = v,
        }
    }

    /// Weights and the evasion strength are searched on a log scale.
    pub fn default_scale(self) -> Scale {
        match self {
            Tunable::TDeadlock | Tunable::EtaTrans | Tunable::EtaRot => Scale::Linear,
            _ => Scale::Log,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamRange {
    pub param: Tunable,
    pub min: f64,
    pub max: f64,
    pub scale: Scale,
}

impl ParamRange {
    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        let u: f64 = rng.gen();
        match self.scale {
            Scale::Linear => self.min + u * (self.max - self.min),
            Scale::Log => (self.min.ln() + u * (self.max.ln() - self.min.ln())).exp(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub ranges: Vec<ParamRange>,
    pub budget: usize,
    /// Scenes between pruning checks.
    pub prune_interval: usize,
    pub seed: u64,
}

impl SearchSpace {
    /// Every tunable from a tenth to ten times its value in `base`.
    pub fn around(base: &OptimizerParams, budget: usize, seed: u64) -> Self {
        let ranges = Tunable::ALL
            .iter()
            .map(|&t| {
                let v = t.get(base);
                ParamRange { param: t, min: v / 10.0, max: v * 10.0, scale: t.default_scale() }
            })
            .collect();
        Self { ranges, budget, prune_interval: 5, seed }
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        if self.budget == 0 {
            return Err(SearchError::ZeroBudget);
        }
        for r in &self.ranges {
            if !(r.min > 0.0 && r.min < r.max && r.max.is_finite()) {
                return Err(SearchError::InvalidRange(r.param.name().to_string()));
            }
        }
        Ok(())
    }

    /// Draws one parameter set; fields without a range keep their `base` value.
    pub fn sample(&self, base: &OptimizerParams, rng: &mut impl Rng) -> OptimizerParams {
        let mut p = base.clone();
        for r in &self.ranges {
            r.param.set(&mut p, r.sample(rng));
        }
        p
    }
}

/// Terminal constraint violations of one scene, by category.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Violations {
    /// Overlap area of colliding pairs, m².
    pub overlap: f64,
    /// Footprint area outside the room plus vertical overshoot, m² and m.
    pub out_of_bounds: f64,
    /// Child area not resting on its parent when below the support ratio, m².
    pub unsupported: f64,
    /// |distance − target| over adjacency constraints, m.
    pub adjacency: f64,
    /// Wall clearance beyond the tolerance, m.
    pub wall: f64,
    /// Alignment and pointing errors, radians.
    pub orientation: f64,
}

impl Violations {
    pub fn total(&self) -> f64 {
        self.overlap + self.out_of_bounds + self.unsupported + self.adjacency + self.wall + self.orientation
    }
}

pub fn violations(
    scene: &SceneState,
    constraints: &ConstraintSet,
    params: &OptimizerParams,
) -> Result<Violations, SearchError> {
    let field = ForceField::new(scene, constraints)?;
    let topo = &field.topology;
    let fps: Vec<Footprint> = scene.objects.iter().map(footprint).collect();
    let idx = |id: &str| scene.index_of(id).expect("validated constraint");
    let n = scene.len();
    let mut v = Violations::default();

    for i in 0..n {
        for j in i + 1..n {
            if objects_collide(scene, topo, i, j) {
                v.overlap += overlap_area(&fps[i], &fps[j]);
            }
        }
        let (bottom, top) = scene.objects[i].z_interval();
        v.out_of_bounds += protrusion_areas(&fps[i], &scene.room).iter().sum::<f64>()
            + (-bottom).max(0.0)
            + (top - scene.room.height).max(0.0);
        if let Some(p) = topo.parent[i] {
            let area = fps[i].area();
            let inter = overlap_area(&fps[i], &fps[p]);
            if inter / area < params.support_ratio_threshold {
                v.unsupported += area - inter;
            }
        }
    }
    for c in &constraints.adjacent {
        v.adjacency += (nearest_distance(&fps[idx(&c.a)], &fps[idx(&c.b)]) - c.distance).abs();
    }
    for c in &constraints.against_wall {
        v.wall += (wall_clearance(&fps[idx(&c.object)], c.wall, &scene.room) - params.wall_tolerance).max(0.0);
    }
    for c in &constraints.align_with {
        let yaw = scene.objects[idx(&c.object)].yaw;
        let target = match &c.target {
            AlignTarget::Object(t) => scene.objects[idx(t)].yaw,
            AlignTarget::Angle(a) => *a,
        };
        v.orientation += angle_diff_deg(yaw, target).abs().to_radians();
    }
    for c in &constraints.point_toward {
        let (o, t) = (&scene.objects[idx(&c.object)], &scene.objects[idx(&c.target)]);
        if let Some(err) = point_torque(o.p_plane, o.yaw, t.p_plane) {
            v.orientation += err.abs().to_radians();
        }
    }
    Ok(v)
}

/// Terminal violations plus final residual. Non-finite values count as infinite.
pub fn penalty(result: &OptResult, constraints: &ConstraintSet, params: &OptimizerParams) -> Result<f64, SearchError> {
    let p = violations(&result.scene, constraints, params)?.total() + result.final_residual();
    Ok(if p.is_finite() { p } else { f64::INFINITY })
}

/// Optimizes one scene with `params` and scores the result.
pub fn scene_penalty(
    scene: &SceneState,
    constraints: &ConstraintSet,
    params: &OptimizerParams,
) -> Result<f64, SearchError> {
    let r = optimize(scene, constraints, params)?;
    penalty(&r, constraints, params)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    /// Seed the parameters were drawn from; `None` for injected trials.
    pub seed: Option<u64>,
    pub params: OptimizerParams,
    /// Penalty per evaluated scene, in corpus order.
    pub penalties: Vec<f64>,
    /// Mean over `penalties`.
    pub mean: f64,
    pub pruned: bool,
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub best: TrialRecord,
    pub trials: Vec<TrialRecord>,
}

impl SearchOutcome {
    /// Writes one row per trial: id, seed, pruned flag, scenes evaluated, mean penalty, sampled values.
    pub fn write_log_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["trial", "seed", "pruned", "scenes", "mean_penalty"];
        header.extend(Tunable::ALL.iter().map(|t| t.name()));
        w.write_record(&header)?;
        for t in &self.trials {
            let mut row = vec![
                t.trial.to_string(),
                t.seed.map_or_else(String::new, |s| s.to_string()),
                t.pruned.to_string(),
                t.penalties.len().to_string(),
                format!("{:.9e}", t.mean),
            ];
            row.extend(Tunable::ALL.iter().map(|p| p.get(&t.params).to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        f64::INFINITY
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

fn median(mut xs: Vec<f64>) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    Some(if xs.len() % 2 == 1 { xs[m] } else { 0.5 * (xs[m - 1] + xs[m]) })
}

fn trial_seed(seed: u64, trial: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng.gen()
}

/// Running means of completed trials at each scene count, for pruning.
struct Medians {
    prefix_means: Vec<Vec<f64>>,
}

impl Medians {
    fn record(&mut self, penalties: &[f64]) {
        let mut sum = 0.0;
        for (k, p) in penalties.iter().enumerate() {
            sum += p;
            self.prefix_means[k].push(sum / (k + 1) as f64);
        }
    }

    fn at(&self, scenes: usize) -> Option<f64> {
        median(self.prefix_means[scenes - 1].clone())
    }
}

fn run_trial(
    corpus: &[(SceneState, ConstraintSet)],
    params: &OptimizerParams,
    prune_interval: usize,
    medians: &Medians,
) -> Result<(Vec<f64>, bool), SearchError> {
    let mut penalties = Vec::with_capacity(corpus.len());
    for (k, (scene, cons)) in corpus.iter().enumerate() {
        penalties.push(scene_penalty(scene, cons, params)?);
        let done = k + 1;
        if done < corpus.len() && prune_interval > 0 && done % prune_interval == 0 {
            if let Some(m) = medians.at(done) {
                if mean(&penalties) > m {
                    return Ok((penalties, true));
                }
            }
        }
    }
    Ok((penalties, false))
}

/// Evaluates `space.budget` sampled trials over `corpus`, after any `injected`
/// parameter sets, and returns the completed trial with the lowest mean penalty.
///
/// Trials run in parallel batches of [`BATCH`]. A trial is stopped early when
/// its running mean exceeds the median running mean of completed trials from
/// earlier batches at the same scene count. The result depends only on the
/// inputs, not on the thread count.
pub fn search(
    corpus: &[(SceneState, ConstraintSet)],
    space: &SearchSpace,
    base: &OptimizerParams,
    injected: &[OptimizerParams],
) -> Result<SearchOutcome, SearchError> {
    if corpus.is_empty() {
        return Err(SearchError::EmptyCorpus);
    }
    space.validate()?;
    let mut plan: Vec<(Option<u64>, OptimizerParams)> = injected.iter().map(|p| (None, p.clone())).collect();
    for t in 0..space.budget {
        let seed = trial_seed(space.seed, t);
        let p = space.sample(base, &mut ChaCha8Rng::seed_from_u64(seed));
        plan.push((Some(seed), p));
    }

    let mut medians = Medians { prefix_means: vec![Vec::new(); corpus.len()] };
    let mut trials = Vec::with_capacity(plan.len());
    for (b, batch) in plan.chunks(BATCH).enumerate() {
        let results = batch
            .par_iter()
            .map(|(_, p)| run_trial(corpus, p, space.prune_interval, &medians))
            .collect::<Result<Vec<_>, SearchError>>()?;
        for (k, ((seed, params), (penalties, pruned))) in batch.iter().zip(results).enumerate() {
            if !pruned {
                medians.record(&penalties);
            }
            trials.push(TrialRecord {
                trial: b * BATCH + k,
                seed: *seed,
                params: params.clone(),
                mean: mean(&penalties),
                penalties,
                pruned,
            });
        }
    }

    let best = trials
        .iter()
        .filter(|t| !t.pruned)
        .min_by(|a, b| a.mean.total_cmp(&b.mean).then(a.trial.cmp(&b.trial)))
        .cloned()
        .expect("first batch is never pruned");
    Ok(SearchOutcome { best, trials })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::gen_corpus;
    use crate::geometry::Vec2;
    use crate::scene::{ObjectState, RoomSpec};

    fn two_boxes(gap: f64) -> SceneState {
        SceneState::from_parts(
            RoomSpec::new(6.0, 6.0, 3.0),
            vec![ObjectState::new("a", [2.0, 2.0], [1.0; 3]), ObjectState::new("b", [3.0 + gap, 2.0], [1.0; 3])],
        )
        .unwrap()
    }

    #[test]
    fn overlap_counts_area() {
        let s = two_boxes(-0.5);
        let v = violations(&s, &ConstraintSet::default(), &OptimizerParams::default()).unwrap();
        assert!((v.overlap - 0.5).abs() < 1e-9);
        assert_eq!(v.total(), v.overlap);
    }

    #[test]
    fn disjoint_overlaps_add() {
        let mut s = two_boxes(-0.2);
        s.objects.push(ObjectState::new("c", [2.0, 4.5], [1.0; 3]));
        s.objects.push(ObjectState::new("d", [2.7, 4.5], [1.0; 3]));
        s.normalize().unwrap();
        let v = violations(&s, &ConstraintSet::default(), &OptimizerParams::default()).unwrap();
        assert!((v.overlap - 0.5).abs() < 1e-9);
    }

    #[test]
    fn satisfied_scene_is_residual_only() {
        let s = two_boxes(1.0);
        let p = OptimizerParams::default();
        let r = optimize(&s, &ConstraintSet::default(), &p).unwrap();
        assert!(r.converged);
        assert_eq!(penalty(&r, &ConstraintSet::default(), &p).unwrap(), r.final_residual());
    }

    #[test]
    fn out_of_bounds_area() {
        let mut s = two_boxes(1.0);
        s.objects[0].p_plane = Vec2::new(0.25, 2.0);
        let v = violations(&s, &ConstraintSet::default(), &OptimizerParams::default()).unwrap();
        assert!((v.out_of_bounds - 0.25).abs() < 1e-9);
    }

    #[test]
    fn ranges_are_tenfold() {
        let base = OptimizerParams::default();
        let space = SearchSpace::around(&base, 3, 1);
        assert_eq!(space.ranges.len(), Tunable::ALL.len());
        let w = space.ranges.iter().find(|r| r.param == Tunable::WCol).unwrap();
        assert!((w.min - 0.1134).abs() < 1e-12 && (w.max - 11.34).abs() < 1e-12);
        assert_eq!(w.scale, Scale::Log);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let p = space.sample(&base, &mut rng);
            for r in &space.ranges {
                let v = r.param.get(&p);
                assert!(v >= r.min.floor() && v <= r.max.ceil(), "{} = {v}", r.param.name());
            }
            assert!(p.validate().is_ok());
        }
    }

    #[test]
    fn errors() {
        let base = OptimizerParams::default();
        let space = SearchSpace::around(&base, 1, 0);
        assert!(matches!(search(&[], &space, &base, &[]), Err(SearchError::EmptyCorpus)));
        let corpus = gen_corpus(1, 0);
        let zero = SearchSpace { budget: 0, ..space.clone() };
        assert!(matches!(search(&corpus, &zero, &base, &[]), Err(SearchError::ZeroBudget)));
        let mut bad = space;
        bad.ranges[0].min = bad.ranges[0].max;
        assert!(matches!(search(&corpus, &bad, &base, &[]), Err(SearchError::InvalidRange(_))));
    }

    #[test]
    fn single_trial_wins_and_is_reproducible() {
        let base = OptimizerParams::default();
        let corpus = gen_corpus(2, 3);
        let space = SearchSpace::around(&base, 1, 11);
        let a = search(&corpus, &space, &base, &[]).unwrap();
        assert_eq!(a.trials.len(), 1);
        assert_eq!(a.best, a.trials[0]);
        let b = search(&corpus, &space, &base, &[]).unwrap();
        assert_eq!(a.best, b.best);
    }

    #[test]
    fn injected_defaults_bound_the_winner() {
        let base = OptimizerParams::default();
        let corpus = gen_corpus(4, 5);
        let space = SearchSpace { prune_interval: 1, ..SearchSpace::around(&base, 12, 2) };
        let out = search(&corpus, &space, &base, std::slice::from_ref(&base)).unwrap();
        assert_eq!(out.trials.len(), 13);
        assert!(!out.trials[0].pruned);
        assert!(out.best.mean <= out.trials[0].mean);
        for t in out.trials.iter().filter(|t| !t.pruned) {
            assert_eq!(t.penalties.len(), corpus.len());
            assert!(out.best.mean <= t.mean);
        }
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(vec![4.0, 1.0]), Some(2.5));
        assert_eq!(median(Vec::new()), None);
    }
}
