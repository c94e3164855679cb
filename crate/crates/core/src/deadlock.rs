//! Deadlock detection and escape: orthogonal evasion for planar jams and
//! z-scale squeeze for objects pinched between two vertical obstacles.

use serde::Serialize;

use crate::forces::{AxisClass, ForceContribution, ForceKind, ForceLedger, ObjectForces, Source};
use crate::geometry::Vec2;
use crate::params::OptimizerParams;
use crate::scene::SceneState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DeadlockKind {
    Horizontal,
    Vertical,
}

impl std::fmt::Display for DeadlockKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DeadlockKind::Horizontal => "horizontal",
            DeadlockKind::Vertical => "vertical",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeadlockEvent {
    pub object: String,
    pub kind: DeadlockKind,
    pub iteration: usize,
    /// Evasion force (horizontal events).
    pub evasion: Option<Vec2>,
    /// New z-scale (vertical events).
    pub scale_z: Option<f64>,
}

/// Strongest pair of weighted planar contributions pointing in roughly
/// opposite directions. Returns the unit axis of the larger member.
pub fn opposing_axis(contributions: &[ForceContribution], params: &OptimizerParams) -> Option<Vec2> {
    let planar: Vec<Vec2> = contributions
        .iter()
        .filter(|c| c.kind.axis() == AxisClass::Planar)
        .map(|c| c.weighted_planar(params))
        .filter(|v| !v.is_zero())
        .collect();
    let cos_limit = (180.0 - params.angle_tol).to_radians().cos();
    let mut best: Option<(f64, Vec2)> = None;
    for (i, a) in planar.iter().enumerate() {
        for b in &planar[i + 1..] {
            let (na, nb) = (a.norm(), b.norm());
            if a.dot(*b) / (na * nb) > cos_limit {
                continue;
            }
            let sum = na + nb;
            if best.is_none_or(|(s, _)| sum > s) {
                let larger = if nb > na { *b } else { *a };
                best = Some((sum, larger * (1.0 / larger.norm())));
            }
        }
    }
    best.map(|(_, axis)| axis)
}

/// Window classification of planar movement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stall {
    /// Barely moved at all.
    Idle,
    /// Moved back and forth without getting anywhere.
    Oscillating,
    /// Slow drift that nets out below the displacement threshold.
    Creeping,
}

/// How a full window of displacements failed to make progress, if it did.
pub fn classify_stall(obj: &ObjectForces, params: &OptimizerParams) -> Option<Stall> {
    if obj.history.len() < params.window {
        return None;
    }
    let cumulative: f64 = obj.history.iter().map(|d| d.plane.norm()).sum();
    let net = obj.history.iter().fold(Vec2::ZERO, |acc, d| acc + d.plane).norm();
    if net >= params.d2_max_net_disp {
        None
    } else if cumulative < params.d2_max_net_disp {
        Some(Stall::Idle)
    } else if cumulative > params.d1_min_activity {
        Some(Stall::Oscillating)
    } else {
        Some(Stall::Creeping)
    }
}

fn planar_stall(obj: &ObjectForces, params: &OptimizerParams) -> bool {
    classify_stall(obj, params).is_some()
}

/// Evasion force (before the side choice) if the object is stuck between
/// opposing planar forces. Needs a full displacement window.
pub fn detect_horizontal(obj: &ObjectForces, params: &OptimizerParams) -> Option<Vec2> {
    if obj.history.len() < params.window || obj.contributions.len() < 2 {
        return None;
    }
    if !planar_stall(obj, params) {
        return None;
    }
    opposing_axis(&obj.contributions, params).map(|axis| axis.perp() * params.lambda_evade)
}

/// Arms the evasion timer with `force` and injects it for the current step.
/// Re-arming an active timer resets it.
pub fn trigger_evasion(obj: &mut ObjectForces, force: Vec2, params: &OptimizerParams) {
    obj.evade_force = force;
    obj.evade_timer = params.t_deadlock;
    obj.plane += force;
    obj.deadlocked = true;
}

/// Injects the stored evasion force while the timer runs. Returns whether it did.
pub fn apply_evasion(obj: &mut ObjectForces) -> bool {
    if obj.evade_timer == 0 {
        return false;
    }
    obj.plane += obj.evade_force;
    obj.evade_timer -= 1;
    obj.deadlocked = true;
    true
}

/// Free vertical room between the obstacles pushing the object up and down.
fn vertical_gap(scene: &SceneState, i: usize, contributions: &[ForceContribution]) -> Option<f64> {
    let mut floor = f64::NEG_INFINITY;
    let mut ceiling = f64::INFINITY;
    for c in contributions.iter().filter(|c| c.kind.axis() == AxisClass::Vertical) {
        match (c.kind, c.source) {
            (ForceKind::BndV, Source::Floor) => floor = floor.max(0.0),
            (ForceKind::BndV, Source::Ceiling) => ceiling = ceiling.min(scene.room.height),
            (ForceKind::ColV, Source::Object(j)) if j != i => {
                let other = &scene.objects[j];
                if c.vertical > 0.0 {
                    floor = floor.max(other.top());
                } else {
                    ceiling = ceiling.min(other.p_vert);
                }
            }
            _ => {}
        }
    }
    (floor.is_finite() && ceiling.is_finite()).then(|| (ceiling - floor).max(0.0))
}

/// New z-scale if the object is pinched vertically and does not fit its gap.
pub fn detect_vertical(scene: &SceneState, i: usize, obj: &ObjectForces, params: &OptimizerParams) -> Option<f64> {
    if obj.history.len() < params.window {
        return None;
    }
    let vertical = obj.contributions.iter().filter(|c| c.kind.axis() == AxisClass::Vertical);
    let (mut up, mut down) = (false, false);
    for c in vertical {
        up |= c.vertical > 0.0;
        down |= c.vertical < 0.0;
    }
    if !(up && down) {
        return None;
    }
    let net_z: f64 = obj.history.iter().map(|d| d.vert).sum();
    if net_z.abs() >= params.d2_max_net_disp {
        return None;
    }
    let o = &scene.objects[i];
    let gap = vertical_gap(scene, i, &obj.contributions)?;
    let h = o.height();
    if gap >= h - 1e-9 {
        return None;
    }
    let sz = (o.scale[2] * gap / h).max(params.sz_min);
    (sz < o.scale[2]).then_some(sz)
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic ±1 for the evasion side of object `id` at `iteration`.
pub fn evasion_side(seed: u64, id: &str, iteration: usize) -> f64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in id.bytes() {
        h = (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3);
    }
    if mix(mix(seed ^ h) ^ iteration as u64) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Runs the timer pass, horizontal detection and vertical detection for every
/// object. Returns whether any evasion or squeeze is active this step.
pub fn handle_deadlocks(
    scene: &SceneState,
    ledger: &mut ForceLedger,
    params: &OptimizerParams,
    iteration: usize,
    events: &mut Vec<DeadlockEvent>,
) -> bool {
    if !params.deadlock_guard {
        return false;
    }
    let mut any = false;
    for (i, obj) in ledger.objects.iter_mut().enumerate() {
        if apply_evasion(obj) {
            any = true;
            continue;
        }
        let id = &scene.objects[i].id;
        if let Some(f) = detect_horizontal(obj, params) {
            let f = f * evasion_side(params.seed, id, iteration);
            trigger_evasion(obj, f, params);
            events.push(DeadlockEvent {
                object: id.clone(),
                kind: DeadlockKind::Horizontal,
                iteration,
                evasion: Some(f),
                scale_z: None,
            });
            any = true;
        }
        if let Some(sz) = detect_vertical(scene, i, obj, params) {
            obj.pending_scale_z = Some(sz);
            obj.deadlocked = true;
            events.push(DeadlockEvent {
                object: id.clone(),
                kind: DeadlockKind::Vertical,
                iteration,
                evasion: None,
                scale_z: Some(sz),
            });
            any = true;
        }
    }
    any
}
