//! Explicit-Euler force-directed loop over the whole support hierarchy.

use std::io::Write;

use crate::deadlock::{handle_deadlocks, DeadlockEvent};
use crate::error::SceneError;
use crate::forces::{Displacement, ForceField, ForceLedger};
use crate::geometry::{normalize_deg, Vec2};
use crate::params::OptimizerParams;
use crate::scene::{ConstraintSet, ObjectState, ParentRef, RoomSpec, SceneState, Topology};

#[derive(Clone, Debug)]
pub struct OptResult {
    pub scene: SceneState,
    /// Number of update steps taken.
    pub iterations: usize,
    pub converged: bool,
    /// Residual of every evaluated state; entry `t` is measured before step `t`.
    pub residuals: Vec<f64>,
    /// Objects under evasion or squeeze at each evaluated state.
    pub active_deadlocks: Vec<usize>,
    pub events: Vec<DeadlockEvent>,
}

impl OptResult {
    pub fn final_residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(0.0)
    }

    /// Writes `iteration,residual,active_deadlocks,events` rows. `events`
    /// lists the deadlocks raised at that iteration as `object:kind`,
    /// separated by `;`.
    pub fn write_trace_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["iteration", "residual", "active_deadlocks", "events"])?;
        for (t, (r, d)) in self.residuals.iter().zip(&self.active_deadlocks).enumerate() {
            let events: Vec<String> = self
                .events
                .iter()
                .filter(|e| e.iteration == t)
                .map(|e| format!("{}:{}", e.object, e.kind))
                .collect();
            w.write_record([t.to_string(), format!("{r:.9e}"), d.to_string(), events.join(";")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Sum over objects of planar force norm, vertical magnitude and torque magnitude.
pub fn residual(ledger: &ForceLedger) -> f64 {
    ledger.residual()
}

/// Yaw change for a weighted torque: full `eta_rot` at or above the
/// saturation torque, proportionally less below it.
pub fn yaw_step(torque: f64, params: &OptimizerParams) -> f64 {
    if torque == 0.0 {
        return 0.0;
    }
    params.eta_rot * torque.signum() * (torque.abs() / params.rot_saturation).min(1.0)
}

/// Applies one update in place and returns each object's displacement.
///
/// Parents move first; each child moves by its parent's planar displacement
/// plus its own. Only wall- and ceiling-hung objects move vertically, the
/// rest are re-seated on their parent afterwards.
pub fn step_in_place(
    topo: &Topology,
    scene: &mut SceneState,
    ledger: &ForceLedger,
    params: &OptimizerParams,
) -> Vec<Displacement> {
    let n = scene.len();
    let mut moved = vec![Vec2::ZERO; n];
    let z0: Vec<f64> = scene.objects.iter().map(|o| o.p_vert).collect();
    for &i in &topo.order {
        let f = &ledger.objects[i];
        let inherited = topo.parent[i].map_or(Vec2::ZERO, |p| moved[p]);
        let delta = f.plane * params.eta_trans + inherited;
        moved[i] = delta;
        let o = &mut scene.objects[i];
        o.p_plane += delta;
        if matches!(o.parent, ParentRef::Wall(_) | ParentRef::Ceiling) {
            o.p_vert += params.eta_vert * f.vert;
        }
        let dyaw = yaw_step(f.torque, params);
        if dyaw != 0.0 {
            o.yaw = normalize_deg(o.yaw + dyaw);
        }
        if let Some(sz) = f.pending_scale_z {
            o.scale[2] = sz;
        }
    }
    topo.rederive_heights(scene);
    (0..n)
        .map(|i| Displacement { plane: moved[i], vert: scene.objects[i].p_vert - z0[i] })
        .collect()
}

/// One update of `scene` from `ledger`, returning the new state.
pub fn step(scene: &SceneState, ledger: &ForceLedger, params: &OptimizerParams) -> Result<SceneState, SceneError> {
    let topo = Topology::build(scene)?;
    let mut next = scene.clone();
    step_in_place(&topo, &mut next, ledger, params);
    Ok(next)
}

/// Runs accumulate, deadlock handling and update until convergence or `t_max` steps.
///
/// A state counts as converged when the residual is below `eps_conv`, no
/// evasion or squeeze is active, and no collision contribution remains.
pub fn optimize(
    scene: &SceneState,
    constraints: &ConstraintSet,
    params: &OptimizerParams,
) -> Result<OptResult, SceneError> {
    params.validate().map_err(SceneError::InvalidParams)?;
    let mut scene = scene.clone();
    scene.normalize()?;
    let field = ForceField::new(&scene, constraints)?;
    let mut ledger = ForceLedger::new(scene.len(), params.window);
    let mut residuals = Vec::new();
    let mut active_deadlocks = Vec::new();
    let mut events = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for t in 0..=params.t_max {
        field.accumulate_into(&scene, params, &mut ledger);
        let deadlock = handle_deadlocks(&scene, &mut ledger, params, t, &mut events);
        let r = ledger.residual();
        residuals.push(r);
        active_deadlocks.push(ledger.deadlocked_count());
        if r < params.eps_conv && !deadlock && !ledger.has_collision() {
            converged = true;
            break;
        }
        if t == params.t_max || !r.is_finite() {
            break;
        }
        let moved = step_in_place(&field.topology, &mut scene, &ledger, params);
        for (i, d) in moved.into_iter().enumerate() {
            ledger.push_displacement(i, d);
        }
        iterations = t + 1;
    }

    Ok(OptResult { scene, iterations, converged, residuals, active_deadlocks, events })
}

/// Inserts groups one after another, re-optimizing the whole scene after
/// each insertion. Empty groups are skipped.
pub fn optimize_groups(
    room: RoomSpec,
    groups: &[(Vec<ObjectState>, ConstraintSet)],
    params: &OptimizerParams,
) -> Result<(OptResult, ConstraintSet), SceneError> {
    let mut scene = SceneState::from_parts(room, Vec::new())?;
    let mut constraints = ConstraintSet::default();
    let mut total: Option<OptResult> = None;
    for (objects, cons) in groups {
        if objects.is_empty() && cons.is_empty() {
            continue;
        }
        scene.objects.extend(objects.iter().cloned());
        scene.normalize()?;
        constraints.extend(cons.clone());
        let r = optimize(&scene, &constraints, params)?;
        scene = r.scene.clone();
        total = Some(match total {
            None => r,
            Some(mut acc) => {
                acc.iterations += r.iterations;
                acc.converged = r.converged;
                acc.residuals.extend(r.residuals);
                acc.active_deadlocks.extend(r.active_deadlocks);
                acc.events.extend(r.events);
                acc.scene = r.scene;
                acc
            }
        });
    }
    let result = match total {
        Some(r) => r,
        None => optimize(&scene, &constraints, params)?,
    };
    Ok((result, constraints))
}
