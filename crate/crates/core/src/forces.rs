//! Constraint evaluation: each violated constraint becomes a raw planar
//! vector, vertical scalar or torque, which the ledger weights and sums.
//!
//! Raw magnitudes keep their natural units: areas in m² (area-mode
//! collision, support, room boundary), lengths in m (SAT collision, vertical
//! collision, vertical boundary, adjacency, against-wall) and angles in
//! degrees (alignment, pointing). The per-kind weights absorb the unit
//! differences.

use std::collections::VecDeque;

use crate::error::SceneError;
use crate::geometry::{
    angle_diff_deg, clip_halfplane, footprint, nearest_distance, nearest_points, overlap_area,
    polygon_area, sat_mtv, wall_clearance, wall_inward, z_interval_overlap, Footprint, Vec2,
};
use crate::params::{CollisionMode, OptimizerParams};
use crate::scene::{AlignTarget, ConstraintSet, ObjectState, RoomSpec, SceneState, Topology, Wall};

/// Footprint overlap (m²) above which two objects collide.
pub const COLLISION_AREA_EPS: f64 = 1e-6;
/// Vertical overlap (m) above which two overlapping footprints collide.
pub const COLLISION_Z_EPS: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ForceKind {
    ColH,
    ColV,
    BndH,
    BndV,
    Sup,
    Adj,
    Wall,
    Align,
    Point,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AxisClass {
    Planar,
    Vertical,
    Rotational,
}

impl ForceKind {
    pub const ALL: [ForceKind; 9] = [
        ForceKind::ColH,
        ForceKind::ColV,
        ForceKind::BndH,
        ForceKind::BndV,
        ForceKind::Sup,
        ForceKind::Adj,
        ForceKind::Wall,
        ForceKind::Align,
        ForceKind::Point,
    ];

    pub fn weight(self, p: &OptimizerParams) -> f64 {
        match self {
            ForceKind::ColH => p.w_col,
            ForceKind::ColV => p.w_vcol,
            ForceKind::BndH | ForceKind::BndV => p.w_bnd,
            ForceKind::Sup => p.w_sup,
            ForceKind::Adj => p.w_adj,
            ForceKind::Wall => p.w_wall,
            ForceKind::Align => p.w_align,
            ForceKind::Point => p.w_pnt,
        }
    }

    pub fn axis(self) -> AxisClass {
        match self {
            ForceKind::ColV | ForceKind::BndV => AxisClass::Vertical,
            ForceKind::Align | ForceKind::Point => AxisClass::Rotational,
            _ => AxisClass::Planar,
        }
    }

    pub fn is_collision(self) -> bool {
        matches!(self, ForceKind::ColH | ForceKind::ColV)
    }
}

/// What produced a contribution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Source {
    Object(usize),
    Room,
    Floor,
    Ceiling,
    Wall(Wall),
    Angle(f64),
}

/// One raw (unweighted) constraint response acting on one object.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ForceContribution {
    pub kind: ForceKind,
    pub planar: Vec2,
    pub vertical: f64,
    pub torque: f64,
    pub source: Source,
}

impl ForceContribution {
    pub fn planar(kind: ForceKind, v: Vec2, source: Source) -> Self {
        Self { kind, planar: v, vertical: 0.0, torque: 0.0, source }
    }

    pub fn vertical(kind: ForceKind, v: f64, source: Source) -> Self {
        Self { kind, planar: Vec2::ZERO, vertical: v, torque: 0.0, source }
    }

    pub fn torque(kind: ForceKind, t: f64, source: Source) -> Self {
        Self { kind, planar: Vec2::ZERO, vertical: 0.0, torque: t, source }
    }

    pub fn weighted_planar(&self, p: &OptimizerParams) -> Vec2 {
        self.planar * self.kind.weight(p)
    }

    pub fn weighted_vertical(&self, p: &OptimizerParams) -> f64 {
        self.vertical * self.kind.weight(p)
    }

    pub fn magnitude(&self) -> f64 {
        self.planar.norm() + self.vertical.abs() + self.torque.abs()
    }
}

/// Movement of one object during one step.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Displacement {
    pub plane: Vec2,
    pub vert: f64,
}

/// Per-object accumulators and deadlock bookkeeping.
#[derive(Clone, Debug, Default)]
pub struct ObjectForces {
    pub plane: Vec2,
    pub vert: f64,
    pub torque: f64,
    pub contributions: Vec<ForceContribution>,
    /// Most recent displacements, oldest first, at most `window` long.
    pub history: VecDeque<Displacement>,
    pub evade_timer: u32,
    pub evade_force: Vec2,
    /// Z-scale to apply at the next step (vertical squeeze).
    pub pending_scale_z: Option<f64>,
    /// Evasion or squeeze acted on this object this step.
    pub deadlocked: bool,
}

impl ObjectForces {
    pub fn total(&self) -> f64 {
        self.plane.norm() + self.vert.abs() + self.torque.abs()
    }

    pub fn has_collision(&self) -> bool {
        self.contributions.iter().any(|c| c.kind.is_collision())
    }

    fn reset_step(&mut self) {
        self.plane = Vec2::ZERO;
        self.vert = 0.0;
        self.torque = 0.0;
        self.contributions.clear();
        self.pending_scale_z = None;
        self.deadlocked = false;
    }
}

#[derive(Clone, Debug, Default)]
pub struct ForceLedger {
    pub objects: Vec<ObjectForces>,
    pub window: usize,
}

impl ForceLedger {
    pub fn new(n: usize, window: usize) -> Self {
        Self { objects: vec![ObjectForces::default(); n], window }
    }

    /// Sum of planar norms, vertical magnitudes and torque magnitudes.
    pub fn residual(&self) -> f64 {
        self.objects.iter().map(ObjectForces::total).sum()
    }

    pub fn has_collision(&self) -> bool {
        self.objects.iter().any(ObjectForces::has_collision)
    }

    pub fn push_displacement(&mut self, i: usize, d: Displacement) {
        let o = &mut self.objects[i];
        o.history.push_back(d);
        while o.history.len() > self.window {
            o.history.pop_front();
        }
    }

    pub fn deadlocked_count(&self) -> usize {
        self.objects.iter().filter(|o| o.deadlocked).count()
    }
}

/// Same-level collision response on `a`; `b` receives the negation.
pub fn col_h(a: &Footprint, b: &Footprint, mode: CollisionMode, margin: f64) -> Option<Vec2> {
    let area = overlap_area(a, b);
    if area <= COLLISION_AREA_EPS {
        return None;
    }
    match mode {
        CollisionMode::Sat => {
            let mtv = sat_mtv(a, b)?;
            Some(mtv.axis * (mtv.depth + margin))
        }
        CollisionMode::Area => {
            let dir = (a.center - b.center).normalized().unwrap_or(Vec2::X);
            Some(dir * (area + margin))
        }
    }
}

/// Cross-level collision response on `a` (positive pushes up); `b` receives
/// the negation. The object with the higher vertical center is pushed up,
/// ties favour `a`.
pub fn col_v(a: &ObjectState, fa: &Footprint, b: &ObjectState, fb: &Footprint) -> Option<f64> {
    let dz = z_interval_overlap(a, b);
    if dz <= COLLISION_Z_EPS || overlap_area(fa, fb) <= COLLISION_AREA_EPS {
        return None;
    }
    Some(if a.z_center() >= b.z_center() { dz } else { -dz })
}

/// Per-side areas of the footprint outside the room: `[left, right, front, back]`.
pub fn protrusion_areas(f: &Footprint, room: &RoomSpec) -> [f64; 4] {
    let (min, max) = f.bounds();
    if min.x >= 0.0 && min.y >= 0.0 && max.x <= room.width && max.y <= room.depth {
        return [0.0; 4];
    }
    let poly = f.polygon();
    let part = |n: Vec2, off: f64| polygon_area(&clip_halfplane(&poly, n, off));
    [
        if min.x < 0.0 { part(Vec2::new(1.0, 0.0), 0.0) } else { 0.0 },
        if max.x > room.width { part(Vec2::new(-1.0, 0.0), -room.width) } else { 0.0 },
        if min.y < 0.0 { part(Vec2::new(0.0, 1.0), 0.0) } else { 0.0 },
        if max.y > room.depth { part(Vec2::new(0.0, -1.0), -room.depth) } else { 0.0 },
    ]
}

/// Inward planar boundary response, per axis the net protruding area.
/// Each protruding side adds `margin`.
pub fn bnd_h(f: &Footprint, room: &RoomSpec, margin: f64) -> Vec2 {
    let [l, r, fr, bk] = protrusion_areas(f, room).map(|a| if a > 0.0 { a + margin } else { 0.0 });
    Vec2::new(l - r, fr - bk)
}

/// Vertical boundary response as `(push up past the floor, push down past the ceiling)`.
pub fn bnd_v(obj: &ObjectState, room: &RoomSpec) -> (f64, f64) {
    let (bottom, top) = obj.z_interval();
    ((-bottom).max(0.0), -(top - room.height).max(0.0))
}

/// Centripetal pull toward the parent when too little of the child rests on it.
/// Magnitude is the uncovered child area.
pub fn sup(child: &Footprint, parent: &Footprint, ratio_threshold: f64) -> Vec2 {
    let area = child.area();
    let inter = overlap_area(child, parent);
    if inter / area >= ratio_threshold {
        return Vec2::ZERO;
    }
    match (parent.center - child.center).normalized() {
        Some(dir) => dir * (area - inter),
        None => Vec2::ZERO,
    }
}

/// Proportional spring on the nearest-point distance, acting on `a`.
/// `b` receives the negation.
pub fn adj(a: &Footprint, b: &Footprint, target: f64) -> Vec2 {
    let d = nearest_distance(a, b);
    let err = d - target;
    if err == 0.0 {
        return Vec2::ZERO;
    }
    let dir = if d > 0.0 {
        let (pa, pb) = nearest_points(a, b);
        (pb - pa).normalized()
    } else {
        None
    };
    // overlapping or touching: nearest points coincide, use the centroid line
    let dir = dir.or_else(|| (b.center - a.center).normalized()).unwrap_or(-Vec2::X);
    dir * err
}

/// Pull toward a wall when the clearance exceeds the tolerance.
pub fn wall(f: &Footprint, wall: Wall, room: &RoomSpec, tolerance: f64) -> Vec2 {
    let c = wall_clearance(f, wall, room);
    if c > tolerance {
        -wall_inward(wall) * (c - tolerance)
    } else {
        Vec2::ZERO
    }
}

/// Shortest signed yaw error toward `target_yaw`, degrees.
pub fn align_torque(yaw: f64, target_yaw: f64) -> f64 {
    angle_diff_deg(yaw, target_yaw)
}

/// Yaw that makes the object's front (+y at yaw 0) face `target`.
pub fn bearing_yaw(from: Vec2, target: Vec2) -> Option<f64> {
    let d = target - from;
    if d.is_zero() {
        return None;
    }
    Some((-d.x).atan2(d.y).to_degrees())
}

/// Yaw error toward facing `target`; `None` when the centers coincide.
pub fn point_torque(center: Vec2, yaw: f64, target: Vec2) -> Option<f64> {
    bearing_yaw(center, target).map(|b| angle_diff_deg(yaw, b))
}

#[derive(Clone, Copy, Debug)]
enum AlignIdx {
    Object(usize),
    Angle(f64),
}

/// Constraints resolved against a fixed object ordering plus the support forest.
#[derive(Clone, Debug)]
pub struct ForceField {
    pub topology: Topology,
    adjacent: Vec<(usize, usize, f64)>,
    walls: Vec<(usize, Wall)>,
    align: Vec<(usize, AlignIdx)>,
    point: Vec<(usize, usize)>,
}

impl ForceField {
    pub fn new(scene: &SceneState, constraints: &ConstraintSet) -> Result<Self, SceneError> {
        let topology = Topology::build(scene)?;
        constraints.validate(scene)?;
        let idx = |id: &str| scene.index_of(id).ok_or_else(|| SceneError::UnknownId(id.to_string()));
        let adjacent = constraints
            .adjacent
            .iter()
            .map(|c| Ok((idx(&c.a)?, idx(&c.b)?, c.distance)))
            .collect::<Result<_, SceneError>>()?;
        let walls = constraints
            .against_wall
            .iter()
            .map(|c| Ok((idx(&c.object)?, c.wall)))
            .collect::<Result<_, SceneError>>()?;
        let align = constraints
            .align_with
            .iter()
            .map(|c| {
                let t = match &c.target {
                    AlignTarget::Object(t) => AlignIdx::Object(idx(t)?),
                    AlignTarget::Angle(a) => AlignIdx::Angle(*a),
                };
                Ok((idx(&c.object)?, t))
            })
            .collect::<Result<_, SceneError>>()?;
        let point = constraints
            .point_toward
            .iter()
            .map(|c| Ok((idx(&c.object)?, idx(&c.target)?)))
            .collect::<Result<_, SceneError>>()?;
        Ok(Self { topology, adjacent, walls, align, point })
    }

    /// Recomputes every contribution and accumulator of `ledger` for `scene`.
    ///
    /// Contributions are collected per object in a fixed order: room
    /// boundary (planar, floor, ceiling), support, same-level collisions by
    /// ascending partner index, cross-level collisions likewise, then
    /// adjacency, wall, alignment and pointing in constraint order. Pairs are
    /// evaluated once with the lower index as `a`. Kinds with zero weight are
    /// skipped entirely.
    pub fn accumulate_into(&self, scene: &SceneState, params: &OptimizerParams, ledger: &mut ForceLedger) {
        let n = scene.len();
        if ledger.objects.len() != n {
            *ledger = ForceLedger::new(n, params.window);
        }
        ledger.window = params.window;
        for o in &mut ledger.objects {
            o.reset_step();
        }
        let on = |k: ForceKind| k.weight(params) != 0.0;
        let objs = &scene.objects;
        let fps: Vec<Footprint> = objs.iter().map(footprint).collect();
        let room = &scene.room;
        let lists = &mut ledger.objects;

        for i in 0..n {
            if on(ForceKind::BndH) {
                let v = bnd_h(&fps[i], room, params.contact_margin);
                if !v.is_zero() {
                    lists[i].contributions.push(ForceContribution::planar(ForceKind::BndH, v, Source::Room));
                }
            }
            if on(ForceKind::BndV) {
                let (up, down) = bnd_v(&objs[i], room);
                if up != 0.0 {
                    lists[i].contributions.push(ForceContribution::vertical(ForceKind::BndV, up, Source::Floor));
                }
                if down != 0.0 {
                    lists[i].contributions.push(ForceContribution::vertical(ForceKind::BndV, down, Source::Ceiling));
                }
            }
            if on(ForceKind::Sup) {
                if let Some(p) = self.topology.parent[i] {
                    let v = sup(&fps[i], &fps[p], params.support_ratio_threshold);
                    if !v.is_zero() {
                        lists[i].contributions.push(ForceContribution::planar(ForceKind::Sup, v, Source::Object(p)));
                    }
                }
            }
        }

        if on(ForceKind::ColH) {
            for i in 0..n {
                for j in i + 1..n {
                    if pair_class(scene, &self.topology, i, j) != Some(ForceKind::ColH) {
                        continue;
                    }
                    if let Some(v) = col_h(&fps[i], &fps[j], params.collision_mode, params.contact_margin) {
                        lists[i].contributions.push(ForceContribution::planar(ForceKind::ColH, v, Source::Object(j)));
                        lists[j].contributions.push(ForceContribution::planar(ForceKind::ColH, -v, Source::Object(i)));
                    }
                }
            }
        }

        if on(ForceKind::ColV) {
            for i in 0..n {
                for j in i + 1..n {
                    if pair_class(scene, &self.topology, i, j) != Some(ForceKind::ColV) {
                        continue;
                    }
                    if let Some(v) = col_v(&objs[i], &fps[i], &objs[j], &fps[j]) {
                        lists[i].contributions.push(ForceContribution::vertical(ForceKind::ColV, v, Source::Object(j)));
                        lists[j].contributions.push(ForceContribution::vertical(ForceKind::ColV, -v, Source::Object(i)));
                    }
                }
            }
        }

        if on(ForceKind::Adj) {
            for &(a, b, target) in &self.adjacent {
                let v = adj(&fps[a], &fps[b], target);
                if !v.is_zero() {
                    lists[a].contributions.push(ForceContribution::planar(ForceKind::Adj, v, Source::Object(b)));
                    lists[b].contributions.push(ForceContribution::planar(ForceKind::Adj, -v, Source::Object(a)));
                }
            }
        }

        if on(ForceKind::Wall) {
            for &(i, w) in &self.walls {
                let v = wall(&fps[i], w, room, params.wall_tolerance);
                if !v.is_zero() {
                    lists[i].contributions.push(ForceContribution::planar(ForceKind::Wall, v, Source::Wall(w)));
                }
            }
        }

        if on(ForceKind::Align) {
            for &(i, t) in &self.align {
                let (target, src) = match t {
                    AlignIdx::Object(j) => (objs[j].yaw, Source::Object(j)),
                    AlignIdx::Angle(a) => (a, Source::Angle(a)),
                };
                let tau = align_torque(objs[i].yaw, target);
                if tau != 0.0 {
                    lists[i].contributions.push(ForceContribution::torque(ForceKind::Align, tau, src));
                }
            }
        }

        if on(ForceKind::Point) {
            for &(i, j) in &self.point {
                if let Some(tau) = point_torque(objs[i].p_plane, objs[i].yaw, objs[j].p_plane) {
                    if tau != 0.0 {
                        lists[i].contributions.push(ForceContribution::torque(ForceKind::Point, tau, Source::Object(j)));
                    }
                }
            }
        }

        for o in lists.iter_mut() {
            for c in &o.contributions {
                let w = c.kind.weight(params);
                match c.kind.axis() {
                    AxisClass::Planar => o.plane += c.planar * w,
                    AxisClass::Vertical => o.vert += c.vertical * w,
                    AxisClass::Rotational => o.torque += c.torque * w,
                }
            }
        }
    }
}

/// Evaluates all constraints of `scene` into a fresh ledger.
pub fn accumulate(
    scene: &SceneState,
    constraints: &ConstraintSet,
    params: &OptimizerParams,
) -> Result<ForceLedger, SceneError> {
    let field = ForceField::new(scene, constraints)?;
    let mut ledger = ForceLedger::new(scene.len(), params.window);
    field.accumulate_into(scene, params, &mut ledger);
    Ok(ledger)
}

/// Which collision response a pair gets, if any.
///
/// Same-level pairs collide horizontally. Pairs in one support chain never
/// collide. Other pairs collide vertically, except when both heights are
/// fixed by floor or object support and their height ranges overlap: no
/// vertical push can move either, so they are separated horizontally.
pub fn pair_class(scene: &SceneState, topo: &Topology, i: usize, j: usize) -> Option<ForceKind> {
    let (a, b) = (&scene.objects[i], &scene.objects[j]);
    if a.parent == b.parent {
        Some(ForceKind::ColH)
    } else if topo.related(i, j) {
        None
    } else if a.parent.is_supporting() && b.parent.is_supporting() {
        (z_interval_overlap(a, b) > COLLISION_Z_EPS).then_some(ForceKind::ColH)
    } else {
        Some(ForceKind::ColV)
    }
}

/// Whether two objects collide under the engine's own rules.
pub fn objects_collide(scene: &SceneState, topo: &Topology, i: usize, j: usize) -> bool {
    let (a, b) = (&scene.objects[i], &scene.objects[j]);
    match pair_class(scene, topo, i, j) {
        Some(ForceKind::ColH) => overlap_area(&footprint(a), &footprint(b)) > COLLISION_AREA_EPS,
        Some(_) => {
            z_interval_overlap(a, b) > COLLISION_Z_EPS && overlap_area(&footprint(a), &footprint(b)) > COLLISION_AREA_EPS
        }
        None => false,
    }
}
