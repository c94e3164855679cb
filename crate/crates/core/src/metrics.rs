//! Geometric plausibility: collision, support, out-of-bounds and navigable floor.

use std::collections::VecDeque;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::SceneError;
use crate::forces::objects_collide;
use crate::geometry::{footprint, overlap_area, wall_clearance};
use crate::params::OptimizerParams;
use crate::scene::{load_scene, ParentRef, SceneState, Topology};

/// Protrusion past a wall, floor or ceiling tolerated before an object counts as out of bounds.
pub const OOB_TOLERANCE: f64 = 1e-3;
pub const NAV_CELL: f64 = 0.1;
/// Objects whose bottom sits at or above this height leave the floor walkable.
pub const NAV_CLEARANCE: f64 = 1.8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MetricsReport {
    pub objects: usize,
    /// % of objects in at least one collision.
    pub col_ob: f64,
    pub col_sc: bool,
    /// % of objects adequately supported.
    pub sup: f64,
    /// % of objects out of bounds.
    pub oob: f64,
    /// Largest connected free floor region as % of all floor cells.
    pub nav: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct MetricParams {
    pub support_ratio_threshold: f64,
    pub wall_tolerance: f64,
    pub cell: f64,
}

impl Default for MetricParams {
    fn default() -> Self {
        let p = OptimizerParams::default();
        Self { support_ratio_threshold: p.support_ratio_threshold, wall_tolerance: p.wall_tolerance, cell: NAV_CELL }
    }
}

fn percent(count: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        100.0 * count as f64 / total as f64
    }
}

pub fn colliding_objects(scene: &SceneState, topo: &Topology) -> Vec<bool> {
    let n = scene.len();
    let mut hit = vec![false; n];
    for i in 0..n {
        for j in i + 1..n {
            if objects_collide(scene, topo, i, j) {
                hit[i] = true;
                hit[j] = true;
            }
        }
    }
    hit
}

pub fn is_out_of_bounds(scene: &SceneState, i: usize) -> bool {
    let o = &scene.objects[i];
    let (min, max) = footprint(o).bounds();
    let r = &scene.room;
    min.x < -OOB_TOLERANCE
        || min.y < -OOB_TOLERANCE
        || max.x > r.width + OOB_TOLERANCE
        || max.y > r.depth + OOB_TOLERANCE
        || o.p_vert < -OOB_TOLERANCE
        || o.top() > r.height + OOB_TOLERANCE
}

pub fn is_supported(scene: &SceneState, topo: &Topology, i: usize, mp: &MetricParams) -> bool {
    let o = &scene.objects[i];
    match &o.parent {
        ParentRef::Floor => true,
        ParentRef::Object(_) => {
            let p = topo.parent[i].expect("resolved parent");
            let child = footprint(o);
            overlap_area(&child, &footprint(&scene.objects[p])) / child.area() >= mp.support_ratio_threshold
        }
        ParentRef::Wall(w) => wall_clearance(&footprint(o), *w, &scene.room) <= mp.wall_tolerance,
        ParentRef::Ceiling => (scene.room.height - o.top()).abs() <= mp.wall_tolerance,
    }
}

/// Free-floor occupancy grid, row-major with `x` fastest.
pub fn floor_grid(scene: &SceneState, cell: f64) -> (usize, usize, Vec<bool>) {
    let nx = (scene.room.width / cell + 1e-9).floor().max(1.0) as usize;
    let ny = (scene.room.depth / cell + 1e-9).floor().max(1.0) as usize;
    let blockers: Vec<_> = scene
        .objects
        .iter()
        .filter(|o| o.p_vert < NAV_CLEARANCE)
        .map(footprint)
        .collect();
    let mut free = vec![true; nx * ny];
    for f in &blockers {
        let (min, max) = f.bounds();
        let i0 = ((min.x / cell - 0.5).floor().max(0.0)) as usize;
        let j0 = ((min.y / cell - 0.5).floor().max(0.0)) as usize;
        let i1 = ((max.x / cell).ceil().max(0.0) as usize).min(nx);
        let j1 = ((max.y / cell).ceil().max(0.0) as usize).min(ny);
        for j in j0..j1 {
            for i in i0..i1 {
                let c = crate::geometry::Vec2::new((i as f64 + 0.5) * cell, (j as f64 + 0.5) * cell);
                if f.contains(c) {
                    free[j * nx + i] = false;
                }
            }
        }
    }
    (nx, ny, free)
}

/// Size of the largest 4-connected free region as a percentage of all cells.
pub fn navigability(scene: &SceneState, cell: f64) -> f64 {
    let (nx, ny, free) = floor_grid(scene, cell);
    let mut seen = vec![false; free.len()];
    let mut best = 0;
    let mut queue = VecDeque::new();
    for start in 0..free.len() {
        if !free[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut size = 0;
        while let Some(k) = queue.pop_front() {
            size += 1;
            let (i, j) = (k % nx, k / nx);
            let mut visit = |n: usize| {
                if free[n] && !seen[n] {
                    seen[n] = true;
                    queue.push_back(n);
                }
            };
            if i > 0 {
                visit(k - 1);
            }
            if i + 1 < nx {
                visit(k + 1);
            }
            if j > 0 {
                visit(k - nx);
            }
            if j + 1 < ny {
                visit(k + nx);
            }
        }
        best = best.max(size);
    }
    percent(best, nx * ny)
}

pub fn evaluate_with(scene: &SceneState, mp: &MetricParams) -> MetricsReport {
    let topo = Topology::build(scene).expect("evaluate needs a validated scene");
    let n = scene.len();
    let hit = colliding_objects(scene, &topo);
    let col = hit.iter().filter(|h| **h).count();
    let sup = (0..n).filter(|&i| is_supported(scene, &topo, i, mp)).count();
    let oob = (0..n).filter(|&i| is_out_of_bounds(scene, i)).count();
    MetricsReport {
        objects: n,
        col_ob: percent(col, n),
        col_sc: col > 0,
        sup: if n == 0 { 100.0 } else { percent(sup, n) },
        oob: percent(oob, n),
        nav: navigability(scene, mp.cell),
    }
}

pub fn evaluate(scene: &SceneState) -> MetricsReport {
    evaluate_with(scene, &MetricParams::default())
}

/// Corpus means; `col_sc` is the percentage of scenes with a collision and
/// `oob_objects` pools objects across scenes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Aggregate {
    pub scenes: usize,
    pub col_ob: f64,
    pub col_sc: f64,
    pub sup: f64,
    pub oob: f64,
    pub oob_objects: f64,
    pub nav: f64,
}

pub fn aggregate(reports: &[MetricsReport]) -> Aggregate {
    let n = reports.len();
    if n == 0 {
        return Aggregate::default();
    }
    let mean = |f: &dyn Fn(&MetricsReport) -> f64| reports.iter().map(f).sum::<f64>() / n as f64;
    let objects: usize = reports.iter().map(|r| r.objects).sum();
    let oob_count: f64 = reports.iter().map(|r| r.oob * r.objects as f64 / 100.0).sum();
    Aggregate {
        scenes: n,
        col_ob: mean(&|r| r.col_ob),
        col_sc: mean(&|r| if r.col_sc { 100.0 } else { 0.0 }),
        sup: mean(&|r| r.sup),
        oob: mean(&|r| r.oob),
        oob_objects: if objects == 0 { 0.0 } else { 100.0 * oob_count.round() / objects as f64 },
        nav: mean(&|r| r.nav),
    }
}

#[derive(Clone, Debug)]
pub struct CorpusReport {
    pub rows: Vec<(String, MetricsReport)>,
    pub aggregate: Aggregate,
}

impl CorpusReport {
    pub fn from_rows(rows: Vec<(String, MetricsReport)>) -> Self {
        let reports: Vec<_> = rows.iter().map(|(_, r)| *r).collect();
        Self { aggregate: aggregate(&reports), rows }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["scene", "objects", "COL_ob", "COL_sc", "SUP", "OOB", "NAV"])?;
        for (name, r) in &self.rows {
            w.write_record([
                name.clone(),
                r.objects.to_string(),
                format!("{:.2}", r.col_ob),
                format!("{:.2}", if r.col_sc { 100.0 } else { 0.0 }),
                format!("{:.2}", r.sup),
                format!("{:.2}", r.oob),
                format!("{:.2}", r.nav),
            ])?;
        }
        let a = &self.aggregate;
        w.write_record([
            "mean".to_string(),
            a.scenes.to_string(),
            format!("{:.2}", a.col_ob),
            format!("{:.2}", a.col_sc),
            format!("{:.2}", a.sup),
            format!("{:.2}", a.oob),
            format!("{:.2}", a.nav),
        ])?;
        w.flush()?;
        Ok(())
    }
}

/// `*.json` scene files of `dir`, sorted by name.
pub fn scene_files(dir: &Path) -> Result<Vec<PathBuf>, SceneError> {
    let io = |source| SceneError::Io { path: dir.to_path_buf(), source };
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        if path.extension().is_some_and(|e| e == "json") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Evaluates every scene file in `dir`.
pub fn evaluate_corpus(dir: &Path) -> Result<CorpusReport, SceneError> {
    let rows = scene_files(dir)?
        .par_iter()
        .map(|path| {
            let (scene, _) = load_scene(path)?;
            let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            Ok((name, evaluate(&scene)))
        })
        .collect::<Result<Vec<_>, SceneError>>()?;
    Ok(CorpusReport::from_rows(rows))
}
