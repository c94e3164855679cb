//! Structured add / delete / move edits followed by re-optimization.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::EditError;
use crate::geometry::Vec2;
use crate::optimizer::{optimize, OptResult};
use crate::params::OptimizerParams;
use crate::scene::{ConstraintSet, ObjectState, ParentRef, SceneState, Topology};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EditCommand {
    Add {
        object: ObjectState,
        #[serde(default)]
        constraints: ConstraintSet,
    },
    Delete {
        ids: Vec<String>,
    },
    Move {
        id: String,
        #[serde(default)]
        p_plane: Option<Vec2>,
        #[serde(default)]
        parent: Option<ParentRef>,
        /// Hanging height, for wall and ceiling parents.
        #[serde(default)]
        p_vert: Option<f64>,
    },
}

impl EditCommand {
    /// Ids the command names directly.
    pub fn named_ids(&self) -> Vec<&str> {
        match self {
            EditCommand::Add { object, .. } => vec![object.id.as_str()],
            EditCommand::Delete { ids } => ids.iter().map(String::as_str).collect(),
            EditCommand::Move { id, .. } => vec![id.as_str()],
        }
    }
}

fn index(scene: &SceneState, id: &str) -> Result<usize, EditError> {
    scene.index_of(id).ok_or_else(|| EditError::UnknownId(id.to_string()))
}

fn single(c: &ConstraintSet, id: &str) -> bool {
    let mut only = c.clone();
    only.retain_ids(|x| x != id);
    only.is_empty()
}

/// Applies `cmd`, returning the edited scene and constraints.
///
/// Deleting an object also deletes everything it supports and every
/// constraint naming a deleted object. Moving translates the supported
/// subtree along with the object.
pub fn apply(
    scene: &SceneState,
    constraints: &ConstraintSet,
    cmd: &EditCommand,
) -> Result<(SceneState, ConstraintSet), EditError> {
    let mut s = scene.clone();
    let mut c = constraints.clone();
    match cmd {
        EditCommand::Add { object, constraints: added } => {
            if s.index_of(&object.id).is_some() {
                return Err(EditError::DuplicateId(object.id.clone()));
            }
            if !single(added, &object.id) {
                return Err(EditError::UnrelatedConstraint(object.id.clone()));
            }
            s.objects.push(object.clone());
            s.normalize()?;
            c.extend(added.clone());
        }
        EditCommand::Delete { ids } => {
            let topo = Topology::build(&s)?;
            let mut gone = BTreeSet::new();
            for id in ids {
                let i = index(&s, id)?;
                gone.insert(i);
                gone.extend(topo.descendants(i));
            }
            let removed: BTreeSet<String> = gone.iter().map(|&i| s.objects[i].id.clone()).collect();
            s.objects.retain(|o| !removed.contains(&o.id));
            c.retain_ids(|id| !removed.contains(id));
            s.normalize()?;
        }
        EditCommand::Move { id, p_plane, parent, p_vert } => {
            let i = index(&s, id)?;
            let topo = Topology::build(&s)?;
            if let Some(ParentRef::Object(pid)) = parent {
                let p = index(&s, pid)?;
                if p == i || topo.is_ancestor(i, p) {
                    return Err(EditError::MoveToDescendant { object: id.clone(), parent: pid.clone() });
                }
            }
            if let Some(target) = p_plane {
                let delta = *target - s.objects[i].p_plane;
                s.objects[i].p_plane = *target;
                for j in topo.descendants(i) {
                    s.objects[j].p_plane += delta;
                }
            }
            if let Some(p) = parent {
                s.objects[i].parent = p.clone();
            }
            if let Some(z) = p_vert {
                s.objects[i].p_vert = *z;
            }
            s.normalize()?;
        }
    }
    c.validate(&s)?;
    Ok((s, c))
}

#[derive(Clone, Debug)]
pub struct EditOutcome {
    pub result: OptResult,
    pub constraints: ConstraintSet,
    /// Largest displacement of an object the command did not touch.
    pub drift: f64,
}

/// Applies `cmd` and re-optimizes the edited scene.
pub fn edit_and_optimize(
    scene: &SceneState,
    constraints: &ConstraintSet,
    cmd: &EditCommand,
    params: &OptimizerParams,
) -> Result<EditOutcome, EditError> {
    let (edited, cons) = apply(scene, constraints, cmd)?;
    let topo = Topology::build(&edited)?;
    let mut touched = BTreeSet::new();
    for id in cmd.named_ids() {
        if let Some(i) = edited.index_of(id) {
            touched.insert(i);
            touched.extend(topo.descendants(i));
        }
    }
    let result = optimize(&edited, &cons, params)?;
    let drift = (0..edited.len())
        .filter(|i| !touched.contains(i))
        .map(|i| {
            let (a, b) = (&edited.objects[i], &result.scene.objects[i]);
            let dz = b.p_vert - a.p_vert;
            ((b.p_plane - a.p_plane).norm_sq() + dz * dz).sqrt()
        })
        .fold(0.0, f64::max);
    Ok(EditOutcome { result, constraints: cons, drift })
}
