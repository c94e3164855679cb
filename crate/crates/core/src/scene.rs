//! Scene data model, support hierarchy and the scene file format.
//!
//! Positions are stored in world coordinates. `p_plane` is the footprint
//! center and `p_vert` the bottom face height. Objects resting on the floor
//! or on another object have `p_vert` derived from their parent; objects
//! hanging from a wall or the ceiling keep the stored value.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::SceneError;
use crate::geometry::{normalize_deg, Vec2};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Wall {
    Left,
    Right,
    Front,
    Back,
}

impl Wall {
    pub const ALL: [Wall; 4] = [Wall::Left, Wall::Right, Wall::Front, Wall::Back];
}

impl fmt::Display for Wall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Wall::Left => "left",
            Wall::Right => "right",
            Wall::Front => "front",
            Wall::Back => "back",
        })
    }
}

/// Axis-aligned room with one corner at the origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoomSpec {
    pub width: f64,
    pub depth: f64,
    pub height: f64,
}

impl RoomSpec {
    pub fn new(width: f64, depth: f64, height: f64) -> Self {
        Self { width, depth, height }
    }

    fn is_valid(&self) -> bool {
        [self.width, self.depth, self.height]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0)
    }
}

/// Supporting surface of an object. Objects sharing a `ParentRef` form a level.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParentRef {
    Floor,
    Ceiling,
    Wall(Wall),
    Object(String),
}

impl ParentRef {
    /// Floor and object parents fix the object's height.
    pub fn is_supporting(&self) -> bool {
        matches!(self, ParentRef::Floor | ParentRef::Object(_))
    }
}

impl fmt::Display for ParentRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParentRef::Floor => f.write_str("floor"),
            ParentRef::Ceiling => f.write_str("ceiling"),
            ParentRef::Wall(w) => write!(f, "wall:{w}"),
            ParentRef::Object(id) => write!(f, "object:{id}"),
        }
    }
}

fn unit_scale() -> [f64; 3] {
    [1.0, 1.0, 1.0]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectState {
    pub id: String,
    #[serde(default)]
    pub name: String,
    pub p_plane: Vec2,
    #[serde(default)]
    pub p_vert: f64,
    #[serde(default)]
    pub yaw: f64,
    pub base_dims: [f64; 3],
    #[serde(default = "unit_scale")]
    pub scale: [f64; 3],
    pub parent: ParentRef,
}

impl ObjectState {
    /// Floor-standing object at yaw 0 and unit scale.
    pub fn new(id: impl Into<String>, p_plane: [f64; 2], base_dims: [f64; 3]) -> Self {
        let id = id.into();
        Self {
            name: id.clone(),
            id,
            p_plane: p_plane.into(),
            p_vert: 0.0,
            yaw: 0.0,
            base_dims,
            scale: unit_scale(),
            parent: ParentRef::Floor,
        }
    }

    pub fn with_parent(mut self, parent: ParentRef) -> Self {
        self.parent = parent;
        self
    }

    pub fn with_yaw(mut self, yaw: f64) -> Self {
        self.yaw = yaw;
        self
    }

    pub fn with_z(mut self, z: f64) -> Self {
        self.p_vert = z;
        self
    }

    pub fn effective_dims(&self) -> [f64; 3] {
        [
            self.base_dims[0] * self.scale[0],
            self.base_dims[1] * self.scale[1],
            self.base_dims[2] * self.scale[2],
        ]
    }

    pub fn height(&self) -> f64 {
        self.base_dims[2] * self.scale[2]
    }

    pub fn top(&self) -> f64 {
        self.p_vert + self.height()
    }

    pub fn z_interval(&self) -> (f64, f64) {
        (self.p_vert, self.top())
    }

    pub fn z_center(&self) -> f64 {
        self.p_vert + 0.5 * self.height()
    }

    fn validate(&self) -> Result<(), SceneError> {
        if !self.base_dims.iter().all(|d| d.is_finite() && *d > 0.0) {
            return Err(SceneError::NonPositiveDimension(self.id.clone()));
        }
        if !self.scale.iter().all(|s| s.is_finite() && *s > 0.0 && *s <= 1.0) {
            return Err(SceneError::InvalidScale(self.id.clone()));
        }
        if ![self.p_plane.x, self.p_plane.y, self.p_vert, self.yaw]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(SceneError::NonFinitePose(self.id.clone()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Adjacent {
    pub a: String,
    pub b: String,
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgainstWall {
    pub object: String,
    pub wall: Wall,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointToward {
    pub object: String,
    pub target: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlignTarget {
    Object(String),
    Angle(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlignWith {
    pub object: String,
    pub target: AlignTarget,
}

/// Semantic relations predicted upstream of the optimizer.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConstraintSet {
    pub adjacent: Vec<Adjacent>,
    pub against_wall: Vec<AgainstWall>,
    pub point_toward: Vec<PointToward>,
    pub align_with: Vec<AlignWith>,
}

impl ConstraintSet {
    pub fn is_empty(&self) -> bool {
        self.adjacent.is_empty()
            && self.against_wall.is_empty()
            && self.point_toward.is_empty()
            && self.align_with.is_empty()
    }

    pub fn len(&self) -> usize {
        self.adjacent.len() + self.against_wall.len() + self.point_toward.len() + self.align_with.len()
    }

    /// Whether any entry names `id`.
    pub fn references(&self, id: &str) -> bool {
        self.adjacent.iter().any(|c| c.a == id || c.b == id)
            || self.against_wall.iter().any(|c| c.object == id)
            || self.point_toward.iter().any(|c| c.object == id || c.target == id)
            || self.align_with.iter().any(|c| {
                c.object == id || matches!(&c.target, AlignTarget::Object(t) if t == id)
            })
    }

    /// Drops every entry naming an id for which `pred` holds.
    pub fn retain_ids(&mut self, pred: impl Fn(&str) -> bool) {
        self.adjacent.retain(|c| pred(&c.a) && pred(&c.b));
        self.against_wall.retain(|c| pred(&c.object));
        self.point_toward.retain(|c| pred(&c.object) && pred(&c.target));
        self.align_with.retain(|c| {
            pred(&c.object)
                && match &c.target {
                    AlignTarget::Object(t) => pred(t),
                    AlignTarget::Angle(_) => true,
                }
        });
    }

    pub fn extend(&mut self, other: ConstraintSet) {
        self.adjacent.extend(other.adjacent);
        self.against_wall.extend(other.against_wall);
        self.point_toward.extend(other.point_toward);
        self.align_with.extend(other.align_with);
    }

    pub fn validate(&self, scene: &SceneState) -> Result<(), SceneError> {
        let known = |id: &str| -> Result<(), SceneError> {
            scene
                .index_of(id)
                .map(|_| ())
                .ok_or_else(|| SceneError::UnknownId(id.to_string()))
        };
        for c in &self.adjacent {
            known(&c.a)?;
            known(&c.b)?;
            if c.a == c.b {
                return Err(SceneError::SelfReference(c.a.clone()));
            }
            if !(c.distance >= 0.0 && c.distance.is_finite()) {
                return Err(SceneError::NegativeDistance { a: c.a.clone(), b: c.b.clone() });
            }
        }
        for c in &self.against_wall {
            known(&c.object)?;
        }
        for c in &self.point_toward {
            known(&c.object)?;
            known(&c.target)?;
            if c.object == c.target {
                return Err(SceneError::SelfReference(c.object.clone()));
            }
        }
        for c in &self.align_with {
            known(&c.object)?;
            if let AlignTarget::Object(t) = &c.target {
                known(t)?;
                if *t == c.object {
                    return Err(SceneError::SelfReference(c.object.clone()));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SceneState {
    pub room: RoomSpec,
    pub objects: Vec<ObjectState>,
}

impl SceneState {
    pub fn new(room: RoomSpec) -> Self {
        Self { room, objects: Vec::new() }
    }

    /// Validates the scene and recomputes derived heights.
    pub fn from_parts(room: RoomSpec, objects: Vec<ObjectState>) -> Result<Self, SceneError> {
        let mut scene = Self { room, objects };
        scene.normalize()?;
        Ok(scene)
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.objects.iter().position(|o| o.id == id)
    }

    pub fn get(&self, id: &str) -> Option<&ObjectState> {
        self.objects.iter().find(|o| o.id == id)
    }

    /// Parent surface → member object indices.
    pub fn levels(&self) -> BTreeMap<ParentRef, Vec<usize>> {
        let mut levels: BTreeMap<ParentRef, Vec<usize>> = BTreeMap::new();
        for (i, o) in self.objects.iter().enumerate() {
            levels.entry(o.parent.clone()).or_default().push(i);
        }
        levels
    }

    pub fn level_of(&self, id: &str) -> Result<&ParentRef, SceneError> {
        self.get(id)
            .map(|o| &o.parent)
            .ok_or_else(|| SceneError::UnknownId(id.to_string()))
    }

    pub fn same_level(&self, a: &str, b: &str) -> Result<bool, SceneError> {
        Ok(self.level_of(a)? == self.level_of(b)?)
    }

    /// Height of the object's bottom face implied by its parent.
    pub fn derive_vertical(&self, obj: &ObjectState) -> Result<f64, SceneError> {
        match &obj.parent {
            ParentRef::Floor => Ok(0.0),
            ParentRef::Object(pid) => self
                .get(pid)
                .map(ObjectState::top)
                .ok_or_else(|| SceneError::DanglingParent {
                    object: obj.id.clone(),
                    parent: pid.clone(),
                }),
            ParentRef::Wall(_) | ParentRef::Ceiling => Ok(obj.p_vert),
        }
    }

    /// Validates all invariants, normalizes yaw and re-derives supported heights.
    pub fn normalize(&mut self) -> Result<(), SceneError> {
        if !self.room.is_valid() {
            return Err(SceneError::InvalidRoom);
        }
        for o in &self.objects {
            o.validate()?;
        }
        for o in &mut self.objects {
            o.yaw = normalize_deg(o.yaw);
        }
        let topo = Topology::build(self)?;
        topo.rederive_heights(self);
        Ok(())
    }
}

/// Resolved support forest: parent indices and a parents-first order.
#[derive(Clone, Debug)]
pub struct Topology {
    pub parent: Vec<Option<usize>>,
    pub order: Vec<usize>,
}

impl Topology {
    pub fn build(scene: &SceneState) -> Result<Self, SceneError> {
        let mut index: HashMap<&str, usize> = HashMap::with_capacity(scene.len());
        for (i, o) in scene.objects.iter().enumerate() {
            if index.insert(o.id.as_str(), i).is_some() {
                return Err(SceneError::DuplicateId(o.id.clone()));
            }
        }
        let mut parent = Vec::with_capacity(scene.len());
        for o in &scene.objects {
            parent.push(match &o.parent {
                ParentRef::Object(pid) => Some(*index.get(pid.as_str()).ok_or_else(|| {
                    SceneError::DanglingParent { object: o.id.clone(), parent: pid.clone() }
                })?),
                _ => None,
            });
        }

        // 0 = unvisited, 1 = on stack, 2 = done
        let n = scene.len();
        let mut state = vec![0u8; n];
        let mut order = Vec::with_capacity(n);
        for start in 0..n {
            let mut chain = Vec::new();
            let mut cur = Some(start);
            while let Some(i) = cur {
                match state[i] {
                    2 => break,
                    1 => return Err(SceneError::ParentCycle(scene.objects[i].id.clone())),
                    _ => {
                        state[i] = 1;
                        chain.push(i);
                        cur = parent[i];
                    }
                }
            }
            for &i in chain.iter().rev() {
                state[i] = 2;
                order.push(i);
            }
        }
        Ok(Self { parent, order })
    }

    /// Whether `anc` is a transitive parent of `i`.
    pub fn is_ancestor(&self, anc: usize, i: usize) -> bool {
        let mut cur = self.parent[i];
        while let Some(p) = cur {
            if p == anc {
                return true;
            }
            cur = self.parent[p];
        }
        false
    }

    pub fn related(&self, a: usize, b: usize) -> bool {
        self.is_ancestor(a, b) || self.is_ancestor(b, a)
    }

    /// Indices of all transitive children of `i`.
    pub fn descendants(&self, i: usize) -> Vec<usize> {
        (0..self.parent.len()).filter(|&j| self.is_ancestor(i, j)).collect()
    }

    /// Sets `p_vert` of every floor- or object-supported object, parents first.
    pub fn rederive_heights(&self, scene: &mut SceneState) {
        for &i in &self.order {
            let z = match (&scene.objects[i].parent, self.parent[i]) {
                (ParentRef::Floor, _) => 0.0,
                (ParentRef::Object(_), Some(p)) => scene.objects[p].top(),
                _ => continue,
            };
            scene.objects[i].p_vert = z;
        }
    }
}

/// On-disk scene document: room, objects and their constraints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneFile {
    pub room: RoomSpec,
    #[serde(default)]
    pub objects: Vec<ObjectState>,
    #[serde(default, skip_serializing_if = "ConstraintSet::is_empty")]
    pub constraints: ConstraintSet,
}

pub fn parse_scene(text: &str) -> Result<(SceneState, ConstraintSet), SceneError> {
    let file: SceneFile = serde_json::from_str(text)?;
    let scene = SceneState::from_parts(file.room, file.objects)?;
    file.constraints.validate(&scene)?;
    Ok((scene, file.constraints))
}

pub fn load_scene(path: impl AsRef<Path>) -> Result<(SceneState, ConstraintSet), SceneError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|source| SceneError::Io { path: path.to_path_buf(), source })?;
    parse_scene(&text)
}

pub fn scene_to_json(scene: &SceneState, constraints: &ConstraintSet) -> String {
    let file = SceneFile {
        room: scene.room,
        objects: scene.objects.clone(),
        constraints: constraints.clone(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("scene serializes");
    s.push('\n');
    s
}

/// Reads a constraints-only document (the `constraints` object of a scene file).
pub fn load_constraints(path: impl AsRef<Path>) -> Result<ConstraintSet, SceneError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|source| SceneError::Io { path: path.to_path_buf(), source })?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn room() -> RoomSpec {
        RoomSpec::new(5.0, 4.0, 2.6)
    }

    #[test]
    fn empty_scene_is_valid() {
        let (scene, cons) = parse_scene(r#"{"room":{"width":5,"depth":4,"height":2.6},"objects":[]}"#).unwrap();
        assert!(scene.is_empty());
        assert!(cons.is_empty());
        assert!(scene.levels().is_empty());
    }

    #[test]
    fn self_parent_is_a_cycle() {
        let obj = ObjectState::new("a", [1.0, 1.0], [1.0, 1.0, 1.0])
            .with_parent(ParentRef::Object("a".into()));
        let err = SceneState::from_parts(room(), vec![obj]).unwrap_err();
        assert!(matches!(err, SceneError::ParentCycle(id) if id == "a"));
    }

    #[test]
    fn two_cycle_rejected() {
        let a = ObjectState::new("a", [1.0, 1.0], [1.0, 1.0, 1.0]).with_parent(ParentRef::Object("b".into()));
        let b = ObjectState::new("b", [1.0, 1.0], [1.0, 1.0, 1.0]).with_parent(ParentRef::Object("a".into()));
        assert!(matches!(SceneState::from_parts(room(), vec![a, b]), Err(SceneError::ParentCycle(_))));
    }

    #[test]
    fn lamp_on_table_is_flush() {
        let table = ObjectState::new("table", [2.0, 2.0], [1.2, 0.8, 0.7]);
        let lamp = ObjectState::new("lamp", [2.0, 2.0], [0.2, 0.2, 0.4])
            .with_parent(ParentRef::Object("table".into()))
            .with_z(5.0);
        let scene = SceneState::from_parts(room(), vec![lamp, table]).unwrap();
        assert_eq!(scene.get("lamp").unwrap().p_vert, 0.7);
    }

    #[test]
    fn derive_vertical_rules() {
        let base = ObjectState::new("box", [1.0, 1.0], [1.0, 1.0, 0.75]);
        let cup = ObjectState::new("cup", [1.0, 1.0], [0.1, 0.1, 0.1]).with_parent(ParentRef::Object("box".into()));
        let lamp = ObjectState::new("lamp", [3.0, 3.0], [0.3, 0.3, 0.2])
            .with_parent(ParentRef::Ceiling)
            .with_z(2.4);
        let scene = SceneState::from_parts(room(), vec![base.clone(), cup.clone(), lamp.clone()]).unwrap();
        assert_eq!(scene.derive_vertical(&base).unwrap(), 0.0);
        assert_eq!(scene.derive_vertical(&cup).unwrap(), 0.75);
        assert_eq!(scene.derive_vertical(&lamp).unwrap(), 2.4);

        let orphan = ObjectState::new("x", [1.0, 1.0], [0.1, 0.1, 0.1]).with_parent(ParentRef::Object("nope".into()));
        assert!(matches!(scene.derive_vertical(&orphan), Err(SceneError::DanglingParent { .. })));
    }

    #[test]
    fn levels_and_same_level() {
        let objs = vec![
            ObjectState::new("table", [2.0, 2.0], [1.2, 0.8, 0.7]),
            ObjectState::new("chair", [3.0, 2.0], [0.5, 0.5, 0.9]),
            ObjectState::new("book1", [2.0, 2.0], [0.2, 0.3, 0.05]).with_parent(ParentRef::Object("table".into())),
            ObjectState::new("book2", [2.3, 2.0], [0.2, 0.3, 0.05]).with_parent(ParentRef::Object("table".into())),
        ];
        let scene = SceneState::from_parts(room(), objs).unwrap();
        assert!(scene.same_level("table", "chair").unwrap());
        assert!(!scene.same_level("book1", "chair").unwrap());
        assert!(scene.same_level("book1", "book2").unwrap());
        assert!(matches!(scene.same_level("book1", "ghost"), Err(SceneError::UnknownId(_))));
        assert_eq!(scene.levels().len(), 2);
    }

    #[test]
    fn schema_errors_name_the_object() {
        let bad_dim = ObjectState::new("flat", [1.0, 1.0], [1.0, 0.0, 1.0]);
        assert!(matches!(
            SceneState::from_parts(room(), vec![bad_dim]),
            Err(SceneError::NonPositiveDimension(id)) if id == "flat"
        ));
        let dup = vec![
            ObjectState::new("a", [1.0, 1.0], [1.0, 1.0, 1.0]),
            ObjectState::new("a", [2.0, 1.0], [1.0, 1.0, 1.0]),
        ];
        assert!(matches!(SceneState::from_parts(room(), dup), Err(SceneError::DuplicateId(_))));
        assert!(parse_scene(r#"{"room":{"width":5},"objects":[]}"#).is_err());
    }

    #[test]
    fn constraints_must_resolve() {
        let text = r#"{
            "room": {"width": 5, "depth": 4, "height": 2.6},
            "objects": [{"id": "a", "p_plane": [1, 1], "base_dims": [1, 1, 1], "parent": "floor"}],
            "constraints": {"adjacent": [{"a": "a", "b": "ghost", "distance": 0.5}]}
        }"#;
        assert!(matches!(parse_scene(text), Err(SceneError::UnknownId(id)) if id == "ghost"));
    }

    #[test]
    fn file_format_shapes() {
        let text = r#"{
            "room": {"width": 5, "depth": 4, "height": 2.6},
            "objects": [
                {"id": "shelf", "p_plane": [1, 3.9], "p_vert": 1.5, "yaw": -90, "base_dims": [1, 0.2, 0.3], "parent": {"wall": "back"}},
                {"id": "vase", "p_plane": [1, 3.9], "base_dims": [0.1, 0.1, 0.2], "parent": {"object": "shelf"}}
            ],
            "constraints": {"align_with": [{"object": "vase", "target": {"angle": 90}}]}
        }"#;
        let (scene, cons) = parse_scene(text).unwrap();
        assert_eq!(scene.objects[0].yaw, 270.0);
        assert_eq!(scene.objects[0].parent, ParentRef::Wall(Wall::Back));
        assert!((scene.objects[1].p_vert - 1.8).abs() < 1e-12);
        assert_eq!(cons.align_with[0].target, AlignTarget::Angle(90.0));
    }
}
