//! Small canonical scenes shared by tests, benchmarks and the CLI.

use crate::editor::EditCommand;
use crate::geometry::Vec2;
use crate::scene::{ConstraintSet, ObjectState, ParentRef, RoomSpec, SceneState, Wall};

/// Two wide cabinets side by side in a corridor narrower than their combined
/// width. Collision pushes them into the side walls and the boundary pushes
/// back, so the planar forces cancel with the overlap unresolved.
pub fn symmetric_jam() -> SceneState {
    SceneState::from_parts(
        RoomSpec::new(2.0, 8.0, 3.0),
        vec![
            ObjectState::new("cabinet_a", [0.6, 4.0], [1.2, 1.0, 0.8]),
            ObjectState::new("cabinet_b", [1.4, 4.0], [1.2, 1.0, 0.8]),
        ],
    )
    .expect("valid fixture")
}

/// A wall-hung unit of height 1.0 above a 1.2 m floor cabinet under a 2.0 m
/// ceiling: 0.8 m of vertical room.
pub fn vertical_squeeze() -> SceneState {
    SceneState::from_parts(
        RoomSpec::new(4.0, 4.0, 2.0),
        vec![
            ObjectState::new("cabinet", [2.0, 3.5], [1.0, 1.0, 1.2]),
            ObjectState::new("wall_unit", [2.0, 3.7], [1.0, 0.6, 1.0])
                .with_parent(ParentRef::Wall(Wall::Back))
                .with_z(1.1),
        ],
    )
    .expect("valid fixture")
}

/// Living-room corner with a supported lamp and a few semantic relations.
pub fn living_room() -> (SceneState, ConstraintSet) {
    let scene = SceneState::from_parts(
        RoomSpec::new(5.0, 4.0, 2.7),
        vec![
            ObjectState::new("sofa", [2.5, 0.8], [2.0, 0.9, 0.8]),
            ObjectState::new("table", [2.6, 1.6], [1.0, 0.6, 0.45]),
            ObjectState::new("tv_stand", [2.4, 3.2], [1.6, 0.45, 0.5]).with_yaw(180.0),
            ObjectState::new("lamp", [2.9, 1.7], [0.3, 0.3, 0.5]).with_parent(ParentRef::Object("table".into())),
            ObjectState::new("pendant", [2.5, 2.0], [0.5, 0.5, 0.4]).with_parent(ParentRef::Ceiling).with_z(2.3),
        ],
    )
    .expect("valid fixture");
    let constraints = serde_json::from_str(
        r#"{
            "adjacent": [{"a": "sofa", "b": "table", "distance": 0.4}],
            "against_wall": [{"object": "tv_stand", "wall": "back"}, {"object": "sofa", "wall": "front"}],
            "point_toward": [{"object": "tv_stand", "target": "sofa"}],
            "align_with": [{"object": "table", "target": {"object": "sofa"}}]
        }"#,
    )
    .expect("valid constraints");
    (scene, constraints)
}

/// Twenty objects on a jittered grid in a 6 × 5 room, several overlapping.
pub fn cluttered_room() -> (SceneState, ConstraintSet) {
    let mut objects = Vec::with_capacity(20);
    for k in 0..14 {
        let (col, row) = ((k % 5) as f64, (k / 5) as f64);
        let jitter = if k % 3 == 0 { 0.35 } else { 0.0 };
        let yaw = [0.0, 90.0, 15.0, 180.0][k % 4];
        objects.push(
            ObjectState::new(format!("item_{k}"), [0.8 + 1.1 * col + jitter, 0.9 + 1.5 * row], [1.0, 0.7, 0.5 + 0.05 * k as f64])
                .with_yaw(yaw),
        );
    }
    for (k, parent) in [(14, 0), (15, 1), (16, 6)] {
        let p = objects[parent].p_plane;
        objects.push(
            ObjectState::new(format!("item_{k}"), [p.x + 0.2, p.y], [0.3, 0.3, 0.3])
                .with_parent(ParentRef::Object(format!("item_{parent}"))),
        );
    }
    objects.push(ObjectState::new("shelf_a", [1.5, 4.8], [1.2, 0.3, 0.4]).with_parent(ParentRef::Wall(Wall::Back)).with_yaw(180.0).with_z(1.6));
    objects.push(ObjectState::new("shelf_b", [2.2, 4.8], [1.2, 0.3, 0.4]).with_parent(ParentRef::Wall(Wall::Back)).with_yaw(180.0).with_z(1.8));
    objects.push(ObjectState::new("pendant", [3.0, 2.5], [0.5, 0.5, 0.4]).with_parent(ParentRef::Ceiling).with_z(2.4));
    let scene = SceneState::from_parts(RoomSpec::new(6.0, 5.0, 2.8), objects).expect("valid fixture");
    let constraints = serde_json::from_str(
        r#"{
            "adjacent": [{"a": "item_2", "b": "item_7", "distance": 0.3}, {"a": "item_10", "b": "item_11", "distance": 0.2}],
            "against_wall": [{"object": "item_4", "wall": "right"}, {"object": "shelf_a", "wall": "back"}, {"object": "shelf_b", "wall": "back"}],
            "point_toward": [{"object": "item_12", "target": "item_7"}],
            "align_with": [{"object": "item_3", "target": {"angle": 90}}]
        }"#,
    )
    .expect("valid constraints");
    (scene, constraints)
}

/// One editing scenario: a furnished room plus an add, a delete and a move.
#[derive(Clone, Debug)]
pub struct EditCase {
    pub scene: SceneState,
    pub constraints: ConstraintSet,
    pub commands: [EditCommand; 3],
}

/// Ten small furnished rooms, each with three edits that leave conflicts for
/// the optimizer to resolve.
pub fn edit_suite() -> Vec<EditCase> {
    (0..10)
        .map(|k| {
            let f = k as f64;
            let (w, d) = (4.0 + 0.3 * f, 3.5 + 0.2 * f);
            let scene = SceneState::from_parts(
                RoomSpec::new(w, d, 2.6),
                vec![
                    ObjectState::new("sofa", [w / 2.0, 0.5], [1.8 + 0.05 * f, 0.8, 0.8]),
                    ObjectState::new("table", [w / 2.0, d / 2.0], [1.0, 0.6, 0.45]),
                    ObjectState::new("chair", [w - 0.6, d / 2.0], [0.5, 0.5, 0.9]).with_yaw(90.0),
                    ObjectState::new("lamp", [w / 2.0 + 0.2, d / 2.0], [0.25, 0.25, 0.5])
                        .with_parent(ParentRef::Object("table".into())),
                    ObjectState::new("painting", [w / 2.0, d - 0.05], [0.8, 0.05, 0.6])
                        .with_parent(ParentRef::Wall(Wall::Back))
                        .with_yaw(180.0)
                        .with_z(1.5),
                ],
            )
            .expect("valid fixture");
            let constraints: ConstraintSet = serde_json::from_str(
                r#"{"against_wall": [{"object": "sofa", "wall": "front"}, {"object": "painting", "wall": "back"}]}"#,
            )
            .expect("valid constraints");
            let add = EditCommand::Add {
                object: ObjectState::new("armchair", [w / 2.0 + 0.5 + 0.03 * f, d / 2.0 + 0.2], [0.7, 0.7, 0.8]),
                constraints: serde_json::from_str(
                    r#"{"adjacent": [{"a": "armchair", "b": "table", "distance": 0.3}]}"#,
                )
                .expect("valid constraints"),
            };
            let delete = EditCommand::Delete { ids: vec![if k % 2 == 0 { "table" } else { "chair" }.to_string()] };
            let mv = EditCommand::Move {
                id: "chair".into(),
                p_plane: Some(Vec2::new(w / 2.0 + 0.6 + 0.05 * f, 0.7)),
                parent: None,
                p_vert: None,
            };
            EditCase { scene, constraints, commands: [add, delete, mv] }
        })
        .collect()
}
