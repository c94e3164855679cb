//! Seeded synthetic scenes with deliberately conflicting initial placements.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::Vec2;

use crate::scene::{
    Adjacent, AgainstWall, AlignTarget, AlignWith, ConstraintSet, ObjectState, ParentRef, PointToward, RoomSpec,
    SceneState, Wall,
};

/// Share of the floor that floor furniture may cover.
pub const MAX_FLOOR_DENSITY: f64 = 0.35;

const FLOOR_NAMES: [&str; 8] = ["sofa", "table", "desk", "cabinet", "bed", "chair", "dresser", "bookcase"];
const SMALL_NAMES: [&str; 5] = ["lamp", "book", "vase", "plant", "monitor"];
const WALL_NAMES: [&str; 4] = ["shelf", "painting", "tv", "mirror"];

fn wall_yaw(w: Wall) -> f64 {
    match w {
        Wall::Left => 270.0,
        Wall::Right => 90.0,
        Wall::Front => 0.0,
        Wall::Back => 180.0,
    }
}

fn nearest_wall(room: &RoomSpec, p: Vec2) -> Wall {
    let gaps = [(p.x, Wall::Left), (room.width - p.x, Wall::Right), (p.y, Wall::Front), (room.depth - p.y, Wall::Back)];
    gaps.into_iter().min_by(|a, b| a.0.total_cmp(&b.0)).map(|g| g.1).expect("four walls")
}

fn pick_yaw(rng: &mut ChaCha8Rng) -> f64 {
    if rng.gen_bool(0.8) {
        [0.0, 90.0, 180.0, 270.0][rng.gen_range(0..4)]
    } else {
        rng.gen_range(0.0..360.0)
    }
}

/// Generates one scene from `rng`.
pub fn gen_scene(rng: &mut ChaCha8Rng) -> (SceneState, ConstraintSet) {
    let room = RoomSpec::new(rng.gen_range(3.0..8.0), rng.gen_range(3.0..8.0), rng.gen_range(2.4..3.2));
    let n = rng.gen_range(5..=20);
    let budget = MAX_FLOOR_DENSITY * room.width * room.depth;
    let mut floor_area = 0.0;
    let mut objects: Vec<ObjectState> = Vec::with_capacity(n);
    let mut floor: Vec<usize> = Vec::new();
    let mut cons = ConstraintSet::default();

    for k in 0..n {
        let roll: f64 = rng.gen();
        let id_of = |name: &str| format!("{name}_{k}");
        let left = budget - floor_area;
        let wants_floor = roll < 0.6 || (roll < 0.8 && floor.is_empty());
        if wants_floor && (left >= 0.16 || floor.is_empty()) {
            let (mut w, mut d) = (rng.gen_range(0.4..2.0), rng.gen_range(0.4..1.2));
            if w * d > left {
                let s = (left / (w * d)).sqrt();
                w *= s;
                d *= s;
            }
            floor_area += w * d;
            let h = rng.gen_range(0.4..1.2);
            let name = FLOOR_NAMES[rng.gen_range(0..FLOOR_NAMES.len())];
            let o = ObjectState::new(
                id_of(name),
                [rng.gen_range(0.0..room.width), rng.gen_range(0.0..room.depth)],
                [w, d, h],
            )
            .with_yaw(pick_yaw(rng));
            floor.push(objects.len());
            objects.push(o);
        } else if roll < 0.8 || wants_floor {
            let p = &objects[*floor.choose(rng).expect("non-empty")];
            let [pw, pd, _] = p.effective_dims();
            let (w, d) = (rng.gen_range(0.1..0.4f64).min(pw), rng.gen_range(0.1..0.4f64).min(pd));
            let h = rng.gen_range(0.05..0.4);
            let offset = [rng.gen_range(-0.5..0.5) * pw, rng.gen_range(-0.5..0.5) * pd];
            let name = SMALL_NAMES[rng.gen_range(0..SMALL_NAMES.len())];
            let o = ObjectState::new(id_of(name), [p.p_plane.x + offset[0], p.p_plane.y + offset[1]], [w, d, h])
                .with_parent(ParentRef::Object(p.id.clone()))
                .with_yaw(pick_yaw(rng));
            objects.push(o);
        } else if roll < 0.95 {
            let wall = Wall::ALL[rng.gen_range(0..4)];
            let (w, d, h) = (rng.gen_range(0.4..1.5), rng.gen_range(0.05..0.4), rng.gen_range(0.2..0.6));
            let inset = rng.gen_range(0.0..0.8);
            let along_x = rng.gen_range(0.0..room.width);
            let along_y = rng.gen_range(0.0..room.depth);
            let pos = match wall {
                Wall::Left => [d / 2.0 + inset, along_y],
                Wall::Right => [room.width - d / 2.0 - inset, along_y],
                Wall::Front => [along_x, d / 2.0 + inset],
                Wall::Back => [along_x, room.depth - d / 2.0 - inset],
            };
            let z = rng.gen_range(1.4..(room.height - h).max(1.41));
            let name = WALL_NAMES[rng.gen_range(0..WALL_NAMES.len())];
            let id = id_of(name);
            cons.against_wall.push(AgainstWall { object: id.clone(), wall });
            objects.push(
                ObjectState::new(id, pos, [w, d, h])
                    .with_parent(ParentRef::Wall(wall))
                    .with_yaw(wall_yaw(wall))
                    .with_z(z),
            );
        } else {
            let s = rng.gen_range(0.3..0.6);
            let h = rng.gen_range(0.2..0.5);
            objects.push(
                ObjectState::new(id_of("pendant"), [rng.gen_range(0.0..room.width), rng.gen_range(0.0..room.depth)], [s, s, h])
                    .with_parent(ParentRef::Ceiling)
                    .with_z(room.height - h),
            );
        }
    }

    for (pos, &i) in floor.iter().enumerate() {
        let id = objects[i].id.clone();
        let others: Vec<usize> = floor.iter().copied().filter(|&j| j != i).collect();
        if rng.gen_bool(0.2) {
            cons.against_wall.push(AgainstWall { object: id.clone(), wall: nearest_wall(&room, objects[i].p_plane) });
        }
        if let Some(&j) = others.choose(rng) {
            if rng.gen_bool(0.3) && floor[..pos].contains(&j) {
                cons.adjacent.push(Adjacent { a: id.clone(), b: objects[j].id.clone(), distance: rng.gen_range(0.0..0.5) });
            }
            if rng.gen_bool(0.15) {
                cons.point_toward.push(PointToward { object: id.clone(), target: objects[j].id.clone() });
            } else if rng.gen_bool(0.15) {
                let target = if rng.gen_bool(0.5) {
                    AlignTarget::Object(objects[j].id.clone())
                } else {
                    AlignTarget::Angle([0.0, 90.0, 180.0, 270.0][rng.gen_range(0..4)])
                };
                cons.align_with.push(AlignWith { object: id, target });
            }
        }
    }

    let scene = SceneState::from_parts(room, objects).expect("generated scene is valid");
    debug_assert!(cons.validate(&scene).is_ok());
    (scene, cons)
}

/// `n` scenes from one seeded stream.
pub fn gen_corpus(n: usize, seed: u64) -> Vec<(SceneState, ConstraintSet)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| gen_scene(&mut rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_and_deterministic() {
        assert!(gen_corpus(0, 1).is_empty());
        let a = gen_corpus(5, 42);
        let b = gen_corpus(5, 42);
        assert_eq!(a, b);
        assert_ne!(a, gen_corpus(5, 43));
    }

    #[test]
    fn scenes_are_valid_and_sized() {
        for (s, c) in gen_corpus(30, 7) {
            assert!(c.validate(&s).is_ok());
            assert!((5..=20).contains(&s.len()));
            assert!((3.0..8.0).contains(&s.room.width) && (3.0..8.0).contains(&s.room.depth));
            let floor: f64 = s
                .objects
                .iter()
                .filter(|o| o.parent == ParentRef::Floor)
                .map(|o| o.effective_dims()[0] * o.effective_dims()[1])
                .sum();
            assert!(floor <= MAX_FLOOR_DENSITY * s.room.width * s.room.depth + 1e-9);
        }
    }

    #[test]
    fn most_scenes_start_in_collision() {
        for seed in [0, 1, 2] {
            let corpus = gen_corpus(50, seed);
            let colliding = corpus.iter().filter(|(s, _)| crate::metrics::evaluate(s).col_sc).count();
            assert!(colliding * 5 >= corpus.len() * 4, "seed {seed}: {colliding}/50");
        }
    }
}
