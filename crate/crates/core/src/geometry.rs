//! Planar and interval geometry used by every force term.
//!
//! Objects are oriented boxes. Their projection on the XY plane is a
//! [`Footprint`]: a yaw-rotated rectangle stored as an oriented bounding box
//! plus its four corners in counter-clockwise order. Corner 0 is the
//! (+w/2, -d/2) corner, so edge 0 has outward normal `u` (the local +x axis)
//! and edge 1 has outward normal `v` (the local +y axis, the object front).

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::scene::{ObjectState, RoomSpec, Wall};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };
    pub const X: Vec2 = Vec2 { x: 1.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    /// Unit vector, or `None` for the zero vector.
    pub fn normalized(self) -> Option<Vec2> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self * (1.0 / n))
    }

    /// Counter-clockwise perpendicular `(-y, x)`.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn is_zero(self) -> bool {
        self.x == 0.0 && self.y == 0.0
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl SubAssign for Vec2 {
    fn sub_assign(&mut self, o: Vec2) {
        self.x -= o.x;
        self.y -= o.y;
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Vec2::new(x, y)
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

/// `(sin, cos)` of an angle in degrees, exact at multiples of 90°.
pub fn sin_cos_deg(deg: f64) -> (f64, f64) {
    let r = deg.rem_euclid(360.0);
    if r == 0.0 {
        (0.0, 1.0)
    } else if r == 90.0 {
        (1.0, 0.0)
    } else if r == 180.0 {
        (0.0, -1.0)
    } else if r == 270.0 {
        (-1.0, 0.0)
    } else {
        r.to_radians().sin_cos()
    }
}

/// Normalizes an angle in degrees to `[0, 360)`.
pub fn normalize_deg(deg: f64) -> f64 {
    let r = deg.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

/// Shortest signed difference `to - from` in degrees, in `(-180, 180]`.
pub fn angle_diff_deg(from: f64, to: f64) -> f64 {
    let d = (to - from).rem_euclid(360.0);
    if d > 180.0 {
        d - 360.0
    } else {
        d
    }
}

/// Oriented rectangle on the XY plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Footprint {
    pub center: Vec2,
    /// Local +x axis (edge-0 outward normal).
    pub u: Vec2,
    /// Local +y axis (edge-1 outward normal, object front).
    pub v: Vec2,
    pub half_w: f64,
    pub half_d: f64,
    pub corners: [Vec2; 4],
    pub axis_aligned: bool,
}

impl Footprint {
    pub fn new(center: Vec2, width: f64, depth: f64, yaw_deg: f64) -> Self {
        let (s, c) = sin_cos_deg(yaw_deg);
        let u = Vec2::new(c, s);
        let v = Vec2::new(-s, c);
        let (hw, hd) = (width / 2.0, depth / 2.0);
        let corners = [
            center + u * hw - v * hd,
            center + u * hw + v * hd,
            center - u * hw + v * hd,
            center - u * hw - v * hd,
        ];
        Self {
            center,
            u,
            v,
            half_w: hw,
            half_d: hd,
            corners,
            axis_aligned: s == 0.0 || c == 0.0,
        }
    }

    /// Outward normal of edge 0 or 1; edges 2 and 3 are their negations.
    pub fn edge_normal(&self, i: usize) -> Vec2 {
        match i % 4 {
            0 => self.u,
            1 => self.v,
            2 => -self.u,
            _ => -self.v,
        }
    }

    pub fn area(&self) -> f64 {
        4.0 * self.half_w * self.half_d
    }

    /// Projection interval onto a unit axis.
    pub fn project(&self, axis: Vec2) -> (f64, f64) {
        let c = self.center.dot(axis);
        let r = self.half_w * self.u.dot(axis).abs() + self.half_d * self.v.dot(axis).abs();
        (c - r, c + r)
    }

    /// Axis-aligned bounds `(min, max)`.
    pub fn bounds(&self) -> (Vec2, Vec2) {
        let ex = self.half_w * self.u.x.abs() + self.half_d * self.v.x.abs();
        let ey = self.half_w * self.u.y.abs() + self.half_d * self.v.y.abs();
        (
            Vec2::new(self.center.x - ex, self.center.y - ey),
            Vec2::new(self.center.x + ex, self.center.y + ey),
        )
    }

    /// Whether `p` lies inside or on the boundary.
    pub fn contains(&self, p: Vec2) -> bool {
        let d = p - self.center;
        d.dot(self.u).abs() <= self.half_w && d.dot(self.v).abs() <= self.half_d
    }

    pub fn polygon(&self) -> Vec<Vec2> {
        self.corners.to_vec()
    }
}

/// Footprint of an object from its effective width/depth and yaw.
pub fn footprint(obj: &ObjectState) -> Footprint {
    let [w, d, _] = obj.effective_dims();
    Footprint::new(obj.p_plane, w, d, obj.yaw)
}

/// Minimum translation vector. `axis` points from b's center toward a's.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mtv {
    pub axis: Vec2,
    pub depth: f64,
}

/// Separating-axis test over the edge normals of both rectangles.
///
/// Returns `None` when a strictly separating axis exists. Touching
/// rectangles yield `Some` with depth 0. Ties on depth keep the earliest axis
/// in the order `a.u, a.v, b.u, b.v`.
pub fn sat_mtv(a: &Footprint, b: &Footprint) -> Option<Mtv> {
    let axes = [a.u, a.v, b.u, b.v];
    let mut best: Option<Mtv> = None;
    for axis in axes {
        let (amin, amax) = a.project(axis);
        let (bmin, bmax) = b.project(axis);
        if amax < bmin || bmax < amin {
            return None;
        }
        let depth = (amax - bmin).min(bmax - amin).max(0.0);
        if best.is_none_or(|m| depth < m.depth) {
            best = Some(Mtv { axis, depth });
        }
    }
    best.map(|mut m| {
        if m.axis.dot(a.center - b.center) < 0.0 {
            m.axis = -m.axis;
        }
        m
    })
}

/// Signed shoelace area (positive for counter-clockwise).
pub fn signed_area(poly: &[Vec2]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..poly.len() {
        s += poly[i].cross(poly[(i + 1) % poly.len()]);
    }
    0.5 * s
}

pub fn polygon_area(poly: &[Vec2]) -> f64 {
    signed_area(poly).abs()
}

pub fn polygon_centroid(poly: &[Vec2]) -> Option<Vec2> {
    let a = signed_area(poly);
    if a.abs() < 1e-15 {
        return None;
    }
    let mut c = Vec2::ZERO;
    for i in 0..poly.len() {
        let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
        c += (p + q) * p.cross(q);
    }
    Some(c * (1.0 / (6.0 * a)))
}

/// Keeps the part of `poly` with `normal · p <= offset`.
pub fn clip_halfplane(poly: &[Vec2], normal: Vec2, offset: f64) -> Vec<Vec2> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    if poly.is_empty() {
        return out;
    }
    for i in 0..poly.len() {
        let cur = poly[i];
        let next = poly[(i + 1) % poly.len()];
        let dc = normal.dot(cur) - offset;
        let dn = normal.dot(next) - offset;
        if dc <= 0.0 {
            out.push(cur);
        }
        if (dc < 0.0 && dn > 0.0) || (dc > 0.0 && dn < 0.0) {
            let t = dc / (dc - dn);
            out.push(cur + (next - cur) * t);
        }
    }
    out
}

/// Intersection polygon of two footprints (Sutherland–Hodgman).
pub fn clip_intersection(a: &Footprint, b: &Footprint) -> Vec<Vec2> {
    let mut poly = a.polygon();
    for i in 0..4 {
        let n = b.edge_normal(i);
        let offset = n.dot(b.corners[i]);
        poly = clip_halfplane(&poly, n, offset);
        if poly.is_empty() {
            break;
        }
    }
    poly
}

/// Area of the intersection of two footprints.
pub fn overlap_area(a: &Footprint, b: &Footprint) -> f64 {
    if a.axis_aligned && b.axis_aligned {
        let (amin, amax) = a.bounds();
        let (bmin, bmax) = b.bounds();
        let w = (amax.x.min(bmax.x) - amin.x.max(bmin.x)).max(0.0);
        let h = (amax.y.min(bmax.y) - amin.y.max(bmin.y)).max(0.0);
        return w * h;
    }
    if sat_mtv(a, b).is_none() {
        return 0.0;
    }
    polygon_area(&clip_intersection(a, b))
}

/// Length of the overlap of the two objects' vertical extents.
pub fn z_interval_overlap(a: &ObjectState, b: &ObjectState) -> f64 {
    let (a0, a1) = a.z_interval();
    let (b0, b1) = b.z_interval();
    (a1.min(b1) - a0.max(b0)).max(0.0)
}

fn closest_on_segment(p: Vec2, s0: Vec2, s1: Vec2) -> Vec2 {
    let e = s1 - s0;
    let len2 = e.norm_sq();
    if len2 == 0.0 {
        return s0;
    }
    let t = ((p - s0).dot(e) / len2).clamp(0.0, 1.0);
    s0 + e * t
}

/// Closest point pair `(on a, on b)`. For intersecting footprints both
/// points coincide inside the intersection.
pub fn nearest_points(a: &Footprint, b: &Footprint) -> (Vec2, Vec2) {
    if sat_mtv(a, b).is_some() {
        let inter = clip_intersection(a, b);
        let p = polygon_centroid(&inter)
            .or_else(|| inter.first().copied())
            .unwrap_or(a.center);
        return (p, p);
    }
    let mut best = (f64::INFINITY, a.center, b.center);
    for (src, dst, flip) in [(a, b, false), (b, a, true)] {
        for &p in &src.corners {
            for i in 0..4 {
                let q = closest_on_segment(p, dst.corners[i], dst.corners[(i + 1) % 4]);
                let d = (q - p).norm_sq();
                if d < best.0 {
                    best = if flip { (d, q, p) } else { (d, p, q) };
                }
            }
        }
    }
    (best.1, best.2)
}

/// Distance between the closest points; 0 when touching or overlapping.
pub fn nearest_distance(a: &Footprint, b: &Footprint) -> f64 {
    if sat_mtv(a, b).is_some() {
        return 0.0;
    }
    let (p, q) = nearest_points(a, b);
    (q - p).norm()
}

/// Signed gap between the footprint and a wall; negative when protruding.
pub fn wall_clearance(f: &Footprint, wall: Wall, room: &RoomSpec) -> f64 {
    let (min, max) = f.bounds();
    match wall {
        Wall::Left => min.x,
        Wall::Right => room.width - max.x,
        Wall::Front => min.y,
        Wall::Back => room.depth - max.y,
    }
}

/// Inward unit normal of a wall.
pub fn wall_inward(wall: Wall) -> Vec2 {
    match wall {
        Wall::Left => Vec2::new(1.0, 0.0),
        Wall::Right => Vec2::new(-1.0, 0.0),
        Wall::Front => Vec2::new(0.0, 1.0),
        Wall::Back => Vec2::new(0.0, -1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-12;

    fn close(a: Vec2, b: Vec2) -> bool {
        (a - b).norm() < 1e-12
    }

    fn unit(x: f64, y: f64) -> Footprint {
        Footprint::new(Vec2::new(x, y), 1.0, 1.0, 0.0)
    }

    fn has_corner(f: &Footprint, p: Vec2) -> bool {
        f.corners.iter().any(|&c| close(c, p))
    }

    #[test]
    fn footprint_corners_by_yaw() {
        let f = Footprint::new(Vec2::ZERO, 2.0, 1.0, 0.0);
        for p in [[1.0, 0.5], [1.0, -0.5], [-1.0, 0.5], [-1.0, -0.5]] {
            assert!(has_corner(&f, p.into()));
        }
        let f = Footprint::new(Vec2::ZERO, 2.0, 1.0, 90.0);
        for p in [[0.5, 1.0], [0.5, -1.0], [-0.5, 1.0], [-0.5, -1.0]] {
            assert!(has_corner(&f, p.into()));
        }
        assert!(f.axis_aligned);
        let f = Footprint::new(Vec2::ZERO, 1.0, 1.0, 45.0);
        let r = 2f64.sqrt() / 2.0;
        for p in [[r, 0.0], [0.0, r], [-r, 0.0], [0.0, -r]] {
            assert!(has_corner(&f, p.into()), "{p:?} {:?}", f.corners);
        }
        assert!(signed_area(&f.corners) > 0.0, "counter-clockwise");
        assert!((polygon_area(&f.corners) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sat_offset_squares() {
        let m = sat_mtv(&unit(0.0, 0.0), &unit(0.5, 0.0)).unwrap();
        assert!((m.depth - 0.5).abs() < EPS);
        assert!(close(m.axis, Vec2::new(-1.0, 0.0)));
    }

    #[test]
    fn sat_disjoint_and_coincident() {
        assert!(sat_mtv(&unit(0.0, 0.0), &unit(3.0, 0.0)).is_none());
        let m = sat_mtv(&unit(0.0, 0.0), &unit(0.0, 0.0)).unwrap();
        assert_eq!(m.depth, 1.0);
        // all four axes tie; a's first normal wins
        assert_eq!(m.axis, Vec2::X);
    }

    #[test]
    fn sat_touching_has_zero_depth() {
        let m = sat_mtv(&unit(0.0, 0.0), &unit(1.0, 0.0)).unwrap();
        assert_eq!(m.depth, 0.0);
        assert_eq!(overlap_area(&unit(0.0, 0.0), &unit(1.0, 0.0)), 0.0);
    }

    #[test]
    fn overlap_area_cases() {
        assert!((overlap_area(&unit(0.0, 0.0), &unit(0.5, 0.0)) - 0.5).abs() < EPS);
        assert_eq!(overlap_area(&unit(0.0, 0.0), &unit(3.0, 0.0)), 0.0);
        assert!((overlap_area(&unit(0.0, 0.0), &unit(0.0, 0.0)) - 1.0).abs() < EPS);
    }

    #[test]
    fn clip_cases() {
        let a = unit(0.0, 0.0);
        assert!((polygon_area(&clip_intersection(&a, &a)) - 1.0).abs() < 1e-9);

        let half = clip_intersection(&a, &unit(0.5, 0.0));
        assert!((polygon_area(&half) - 0.5).abs() < 1e-9);
        let xs: Vec<f64> = half.iter().map(|p| p.x).collect();
        let (lo, hi) = xs.iter().fold((f64::MAX, f64::MIN), |(l, h), &x| (l.min(x), h.max(x)));
        assert!((lo - 0.0).abs() < 1e-12 && (hi - 0.5).abs() < 1e-12);

        // a small 45° square fully inside a larger one
        let big = Footprint::new(Vec2::ZERO, 2.0, 2.0, 0.0);
        let small = Footprint::new(Vec2::ZERO, 1.0, 1.0, 45.0);
        let poly = clip_intersection(&small, &big);
        assert!((polygon_area(&poly) - 1.0).abs() < 1e-9);
        assert!((overlap_area(&small, &big) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn z_overlap_cases() {
        use crate::scene::{ObjectState, ParentRef};
        let mk = |z: f64, h: f64| ObjectState {
            p_vert: z,
            base_dims: [1.0, 1.0, h],
            parent: ParentRef::Ceiling,
            ..ObjectState::new("o", [0.0, 0.0], [1.0, 1.0, h])
        };
        assert!((z_interval_overlap(&mk(0.0, 1.0), &mk(0.8, 1.0)) - 0.2).abs() < EPS);
        assert_eq!(z_interval_overlap(&mk(0.0, 1.0), &mk(2.0, 1.0)), 0.0);
        assert!((z_interval_overlap(&mk(0.0, 2.0), &mk(0.5, 1.0)) - 1.0).abs() < EPS);
    }

    #[test]
    fn nearest_distance_cases() {
        assert!((nearest_distance(&unit(0.0, 0.0), &unit(3.0, 0.0)) - 2.0).abs() < EPS);
        assert_eq!(nearest_distance(&unit(0.0, 0.0), &unit(0.5, 0.2)), 0.0);
        let d = nearest_distance(&unit(0.0, 0.0), &unit(2.0, 2.0));
        assert!((d - 2f64.sqrt()).abs() < EPS);
        let (p, q) = nearest_points(&unit(0.0, 0.0), &unit(2.0, 2.0));
        assert!(close(p, Vec2::new(0.5, 0.5)) && close(q, Vec2::new(1.5, 1.5)));
    }

    #[test]
    fn wall_clearance_cases() {
        let room = RoomSpec::new(5.0, 4.0, 2.5);
        let f = Footprint::new(Vec2::new(2.5, 2.0), 0.4, 0.4, 0.0);
        assert!((wall_clearance(&f, Wall::Left, &room) - (2.5 - 0.2)).abs() < EPS);
        let flush = Footprint::new(Vec2::new(0.2, 2.0), 0.4, 0.4, 0.0);
        assert_eq!(wall_clearance(&flush, Wall::Left, &room), 0.0);
        let out = Footprint::new(Vec2::new(4.9, 2.0), 0.4, 0.4, 0.0);
        assert!((wall_clearance(&out, Wall::Right, &room) + 0.1).abs() < 1e-12);
    }

    #[test]
    fn angle_helpers() {
        assert_eq!(angle_diff_deg(0.0, 90.0), 90.0);
        assert_eq!(angle_diff_deg(350.0, 10.0), 20.0);
        assert_eq!(angle_diff_deg(10.0, 350.0), -20.0);
        assert_eq!(angle_diff_deg(0.0, 180.0), 180.0);
        assert_eq!(angle_diff_deg(180.0, 0.0), 180.0);
        assert_eq!(normalize_deg(-90.0), 270.0);
        assert_eq!(normalize_deg(720.0), 0.0);
        assert!(normalize_deg(-1e-20) < 360.0);
    }
}
