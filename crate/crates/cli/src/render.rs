//! Top-down SVG views of a scene.

use std::fmt::Write;

use forcelayout::geometry::footprint;
use forcelayout::{ConstraintSet, ParentRef, SceneState, Vec2};

/// Drawing options for [`render_svg`].
#[derive(Clone, Debug, PartialEq)]
pub struct RenderSpec {
    /// Pixels per meter.
    pub scale: f64,
    /// Metric grid spacing in meters, if drawn.
    pub grid: Option<f64>,
    pub show_ids: bool,
    pub show_constraints: bool,
    pub color_by_level: bool,
}

impl Default for RenderSpec {
    fn default() -> Self {
        Self {
            scale: 100.0,
            grid: None,
            show_ids: true,
            show_constraints: false,
            color_by_level: true,
        }
    }
}

impl RenderSpec {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(format!("render scale must be positive, got {}", self.scale));
        }
        if let Some(g) = self.grid {
            if !(g.is_finite() && g > 0.0) {
                return Err(format!("grid spacing must be positive, got {g}"));
            }
        }
        Ok(())
    }
}

const TICK: f64 = 0.15;

/// Shortest decimal with at most three fractional digits.
fn num(x: f64) -> String {
    let s = format!("{x:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn level_rank(p: &ParentRef) -> u8 {
    match p {
        ParentRef::Floor => 0,
        ParentRef::Object(_) => 1,
        ParentRef::Wall(_) => 2,
        ParentRef::Ceiling => 3,
    }
}

fn fill(p: &ParentRef, by_level: bool) -> &'static str {
    if !by_level {
        return "#c8c8c8";
    }
    ["#9dbbe0", "#f0c674", "#a5d6a7", "#d7a6cf"][level_rank(p) as usize]
}

/// Renders `scene` looking down, +x to the right and +y up the page.
///
/// Each object is a rotated rectangle with a tick on its front face
/// (+y at yaw 0). Output depends only on the inputs.
pub fn render_svg(scene: &SceneState, constraints: &ConstraintSet, spec: &RenderSpec) -> String {
    let k = spec.scale;
    let (w, h) = (scene.room.width * k, scene.room.depth * k);
    let to_px = |p: Vec2| (p.x * k, (scene.room.depth - p.y) * k);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {} {}" width="{}" height="{}">"#,
        num(w),
        num(h),
        num(w),
        num(h)
    );
    let _ = writeln!(
        out,
        r#"<rect class="room" x="0" y="0" width="{}" height="{}" fill="white" stroke="black" stroke-width="2"/>"#,
        num(w),
        num(h)
    );

    if let Some(g) = spec.grid {
        let _ = writeln!(
            out,
            r##"<g class="grid" stroke="#dddddd" stroke-width="1" font-size="10" fill="#888888">"##
        );
        let mut i = 0usize;
        while i as f64 * g <= scene.room.width + 1e-9 {
            let x = i as f64 * g;
            let _ = writeln!(
                out,
                r#"<line x1="{0}" y1="0" x2="{0}" y2="{1}"/>"#,
                num(x * k),
                num(h)
            );
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}" stroke="none">{}</text>"#,
                num(x * k + 2.0),
                num(h - 2.0),
                num(x)
            );
            i += 1;
        }
        let mut j = 0usize;
        while j as f64 * g <= scene.room.depth + 1e-9 {
            let y = j as f64 * g;
            let py = (scene.room.depth - y) * k;
            let _ = writeln!(
                out,
                r#"<line x1="0" y1="{0}" x2="{1}" y2="{0}"/>"#,
                num(py),
                num(w)
            );
            if j > 0 {
                let _ = writeln!(
                    out,
                    r#"<text x="2" y="{}" stroke="none">{}</text>"#,
                    num(py + 10.0),
                    num(y)
                );
            }
            j += 1;
        }
        out.push_str("</g>\n");
    }

    let mut order: Vec<usize> = (0..scene.len()).collect();
    order.sort_by_key(|&i| level_rank(&scene.objects[i].parent));
    for i in order {
        let o = &scene.objects[i];
        let [ow, od, _] = o.effective_dims();
        let (cx, cy) = to_px(o.p_plane);
        let fp = footprint(o);
        let (tx0, ty0) = to_px(o.p_plane + fp.v * fp.half_d);
        let (tx1, ty1) = to_px(o.p_plane + fp.v * (fp.half_d + TICK));
        let _ = writeln!(out, r#"<g class="object" id="{}">"#, escape(&o.id));
        let _ = writeln!(
            out,
            r#"<rect x="{}" y="{}" width="{}" height="{}" transform="rotate({} {} {})" fill="{}" fill-opacity="0.8" stroke="black"/>"#,
            num(cx - ow * k / 2.0),
            num(cy - od * k / 2.0),
            num(ow * k),
            num(od * k),
            num(-o.yaw),
            num(cx),
            num(cy),
            fill(&o.parent, spec.color_by_level)
        );
        let _ = writeln!(
            out,
            r#"<line class="front" x1="{}" y1="{}" x2="{}" y2="{}" stroke="red" stroke-width="2"/>"#,
            num(tx0),
            num(ty0),
            num(tx1),
            num(ty1)
        );
        if spec.show_ids {
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}" font-size="11" text-anchor="middle">{}</text>"#,
                num(cx),
                num(cy + 4.0),
                escape(&o.id)
            );
        }
        out.push_str("</g>\n");
    }

    if spec.show_constraints {
        out.push_str("<g class=\"constraints\" stroke-width=\"1.5\">\n");
        let center = |id: &str| scene.get(id).map(|o| to_px(o.p_plane));
        for a in &constraints.adjacent {
            if let (Some(p), Some(q)) = (center(&a.a), center(&a.b)) {
                let _ = writeln!(
                    out,
                    r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#3366cc" stroke-dasharray="6 4"/>"##,
                    num(p.0),
                    num(p.1),
                    num(q.0),
                    num(q.1)
                );
            }
        }
        for c in &constraints.point_toward {
            if let (Some(p), Some(q)) = (center(&c.object), center(&c.target)) {
                let _ = writeln!(
                    out,
                    r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#cc6633" stroke-dasharray="2 3"/>"##,
                    num(p.0),
                    num(p.1),
                    num(q.0),
                    num(q.1)
                );
            }
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}
