//! SVG 1.1 scenes in the Poincaré disk: boundary circle, geodesics as arcs
//! orthogonal to it, hyperbolic balls as Euclidean circles.

use std::fmt::Write as _;

use crate::hypgeo::{Geodesic, HPoint};
use crate::treecover::EmbeddedTree;

/// Stroke and fill of one drawn item.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Style {
    pub stroke: &'static str,
    pub fill: &'static str,
    pub width: f64,
    pub opacity: f64,
}

pub const LINE_STYLE: Style = Style {
    stroke: "#1f3a93",
    fill: "none",
    width: 1.0,
    opacity: 1.0,
};
pub const BALL_STYLE: Style = Style {
    stroke: "#7a1f1f",
    fill: "#c0392b",
    width: 0.5,
    opacity: 0.35,
};
pub const POINT_STYLE: Style = Style {
    stroke: "none",
    fill: "#000000",
    width: 0.0,
    opacity: 1.0,
};
pub const EDGE_STYLE: Style = Style {
    stroke: "#000000",
    fill: "none",
    width: 0.8,
    opacity: 1.0,
};
pub const GENERATOR_STYLE: Style = Style {
    stroke: "#2e8b57",
    fill: "none",
    width: 1.5,
    opacity: 1.0,
};

#[derive(Clone, Debug, PartialEq)]
enum Item {
    Geodesic(Geodesic),
    Segment(HPoint, HPoint),
    Ball(HPoint, f64),
    Point(HPoint, f64),
}

/// Items smaller than this many pixels are left out.
const MIN_FEATURE: f64 = 0.05;

#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    /// Side of the square canvas in pixels.
    pub size: f64,
    items: Vec<(Item, Style)>,
}

fn num(out: &mut String, x: f64) {
    // fixed precision; avoid "-0.000"
    let v = if x.abs() < 5e-4 { 0.0 } else { x };
    let _ = write!(out, "{v:.3}");
}

impl Scene {
    pub fn new(size: f64) -> Self {
        Scene {
            size,
            items: Vec::new(),
        }
    }

    pub fn add_geodesic(&mut self, g: Geodesic, style: Style) {
        self.items.push((Item::Geodesic(g), style));
    }

    pub fn add_segment(&mut self, p: HPoint, q: HPoint, style: Style) {
        self.items.push((Item::Segment(p, q), style));
    }

    pub fn add_ball(&mut self, center: HPoint, radius: f64, style: Style) {
        self.items.push((Item::Ball(center, radius), style));
    }

    /// A dot of `px` pixels radius.
    pub fn add_point(&mut self, p: HPoint, px: f64, style: Style) {
        self.items.push((Item::Point(p, px), style));
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    fn scale(&self) -> f64 {
        0.5 * self.size - 10.0
    }

    /// Disk coordinates to canvas pixels.
    fn px(&self, (u, v): (f64, f64)) -> (f64, f64) {
        let c = 0.5 * self.size;
        (c + self.scale() * u, c - self.scale() * v)
    }

    pub fn to_svg(&self) -> String {
        let mut out = String::new();
        let s = self.size;
        out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        out.push_str("<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" ");
        out.push_str("width=\"");
        num(&mut out, s);
        out.push_str("\" height=\"");
        num(&mut out, s);
        out.push_str("\" viewBox=\"0 0 ");
        num(&mut out, s);
        out.push(' ');
        num(&mut out, s);
        out.push_str("\">\n");
        out.push_str("<circle cx=\"");
        num(&mut out, 0.5 * s);
        out.push_str("\" cy=\"");
        num(&mut out, 0.5 * s);
        out.push_str("\" r=\"");
        num(&mut out, self.scale());
        out.push_str("\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1.5\"/>\n");
        for (item, style) in &self.items {
            self.write_item(&mut out, item, style);
        }
        out.push_str("</svg>\n");
        out
    }

    fn write_item(&self, out: &mut String, item: &Item, style: &Style) {
        match *item {
            Item::Geodesic(g) => {
                let (a, b) = g.disk_angles();
                let p = self.px((a.cos(), a.sin()));
                let q = self.px((b.cos(), b.sin()));
                let gap = (b - a).rem_euclid(2.0 * std::f64::consts::PI);
                let half = 0.5 * gap.min(2.0 * std::f64::consts::PI - gap);
                let radius = self.scale() * half.tan();
                self.write_arc(out, p, q, radius, style);
            }
            Item::Segment(a, b) => {
                let (pa, pb) = (a.to_disk(), b.to_disk());
                let radius = orthogonal_radius(pa, pb).map(|r| r * self.scale());
                let (p, q) = (self.px(pa), self.px(pb));
                match radius {
                    Some(r) => self.write_arc(out, p, q, r, style),
                    None => self.write_arc(out, p, q, f64::INFINITY, style),
                }
            }
            Item::Ball(c, rho) => {
                let (u, v) = c.to_disk();
                let r0 = (u * u + v * v).sqrt();
                let d0 = 2.0 * r0.atanh();
                // the diameter through the disk center has ends at signed
                // disk radii tanh((d0 ± ρ)/2)
                let far = (0.5 * (d0 + rho)).tanh();
                let near = (0.5 * (d0 - rho)).tanh();
                let (ec, er) = (0.5 * (far + near), 0.5 * (far - near));
                let (du, dv) = if r0 > 0.0 {
                    (u / r0, v / r0)
                } else {
                    (1.0, 0.0)
                };
                let center = self.px((ec * du, ec * dv));
                let r = er * self.scale();
                if r >= MIN_FEATURE {
                    self.write_circle(out, center, r, style);
                }
            }
            Item::Point(p, px) => {
                let c = self.px(p.to_disk());
                self.write_circle(out, c, px, style);
            }
        }
    }

    fn write_circle(&self, out: &mut String, c: (f64, f64), r: f64, style: &Style) {
        out.push_str("<circle cx=\"");
        num(out, c.0);
        out.push_str("\" cy=\"");
        num(out, c.1);
        out.push_str("\" r=\"");
        num(out, r);
        out.push('"');
        write_style(out, style);
        out.push_str("/>\n");
    }

    /// Minor arc of radius `radius` (straight if infinite or huge) from `p`
    /// to `q`, bulging away from the canvas center.
    fn write_arc(
        &self,
        out: &mut String,
        p: (f64, f64),
        q: (f64, f64),
        radius: f64,
        style: &Style,
    ) {
        let chord = ((q.0 - p.0).powi(2) + (q.1 - p.1).powi(2)).sqrt();
        if chord < MIN_FEATURE {
            return;
        }
        out.push_str("<path d=\"M ");
        num(out, p.0);
        out.push(' ');
        num(out, p.1);
        if !radius.is_finite() || radius > 1e6 * self.size {
            out.push_str(" L ");
        } else {
            // the orthogonal circle's center lies beyond the chord as seen
            // from the disk center, so the arc bends toward the canvas center
            let c = 0.5 * self.size;
            let m = (0.5 * (p.0 + q.0) - c, 0.5 * (p.1 + q.1) - c);
            let cross = (q.0 - p.0) * m.1 - (q.1 - p.1) * m.0;
            let sweep = if cross > 0.0 { 1 } else { 0 };
            out.push_str(" A ");
            num(out, radius);
            out.push(' ');
            num(out, radius);
            let _ = write!(out, " 0 0 {sweep} ");
        }
        num(out, q.0);
        out.push(' ');
        num(out, q.1);
        out.push('"');
        write_style(out, style);
        out.push_str("/>\n");
    }
}

fn write_style(out: &mut String, style: &Style) {
    let _ = write!(out, " fill=\"{}\" stroke=\"{}\"", style.fill, style.stroke);
    if style.stroke != "none" {
        out.push_str(" stroke-width=\"");
        num(out, style.width);
        out.push('"');
    }
    if style.opacity < 1.0 {
        out.push_str(" opacity=\"");
        num(out, style.opacity);
        out.push('"');
    }
}

/// Euclidean radius of the circle through `p` and `q` orthogonal to the unit
/// circle, or `None` when `p`, `q` and the disk center are collinear.
fn orthogonal_radius(p: (f64, f64), q: (f64, f64)) -> Option<f64> {
    // center c solves 2 c·p = |p|² + 1 and 2 c·q = |q|² + 1
    let det = p.0 * q.1 - p.1 * q.0;
    let scale = (p.0.hypot(p.1) * q.0.hypot(q.1)).max(1e-300);
    if det.abs() < 1e-12 * scale {
        return None;
    }
    let (bp, bq) = (
        0.5 * (p.0 * p.0 + p.1 * p.1 + 1.0),
        0.5 * (q.0 * q.0 + q.1 * q.1 + 1.0),
    );
    let cx = (bp * q.1 - bq * p.1) / det;
    let cy = (p.0 * bq - q.0 * bp) / det;
    Some(((cx - p.0).powi(2) + (cy - p.1).powi(2)).sqrt())
}

/// The tree: generator lines, edges drawn as geodesic segments, vertices.
pub fn tree_scene(tree: &EmbeddedTree, size: f64) -> Scene {
    let mut scene = Scene::new(size);
    for g in tree.generator_lines {
        scene.add_geodesic(g, GENERATOR_STYLE);
    }
    let vs = tree.vertices();
    for (a, b) in tree.edges() {
        scene.add_segment(vs[a], vs[b], EDGE_STYLE);
    }
    for (i, &v) in vs.iter().enumerate() {
        let depth = tree.words()[i].len() as f64;
        scene.add_point(v, (3.0 * 0.7f64.powf(depth)).max(0.4), POINT_STYLE);
    }
    scene
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypgeo::GeodesicFrame;
    use approx::assert_abs_diff_eq;

    #[test]
    fn empty_scene_is_just_the_boundary() {
        let svg = Scene::new(400.0).to_svg();
        assert_eq!(svg.matches("<circle").count(), 1);
        assert!(!svg.contains("<path"));
        assert!(svg.contains("version=\"1.1\""));
    }

    #[test]
    fn diametral_geodesic_is_a_chord() {
        let mut s = Scene::new(400.0);
        s.add_geodesic(
            Geodesic::from_disk_angles(0.3, 0.3 + std::f64::consts::PI).unwrap(),
            LINE_STYLE,
        );
        let svg = s.to_svg();
        assert!(svg.contains(" L "), "{svg}");
    }

    #[test]
    fn off_center_geodesic_is_an_arc() {
        let mut s = Scene::new(400.0);
        s.add_geodesic(Geodesic::from_disk_angles(-0.5, 0.5).unwrap(), LINE_STYLE);
        let svg = s.to_svg();
        assert!(svg.contains(" A "));
    }

    #[test]
    fn orthogonal_circle() {
        let p = HPoint::from_polar(1.0, 0.2).to_disk();
        let q = HPoint::from_polar(2.0, 1.3).to_disk();
        let r = orthogonal_radius(p, q).unwrap();
        // orthogonality: |c|² = 1 + r²; recover c and check
        let det = p.0 * q.1 - p.1 * q.0;
        let (bp, bq) = (
            0.5 * (p.0 * p.0 + p.1 * p.1 + 1.0),
            0.5 * (q.0 * q.0 + q.1 * q.1 + 1.0),
        );
        let c = ((bp * q.1 - bq * p.1) / det, (p.0 * bq - q.0 * bp) / det);
        assert_abs_diff_eq!(c.0 * c.0 + c.1 * c.1, 1.0 + r * r, epsilon = 1e-10);
        let f = GeodesicFrame::from_center(0.7);
        assert!(orthogonal_radius(f.point(0.5).to_disk(), f.point(2.0).to_disk()).is_none());
    }

    #[test]
    fn ball_at_center_is_concentric() {
        let mut s = Scene::new(400.0);
        s.add_ball(HPoint::ORIGIN, 1.0, BALL_STYLE);
        let svg = s.to_svg();
        let r = 190.0 * 0.5f64.tanh();
        assert!(
            svg.contains(&format!("cx=\"200.000\" cy=\"200.000\" r=\"{r:.3}\"")),
            "{svg}"
        );
    }
}
