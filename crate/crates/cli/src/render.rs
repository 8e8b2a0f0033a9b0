//! Deterministic SVG output for matchings, arctic curves and dual embeddings.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use tower_dimers::interlacing::Matching;
use tower_dimers::isoradial::{circumcenter, faces_around, DualEmbedding};
use tower_dimers::kernels::C64;
use tower_dimers::lattice::{has_color, Color, LatticeCoord, TowerGraph};
use tower_dimers::limitshape::ArcticCurve;

const SCALE: f64 = 40.0;
const MARGIN: f64 = 20.0;

/// Planar drawing position of a lattice vertex: columns `3k, 3k+1, 3k+2`
/// occupy a slanted band of width 4.
pub fn vertex_position(color: Color, c: LatticeCoord) -> (f64, f64) {
    let k = c.x.div_euclid(3) as f64;
    let r = c.x.rem_euclid(3);
    let xo = match (r, color) {
        (0, _) => 0.0,
        (2, _) => 3.0,
        (_, Color::Black) => 1.0,
        (_, Color::White) => 2.0,
    };
    (4.0 * k + xo, c.u as f64 + 1.5 * k + 0.5 * r as f64)
}

struct Canvas {
    min: (f64, f64),
    max: (f64, f64),
    scale: f64,
    body: String,
}

impl Canvas {
    fn new(points: impl Iterator<Item = (f64, f64)>, scale: f64) -> Canvas {
        let mut min = (f64::INFINITY, f64::INFINITY);
        let mut max = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for (x, y) in points {
            min = (min.0.min(x), min.1.min(y));
            max = (max.0.max(x), max.1.max(y));
        }
        if !min.0.is_finite() {
            min = (0.0, 0.0);
            max = (1.0, 1.0);
        }
        Canvas { min, max, scale, body: String::new() }
    }

    fn map(&self, (x, y): (f64, f64)) -> (f64, f64) {
        (MARGIN + (x - self.min.0) * self.scale, MARGIN + (self.max.1 - y) * self.scale)
    }

    fn line(&mut self, a: (f64, f64), b: (f64, f64), class: &str) {
        let (p, q) = (self.map(a), self.map(b));
        let _ = writeln!(self.body, r#"<line class="{class}" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/>"#, p.0, p.1, q.0, q.1);
    }

    fn dot(&mut self, a: (f64, f64), r: f64, class: &str) {
        let p = self.map(a);
        let _ = writeln!(self.body, r#"<circle class="{class}" cx="{:.3}" cy="{:.3}" r="{:.3}"/>"#, p.0, p.1, r);
    }

    fn path(&mut self, pts: &[(f64, f64)], close: bool, class: &str) {
        let mut d = String::new();
        for (i, &a) in pts.iter().enumerate() {
            let p = self.map(a);
            let _ = write!(d, "{}{:.3},{:.3} ", if i == 0 { "M" } else { "L" }, p.0, p.1);
        }
        if close {
            d.push('Z');
        }
        let _ = writeln!(self.body, r#"<path class="{class}" d="{}"/>"#, d.trim_end());
    }

    fn finish(self, style: &str) -> String {
        let w = 2.0 * MARGIN + (self.max.0 - self.min.0) * self.scale;
        let h = 2.0 * MARGIN + (self.max.1 - self.min.1) * self.scale;
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.3}\" height=\"{h:.3}\" viewBox=\"0 0 {w:.3} {h:.3}\">\n<style>{style}</style>\n{}</svg>\n",
            self.body
        )
    }
}

/// The tower with all edges drawn thin and the dimers of `m` bold.
pub fn matching_svg(g: &TowerGraph, m: &Matching) -> String {
    let pts = g
        .whites
        .iter()
        .map(|&w| vertex_position(Color::White, w))
        .chain(g.blacks.iter().map(|&b| vertex_position(Color::Black, b)));
    let mut c = Canvas::new(pts, SCALE);
    for e in &g.edges {
        c.line(vertex_position(Color::White, e.white), vertex_position(Color::Black, e.black), "edge");
    }
    for e in &m.edges {
        c.line(vertex_position(Color::White, e.white), vertex_position(Color::Black, e.black), "dimer");
    }
    for &w in &g.whites {
        c.dot(vertex_position(Color::White, w), 4.0, "white");
    }
    for &b in &g.blacks {
        c.dot(vertex_position(Color::Black, b), 4.0, "black");
    }
    c.finish(".edge{stroke:#bbb;stroke-width:1}.dimer{stroke:#222;stroke-width:6;stroke-linecap:round}.white{fill:#fff;stroke:#222}.black{fill:#222}")
}

/// The domain `{0 ≤ x ≤ 1, −2x ≤ u ≤ 1−x}` with the traced curve.
pub fn arctic_svg(curve: &ArcticCurve) -> String {
    let domain = [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, -2.0)];
    let mut c = Canvas::new(domain.iter().copied(), 200.0);
    c.path(&domain, true, "domain");
    if !curve.points.is_empty() {
        c.path(&curve.points, true, "arctic");
    }
    c.finish(".domain{fill:#f4f4f4;stroke:#222;stroke-width:1}.arctic{fill:none;stroke:#c22;stroke-width:2}")
}

/// Dual faces around each primal vertex of the patch with their circumcircles.
pub fn embedding_svg(e: &DualEmbedding) -> String {
    let to = |z: C64| (z.re, z.im);
    let scale = 120.0;
    let mut c = Canvas::new(e.positions.values().map(|&z| to(z)), scale);
    let xs = e.positions.keys().map(|f| f.x);
    let us = e.positions.keys().map(|f| f.u);
    let (x0, x1) = (xs.clone().min().unwrap_or(0), xs.max().unwrap_or(0));
    let (u0, u1) = (us.clone().min().unwrap_or(0), us.max().unwrap_or(0));
    for x in x0..=x1 + 1 {
        for u in u0..=u1 + 1 {
            for color in [Color::White, Color::Black] {
                let v = LatticeCoord::new(x, u);
                if !has_color(v, color) {
                    continue;
                }
                let Some(mut pts) = faces_around(v, color).iter().map(|f| e.positions.get(f).copied()).collect::<Option<Vec<C64>>>() else {
                    continue;
                };
                let mid = pts.iter().sum::<C64>() / pts.len() as f64;
                pts.sort_by(|a, b| (a - mid).arg().total_cmp(&(b - mid).arg()));
                let poly: Vec<(f64, f64)> = pts.iter().map(|&z| to(z)).collect();
                c.path(&poly, true, if color == Color::White { "wface" } else { "bface" });
                if let Ok(o) = circumcenter(pts[0], pts[1], pts[2]) {
                    let r = (pts[0] - o).norm() * scale;
                    c.dot(to(o), r, "circ");
                }
            }
        }
    }
    for &z in e.positions.values() {
        c.dot(to(z), 2.5, "node");
    }
    c.finish(".wface{fill:#eef;stroke:#447}.bface{fill:#fee;stroke:#744}.circ{fill:none;stroke:#999;stroke-dasharray:3 2}.node{fill:#222}")
}

pub fn write_svg(svg: &str, path: &Path) -> Result<()> {
    std::fs::write(path, svg).with_context(|| format!("writing {}", path.display()))
}
