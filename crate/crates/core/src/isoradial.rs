//! Embedding of the dual lattice attached to a liquid point `z₀`: faces are
//! placed by summing fixed increments across primal edges, and each primal
//! vertex becomes a dual face whose corners should lie on a common circle.

use std::collections::{BTreeMap, VecDeque};
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{w_of_z, GibbsPoint, C64};
use crate::lattice::{dual_crossing, lattice_edge, neighbours, Color, EdgeKey, Face, LatticeCoord};

/// Tolerance on cycle sums accepted by [`embed_patch`], relative to `1 + |Ṽx| + |Ṽy|`.
pub const CLOSURE_TOL: f64 = 1e-9;

/// The four vertex types of one fundamental domain.
pub const VERTEX_TYPES: [(Color, LatticeCoord); 4] = [
    (Color::White, LatticeCoord::new(0, 0)),
    (Color::White, LatticeCoord::new(1, 0)),
    (Color::Black, LatticeCoord::new(1, 0)),
    (Color::Black, LatticeCoord::new(2, 0)),
];

/// `f(F') − f(F)` for the dual step across `key` with the white vertex on the right.
pub fn increment_with(key: EdgeKey, z: C64, w0: C64, alpha: f64, beta: f64) -> Option<C64> {
    let (w, b) = (key.white, key.black);
    lattice_edge(w, b)?;
    let off = (b.x - w.x, b.u - w.u);
    let v = match (w.residue(), off) {
        (1, (0, 0)) => -(z - 1.0) * (z - alpha),
        (0, (-1, 0)) => -w0 * z,
        (0, (1, 0)) => z * z - z,
        (1, (1, 0)) => z * (z - alpha),
        (0, (-1, 1)) => -z * z * w0 * beta,
        (0, (1, -1)) => alpha * (1.0 - z),
        (1, (1, -1)) => -(z - alpha),
        _ => return None,
    };
    Some(v)
}

pub fn increment(key: EdgeKey, gp: &GibbsPoint) -> Option<C64> {
    increment_with(key, gp.z0, gp.w0(), gp.alpha, gp.beta)
}

/// `(Ṽx, Ṽy)`: the shifts of `f` under `(X,U) → (X+3,U−1)` and `(X,U) → (X,U+1)`.
pub fn period_vectors_with(z: C64, w0: C64, alpha: f64) -> (C64, C64) {
    (w0 * z + (z - alpha) + alpha * (z - 1.0), -(z - 1.0) * (z - alpha))
}

pub fn period_vectors(gp: &GibbsPoint) -> (C64, C64) {
    period_vectors_with(gp.z0, gp.w0(), gp.alpha)
}

fn edges_at(c: LatticeCoord, color: Color) -> Vec<EdgeKey> {
    neighbours(c, color)
        .into_iter()
        .map(|n| match color {
            Color::White => EdgeKey { white: c, black: n },
            Color::Black => EdgeKey { white: n, black: c },
        })
        .filter(|k| lattice_edge(k.white, k.black).is_some())
        .collect()
}

/// Sum of the increments of all edges at the vertex; zero when the dual face
/// around the vertex closes.
pub fn vertex_closure_with(c: LatticeCoord, color: Color, z: C64, w0: C64, alpha: f64, beta: f64) -> C64 {
    edges_at(c, color).into_iter().filter_map(|k| increment_with(k, z, w0, alpha, beta)).sum()
}

/// Largest `|Σ increments|` over the four vertex types, with an arbitrary `w₀`.
pub fn face_closure_residual_with(z: C64, w0: C64, alpha: f64, beta: f64) -> f64 {
    VERTEX_TYPES.iter().map(|&(color, c)| vertex_closure_with(c, color, z, w0, alpha, beta).norm()).fold(0.0, f64::max)
}

pub fn face_closure_residual(gp: &GibbsPoint) -> f64 {
    face_closure_residual_with(gp.z0, gp.w0(), gp.alpha, gp.beta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualEmbedding {
    pub z0: GibbsPoint,
    #[serde(with = "face_map")]
    pub positions: BTreeMap<Face, C64>,
    pub vx: C64,
    pub vy: C64,
}

mod face_map {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &BTreeMap<Face, C64>, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(m.iter())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BTreeMap<Face, C64>, D::Error> {
        let v: Vec<(Face, C64)> = Deserialize::deserialize(d)?;
        Ok(v.into_iter().collect())
    }
}

/// Dual edges `(F, F', f(F') − f(F))` with both faces in the window.
fn dual_edges(
    z: C64,
    w0: C64,
    alpha: f64,
    beta: f64,
    xs: &RangeInclusive<i64>,
    us: &RangeInclusive<i64>,
) -> Vec<(Face, Face, C64)> {
    let inside = |f: &Face| xs.contains(&f.x) && us.contains(&f.u);
    let mut out = Vec::new();
    for x in xs.start() - 2..=xs.end() + 2 {
        if x.rem_euclid(3) == 2 {
            continue;
        }
        for u in us.start() - 2..=us.end() + 2 {
            for key in edges_at(LatticeCoord::new(x, u), Color::White) {
                let Some((f, g)) = dual_crossing(key) else { continue };
                if inside(&f) && inside(&g) {
                    if let Some(v) = increment_with(key, z, w0, alpha, beta) {
                        out.push((f, g, v));
                    }
                }
            }
        }
    }
    out
}

fn path_to_root(parent: &BTreeMap<Face, Face>, mut f: Face) -> Vec<Face> {
    let mut p = vec![f];
    while let Some(&q) = parent.get(&f) {
        p.push(q);
        f = q;
    }
    p
}

/// Positions of the faces in the window reachable from `F(0,0)`, for any
/// `z₀` off the poles. Path independence is checked on every non-tree edge.
pub fn positions_at(
    z: C64,
    alpha: f64,
    beta: f64,
    x_range: RangeInclusive<i64>,
    u_range: RangeInclusive<i64>,
) -> Result<BTreeMap<Face, C64>> {
    let w0 = w_of_z(z, alpha, beta)?;
    positions_with(z, w0, alpha, beta, x_range, u_range)
}

pub fn positions_with(
    z: C64,
    w0: C64,
    alpha: f64,
    beta: f64,
    x_range: RangeInclusive<i64>,
    u_range: RangeInclusive<i64>,
) -> Result<BTreeMap<Face, C64>> {
    if !x_range.contains(&0) || !u_range.contains(&0) {
        return Err(Error::InvalidParameter("window must contain the face (0, 0)".into()));
    }
    let edges = dual_edges(z, w0, alpha, beta, &x_range, &u_range);
    let mut adj: BTreeMap<Face, Vec<(Face, C64)>> = BTreeMap::new();
    for &(f, g, v) in &edges {
        adj.entry(f).or_default().push((g, v));
        adj.entry(g).or_default().push((f, -v));
    }
    let origin = Face::new(0, 0);
    let mut pos = BTreeMap::from([(origin, C64::new(0.0, 0.0))]);
    let mut parent = BTreeMap::new();
    let mut queue = VecDeque::from([origin]);
    while let Some(a) = queue.pop_front() {
        for &(b, v) in adj.get(&a).map(Vec::as_slice).unwrap_or(&[]) {
            if !pos.contains_key(&b) {
                pos.insert(b, pos[&a] + v);
                parent.insert(b, a);
                queue.push_back(b);
            }
        }
    }
    let (vx, vy) = period_vectors_with(z, w0, alpha);
    let tol = CLOSURE_TOL * (1.0 + vx.norm() + vy.norm());
    for &(f, g, v) in &edges {
        let (Some(pf), Some(pg)) = (pos.get(&f), pos.get(&g)) else { continue };
        let gap = (pg - pf - v).norm();
        if gap > tol {
            let mut cycle = path_to_root(&parent, f);
            cycle.reverse();
            cycle.extend(path_to_root(&parent, g).into_iter().take_while(|&h| h != origin));
            let faces: Vec<String> = cycle.iter().map(|h| format!("F({}, {})", h.x, h.u)).collect();
            return Err(Error::InconsistentIncrements(format!(
                "cycle {} fails to close by {gap:e}",
                faces.join(" -> ")
            )));
        }
    }
    Ok(pos)
}

pub fn embed_patch(gp: &GibbsPoint, x_range: RangeInclusive<i64>, u_range: RangeInclusive<i64>) -> Result<DualEmbedding> {
    if !(gp.z0.im > 0.0) {
        return Err(Error::InvalidParameter(format!("z0 = {} is not in the open upper half plane", gp.z0)));
    }
    let positions = positions_at(gp.z0, gp.alpha, gp.beta, x_range, u_range)?;
    let (vx, vy) = period_vectors(gp);
    Ok(DualEmbedding { z0: *gp, positions, vx, vy })
}

impl DualEmbedding {
    /// Largest deviation of `f(F + shift) − f(F)` from `Ṽx` and from `Ṽy`.
    pub fn periodicity_residual(&self) -> (f64, f64) {
        let dev = |dx: i64, du: i64, v: C64| {
            self.positions
                .iter()
                .filter_map(|(f, p)| self.positions.get(&Face::new(f.x + dx, f.u + du)).map(|q| (q - p - v).norm()))
                .fold(0.0, f64::max)
        };
        (dev(3, -1, self.vx), dev(0, 1, self.vy))
    }

    /// Positions of the faces around a primal vertex, in the order of the
    /// window scan; `None` if any is missing from the patch.
    pub fn corners(&self, c: LatticeCoord, color: Color) -> Option<Vec<C64>> {
        let faces = faces_around(c, color);
        faces.iter().map(|f| self.positions.get(f).copied()).collect()
    }
}

/// Faces whose boundary contains the vertex.
pub fn faces_around(c: LatticeCoord, color: Color) -> Vec<Face> {
    let mut out = Vec::new();
    for x in c.x - 2..=c.x + 2 {
        for u in c.u - 2..=c.u + 2 {
            let f = Face::new(x, u);
            if f.boundary().contains(&(color, c)) {
                out.push(f);
            }
        }
    }
    out
}

pub fn circumcenter(a: C64, b: C64, c: C64) -> Result<C64> {
    let (p, q) = (b - a, c - a);
    let d = 2.0 * (p.re * q.im - p.im * q.re);
    if d.abs() <= 1e-14 * (p.norm_sqr() + q.norm_sqr()) {
        return Err(Error::Degenerate(format!("collinear points {a}, {b}, {c}")));
    }
    let (pp, qq) = (p.norm_sqr(), q.norm_sqr());
    Ok(a + C64::new(q.im * pp - p.im * qq, p.re * qq - q.re * pp) / d)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexCircle {
    pub color: Color,
    pub vertex: LatticeCoord,
    pub center: C64,
    pub radius: f64,
    /// `max − min` of the corner distances to `center`.
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsoradialityReport {
    pub z0: GibbsPoint,
    pub circles: Vec<VertexCircle>,
    pub max_spread: f64,
    /// `max − min` of the radii across vertex types.
    pub radius_spread: f64,
    pub common_radius: f64,
    pub isoradial: bool,
}

/// Threshold on `max_spread` and `radius_spread` for [`IsoradialityReport::isoradial`].
pub const ISORADIAL_TOL: f64 = 1e-6;

pub fn isoradiality_report(gp: &GibbsPoint) -> Result<IsoradialityReport> {
    let emb = embed_patch(gp, -4..=5, -3..=3)?;
    let mut circles = Vec::new();
    for &(color, v) in &VERTEX_TYPES {
        let pts = emb
            .corners(v, color)
            .ok_or_else(|| Error::Degenerate(format!("faces around {v} missing from the patch")))?;
        if pts.len() < 3 {
            return Err(Error::Degenerate(format!("vertex {v} has {} faces", pts.len())));
        }
        let center = circumcenter(pts[0], pts[1], pts[2])?;
        let d: Vec<f64> = pts.iter().map(|p| (p - center).norm()).collect();
        let lo = d.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = d.iter().copied().fold(0.0, f64::max);
        circles.push(VertexCircle { color, vertex: v, center, radius: d.iter().sum::<f64>() / d.len() as f64, spread: hi - lo });
    }
    let max_spread = circles.iter().map(|c| c.spread).fold(0.0, f64::max);
    let rmin = circles.iter().map(|c| c.radius).fold(f64::INFINITY, f64::min);
    let rmax = circles.iter().map(|c| c.radius).fold(0.0, f64::max);
    let common_radius = circles.iter().map(|c| c.radius).sum::<f64>() / circles.len() as f64;
    Ok(IsoradialityReport {
        z0: *gp,
        isoradial: max_spread < ISORADIAL_TOL && rmax - rmin < ISORADIAL_TOL,
        circles,
        max_spread,
        radius_spread: rmax - rmin,
        common_radius,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vy_at_i() {
        let gp = GibbsPoint::new(C64::i(), 1.0, 1.0).unwrap();
        let (_, vy) = period_vectors(&gp);
        assert!((vy - C64::new(0.0, 2.0)).norm() < 1e-15);
        assert!(face_closure_residual(&gp) < 1e-12);
    }

    #[test]
    fn origin_is_zero() {
        let gp = GibbsPoint::new(C64::new(0.3, 0.8), 2.0, 0.5).unwrap();
        let e = embed_patch(&gp, -3..=3, -2..=2).unwrap();
        assert_eq!(e.positions[&Face::new(0, 0)], C64::new(0.0, 0.0));
        let (px, py) = e.periodicity_residual();
        assert!(px < 1e-12 && py < 1e-12, "{px} {py}");
    }

    #[test]
    fn every_vertex_has_a_face_cycle() {
        for &(color, v) in &VERTEX_TYPES {
            let n = faces_around(v, color).len();
            assert_eq!(n, edges_at(v, color).len());
        }
    }
}
