//! Square-hexagon lattice coordinates, edges and the tower subgraph.
//!
//! Columns are typed by `X mod 3`: `X ≡ 0` carries a white vertex, `X ≡ 2` a
//! black one and `X ≡ 1` both. Kasteleyn signs are the periodic extension of
//! the fundamental-domain matrix
//! `K₁(z,w) = [[-1 + 1/z, 1/z + β], [w, -1 + α/z]]`, which in black-row form reads
//!
//! ```text
//! b(X,U), X ≡ 2:  w(X+1,U) +1   w(X-1,U) -1   w(X+1,U-1) +β   w(X-1,U+1) +1
//! b(X,U), X ≡ 1:  w(X,U)   +1   w(X-1,U) -1   w(X-1,U+1) +α
//! ```
//!
//! The β edge `w(0,0) - b(-1,1)` is the one whose inverse-kernel entry gives
//! the current of the growth process.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const GRAPH_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticeCoord {
    pub x: i64,
    pub u: i64,
}

impl LatticeCoord {
    pub const fn new(x: i64, u: i64) -> Self {
        LatticeCoord { x, u }
    }

    /// The unique `(k, m)` with `X = 3k - m`, `m ∈ {1,2,3}`.
    pub fn k_m(self) -> (i64, i64) {
        let m = match (-self.x).rem_euclid(3) {
            0 => 3,
            r => r,
        };
        ((self.x + m) / 3, m)
    }

    pub fn residue(self) -> i64 {
        self.x.rem_euclid(3)
    }

    pub fn shifted(self, dx: i64, du: i64) -> Self {
        LatticeCoord::new(self.x + dx, self.u + du)
    }
}

impl fmt::Display for LatticeCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    White,
    Black,
}

impl Color {
    pub fn name(self) -> &'static str {
        match self {
            Color::White => "white",
            Color::Black => "black",
        }
    }
}

pub fn vertex_type(c: LatticeCoord) -> &'static [Color] {
    match c.residue() {
        0 => &[Color::White],
        1 => &[Color::White, Color::Black],
        _ => &[Color::Black],
    }
}

pub fn has_color(c: LatticeCoord, color: Color) -> bool {
    vertex_type(c).contains(&color)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Unit,
    Alpha,
    Beta,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub white: LatticeCoord,
    pub black: LatticeCoord,
    pub kind: EdgeKind,
    pub sign: i8,
    pub weight: BigRational,
}

impl Edge {
    pub fn key(&self) -> EdgeKey {
        EdgeKey { white: self.white, black: self.black }
    }

    /// The signed Kasteleyn entry `sign · weight`.
    pub fn entry(&self) -> BigRational {
        if self.sign < 0 {
            -self.weight.clone()
        } else {
            self.weight.clone()
        }
    }
}

/// An edge identified by its endpoints only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeKey {
    pub white: LatticeCoord,
    pub black: LatticeCoord,
}

impl fmt::Display for EdgeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w{} - b{}", self.white, self.black)
    }
}

/// Black neighbours of a white vertex as `(black, kind, sign)`.
fn white_neighbours(w: LatticeCoord) -> Vec<(LatticeCoord, EdgeKind, i8)> {
    let (x, u) = (w.x, w.u);
    match w.residue() {
        0 => vec![
            (LatticeCoord::new(x - 1, u), EdgeKind::Unit, 1),
            (LatticeCoord::new(x + 1, u), EdgeKind::Unit, -1),
            (LatticeCoord::new(x - 1, u + 1), EdgeKind::Beta, 1),
            (LatticeCoord::new(x + 1, u - 1), EdgeKind::Alpha, 1),
        ],
        1 => vec![
            (LatticeCoord::new(x, u), EdgeKind::Unit, 1),
            (LatticeCoord::new(x + 1, u), EdgeKind::Unit, -1),
            (LatticeCoord::new(x + 1, u - 1), EdgeKind::Unit, 1),
        ],
        _ => Vec::new(),
    }
}

/// White neighbours of a black vertex as `(white, kind, sign)`.
fn black_neighbours(b: LatticeCoord) -> Vec<(LatticeCoord, EdgeKind, i8)> {
    let (x, u) = (b.x, b.u);
    match b.residue() {
        2 => vec![
            (LatticeCoord::new(x + 1, u), EdgeKind::Unit, 1),
            (LatticeCoord::new(x - 1, u), EdgeKind::Unit, -1),
            (LatticeCoord::new(x + 1, u - 1), EdgeKind::Beta, 1),
            (LatticeCoord::new(x - 1, u + 1), EdgeKind::Unit, 1),
        ],
        1 => vec![
            (LatticeCoord::new(x, u), EdgeKind::Unit, 1),
            (LatticeCoord::new(x - 1, u), EdgeKind::Unit, -1),
            (LatticeCoord::new(x - 1, u + 1), EdgeKind::Alpha, 1),
        ],
        _ => Vec::new(),
    }
}

/// Coordinates of the lattice neighbours of a vertex.
pub fn neighbours(c: LatticeCoord, color: Color) -> Vec<LatticeCoord> {
    let list = match color {
        Color::White => white_neighbours(c),
        Color::Black => black_neighbours(c),
    };
    list.into_iter().map(|(v, _, _)| v).collect()
}

fn kind_weight(kind: EdgeKind, alpha: &BigRational, beta: &BigRational) -> BigRational {
    match kind {
        EdgeKind::Unit => BigRational::one(),
        EdgeKind::Alpha => alpha.clone(),
        EdgeKind::Beta => beta.clone(),
    }
}

pub fn incident_edges(
    c: LatticeCoord,
    color: Color,
    alpha: &BigRational,
    beta: &BigRational,
) -> Result<Vec<Edge>> {
    if !has_color(c, color) {
        return Err(Error::ColorMismatch { x: c.x, u: c.u, color: color.name() });
    }
    let edges = match color {
        Color::White => white_neighbours(c)
            .into_iter()
            .map(|(b, kind, sign)| Edge {
                white: c,
                black: b,
                kind,
                sign,
                weight: kind_weight(kind, alpha, beta),
            })
            .collect(),
        Color::Black => black_neighbours(c)
            .into_iter()
            .map(|(w, kind, sign)| Edge {
                white: w,
                black: c,
                kind,
                sign,
                weight: kind_weight(kind, alpha, beta),
            })
            .collect(),
    };
    Ok(edges)
}

/// Sign and kind of the lattice edge between `white` and `black`, if adjacent.
pub fn lattice_edge(white: LatticeCoord, black: LatticeCoord) -> Option<(EdgeKind, i8)> {
    if !has_color(white, Color::White) || !has_color(black, Color::Black) {
        return None;
    }
    white_neighbours(white)
        .into_iter()
        .find(|(b, _, _)| *b == black)
        .map(|(_, kind, sign)| (kind, sign))
}

/// The face containing the point `(X, U + 1/2)`, i.e. the face just above
/// the vertex (or vertex pair) at `(X, U)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Face {
    pub x: i64,
    pub u: i64,
}

impl Face {
    pub const fn new(x: i64, u: i64) -> Self {
        Face { x, u }
    }

    /// Boundary vertices in cyclic order.
    pub fn boundary(self) -> Vec<(Color, LatticeCoord)> {
        use Color::{Black as B, White as W};
        let (x, u) = (self.x, self.u);
        let c = LatticeCoord::new;
        match x.rem_euclid(3) {
            0 => vec![(W, c(x, u)), (B, c(x + 1, u)), (W, c(x, u + 1)), (B, c(x - 1, u + 1))],
            2 => vec![(B, c(x, u)), (W, c(x + 1, u)), (B, c(x, u + 1)), (W, c(x - 1, u + 1))],
            _ => vec![
                (B, c(x, u)),
                (W, c(x - 1, u + 1)),
                (B, c(x, u + 1)),
                (W, c(x, u + 1)),
                (B, c(x + 1, u)),
                (W, c(x, u)),
            ],
        }
    }

    /// Boundary edges as `(white, black)` pairs in cyclic order.
    pub fn boundary_edges(self) -> Vec<EdgeKey> {
        let vs = self.boundary();
        let n = vs.len();
        (0..n)
            .map(|i| {
                let (ca, a) = vs[i];
                let (_, b) = vs[(i + 1) % n];
                if ca == Color::White {
                    EdgeKey { white: a, black: b }
                } else {
                    EdgeKey { white: b, black: a }
                }
            })
            .collect()
    }
}

/// The two faces separated by a lattice edge, ordered `(F, F')` so that the
/// dual step `F → F'` crosses the edge with the white vertex on its right.
pub fn dual_crossing(key: EdgeKey) -> Option<(Face, Face)> {
    let (w, b) = (key.white, key.black);
    lattice_edge(w, b)?;
    let (x, u) = (w.x, w.u);
    let off = (b.x - x, b.u - u);
    let (l, r) = match (w.residue(), off) {
        (0, (-1, 0)) => ((0, -1), (-1, 0)),
        (0, (1, 0)) | (1, (1, 0)) => ((0, 0), (1, -1)),
        (0, (-1, 1)) => ((-1, 0), (0, 0)),
        (0, (1, -1)) | (1, (1, -1)) => ((1, -1), (0, -1)),
        (1, (0, 0)) => ((0, -1), (0, 0)),
        _ => return None,
    };
    Some((Face::new(x + l.0, u + l.1), Face::new(x + r.0, u + r.1)))
}

/// Product of Kasteleyn signs around `face` together with the required value
/// `(-1)^(k+1)` for a face of degree `2k`.
pub fn face_sign(face: Face) -> (i8, i8) {
    let edges = face.boundary_edges();
    let mut prod = 1i8;
    for e in &edges {
        let (_, s) = lattice_edge(e.white, e.black).expect("face boundary is made of lattice edges");
        prod *= s;
    }
    let k = edges.len() / 2;
    let want = if (k + 1) % 2 == 0 { 1 } else { -1 };
    (prod, want)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TowerGraph {
    pub n: u32,
    pub alpha: BigRational,
    pub beta: BigRational,
    /// White vertices, lexicographic in `(X, U)`.
    pub whites: Vec<LatticeCoord>,
    /// Black vertices, lexicographic in `(X, U)`.
    pub blacks: Vec<LatticeCoord>,
    pub edges: Vec<Edge>,
    white_index: HashMap<LatticeCoord, usize>,
    black_index: HashMap<LatticeCoord, usize>,
    edge_index: HashMap<EdgeKey, usize>,
}

/// Whether `(X, U)` lies in the coordinate range of the size-`n` tower.
pub fn in_tower(n: u32, c: LatticeCoord) -> bool {
    let n = n as i64;
    if c.x < 0 || c.x > 3 * n {
        return false;
    }
    let q = c.x.div_euclid(3);
    -c.x + q <= c.u && c.u <= n - q - 1
}

pub fn build_tower(n: u32, alpha: &BigRational, beta: &BigRational) -> Result<TowerGraph> {
    if n == 0 {
        return Err(Error::InvalidParameter("tower size must be at least 1".into()));
    }
    if !alpha.is_positive() || !beta.is_positive() {
        return Err(Error::InvalidParameter("edge weights must be positive".into()));
    }
    let ni = n as i64;
    let mut whites = Vec::new();
    let mut blacks = Vec::new();
    for x in 0..=3 * ni {
        let q = x.div_euclid(3);
        for u in (-x + q)..=(ni - q - 1) {
            let c = LatticeCoord::new(x, u);
            if has_color(c, Color::White) {
                whites.push(c);
            }
            if has_color(c, Color::Black) {
                blacks.push(c);
            }
        }
    }
    let mut edges = Vec::new();
    for &w in &whites {
        for (b, kind, sign) in white_neighbours(w) {
            if in_tower(n, b) {
                edges.push(Edge { white: w, black: b, kind, sign, weight: kind_weight(kind, alpha, beta) });
            }
        }
    }
    edges.sort();
    Ok(TowerGraph::assemble(n, alpha.clone(), beta.clone(), whites, blacks, edges))
}

impl TowerGraph {
    fn assemble(
        n: u32,
        alpha: BigRational,
        beta: BigRational,
        whites: Vec<LatticeCoord>,
        blacks: Vec<LatticeCoord>,
        edges: Vec<Edge>,
    ) -> Self {
        let white_index = whites.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let black_index = blacks.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let edge_index = edges.iter().enumerate().map(|(i, e)| (e.key(), i)).collect();
        TowerGraph { n, alpha, beta, whites, blacks, edges, white_index, black_index, edge_index }
    }

    pub fn white_idx(&self, c: LatticeCoord) -> Option<usize> {
        self.white_index.get(&c).copied()
    }

    pub fn black_idx(&self, c: LatticeCoord) -> Option<usize> {
        self.black_index.get(&c).copied()
    }

    pub fn edge(&self, key: EdgeKey) -> Option<&Edge> {
        self.edge_index.get(&key).map(|&i| &self.edges[i])
    }

    pub fn contains(&self, c: LatticeCoord, color: Color) -> bool {
        match color {
            Color::White => self.white_index.contains_key(&c),
            Color::Black => self.black_index.contains_key(&c),
        }
    }

    /// Edges of the graph incident to a vertex.
    pub fn edges_at(&self, c: LatticeCoord, color: Color) -> Vec<&Edge> {
        let nbrs = match color {
            Color::White => white_neighbours(c).into_iter().map(|(b, _, _)| EdgeKey { white: c, black: b }).collect::<Vec<_>>(),
            Color::Black => black_neighbours(c).into_iter().map(|(w, _, _)| EdgeKey { white: w, black: c }).collect(),
        };
        nbrs.into_iter().filter_map(|k| self.edge(k)).collect()
    }

    /// Faces all of whose boundary vertices belong to the graph.
    pub fn inner_faces(&self) -> Vec<Face> {
        let ni = self.n as i64;
        let mut out = Vec::new();
        for x in -1..=3 * ni + 1 {
            for u in -2 * ni - 3..=ni + 1 {
                let f = Face::new(x, u);
                if f.boundary().iter().all(|&(col, c)| self.contains(c, col)) {
                    out.push(f);
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&GraphDoc::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<TowerGraph> {
        let doc: GraphDoc = serde_json::from_str(s)?;
        if doc.version != GRAPH_FORMAT_VERSION {
            return Err(Error::InvalidParameter(format!("unsupported graph format version {}", doc.version)));
        }
        let alpha = parse_rational(&doc.alpha)?;
        let beta = parse_rational(&doc.beta)?;
        let g = build_tower(doc.n, &alpha, &beta)?;
        if GraphDoc::from(&g) != doc {
            return Err(Error::InvalidParameter("graph document does not describe a tower".into()));
        }
        Ok(g)
    }
}

pub fn format_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::InvalidParameter(format!("cannot parse rational {s:?}"));
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        Ok(BigRational::new(p, q))
    } else {
        Ok(BigRational::from_integer(BigInt::from_str(s).map_err(|_| bad())?))
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    num_traits::ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct EdgeDoc {
    white: [i64; 2],
    black: [i64; 2],
    weight: String,
    sign: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct GraphDoc {
    version: u32,
    n: u32,
    alpha: String,
    beta: String,
    whites: Vec<[i64; 2]>,
    blacks: Vec<[i64; 2]>,
    edges: Vec<EdgeDoc>,
}

impl From<&TowerGraph> for GraphDoc {
    fn from(g: &TowerGraph) -> Self {
        GraphDoc {
            version: GRAPH_FORMAT_VERSION,
            n: g.n,
            alpha: format_rational(&g.alpha),
            beta: format_rational(&g.beta),
            whites: g.whites.iter().map(|c| [c.x, c.u]).collect(),
            blacks: g.blacks.iter().map(|c| [c.x, c.u]).collect(),
            edges: g
                .edges
                .iter()
                .map(|e| EdgeDoc {
                    white: [e.white.x, e.white.u],
                    black: [e.black.x, e.black.u],
                    weight: format_rational(&e.weight),
                    sign: e.sign,
                })
                .collect(),
        }
    }
}
