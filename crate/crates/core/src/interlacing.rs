//! Interlacing particle arrays, perfect matchings of the tower and the
//! bijection between them.
//!
//! Column `3t-3` carries the `z^t` particles (whites matched to the left),
//! column `3t-2` the `y^t` particles (matched rungs `w(X,U) - b(X,U)`) and
//! column `3t-1` the `x^t` particles (blacks matched to the right).

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{dual_crossing, in_tower, lattice_edge, neighbours, Color, EdgeKey, Face, LatticeCoord, TowerGraph};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Level {
    pub k: u32,
    pub z: Vec<i64>,
    pub y: Vec<i64>,
    pub x: Vec<i64>,
}

impl Level {
    /// The level whose arrays are the empty Maya diagrams `(-1, -2, ...)`.
    pub fn empty(k: u32) -> Level {
        let k = k as i64;
        Level { k: k as u32, z: staircase(2 * k - 2), y: staircase(2 * k - 1), x: staircase(2 * k) }
    }
}

pub fn staircase(len: i64) -> Vec<i64> {
    (1..=len).map(|i| -i).collect()
}

/// The configuration `T(N)`: levels `1..=N+1`, level `N+1` holding `z^{N+1}`
/// and the empty `y^{N+1}`, `x^{N+1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Configuration {
    pub n: u32,
    pub levels: Vec<Level>,
}

fn check_decreasing(name: &str, v: &[i64]) -> Result<()> {
    for i in 1..v.len() {
        if v[i - 1] <= v[i] {
            return Err(Error::Interlacing(format!("{name} is not strictly decreasing at index {}", i + 1)));
        }
    }
    Ok(())
}

fn check_range(name: &str, v: &[i64], lo: i64, hi: i64) -> Result<()> {
    for (i, &p) in v.iter().enumerate() {
        if p < lo || p > hi {
            return Err(Error::Interlacing(format!("{name}_{} = {p} outside [{lo}, {hi}]", i + 1)));
        }
    }
    Ok(())
}

impl Configuration {
    pub fn level(&self, k: u32) -> &Level {
        &self.levels[(k - 1) as usize]
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n as i64;
        if self.levels.len() != self.n as usize + 1 {
            return Err(Error::Interlacing(format!(
                "expected {} levels, found {}",
                self.n + 1,
                self.levels.len()
            )));
        }
        for (idx, lv) in self.levels.iter().enumerate() {
            let k = idx as i64 + 1;
            if lv.k as i64 != k {
                return Err(Error::Interlacing(format!("level {} stored at position {k}", lv.k)));
            }
            for (name, v, len) in [("z", &lv.z, 2 * k - 2), ("y", &lv.y, 2 * k - 1), ("x", &lv.x, 2 * k)] {
                if v.len() as i64 != len {
                    return Err(Error::Interlacing(format!("|{name}^{k}| = {} but must be {len}", v.len())));
                }
                check_decreasing(&format!("{name}^{k}"), v)?;
            }
            check_range(&format!("z^{k}"), &lv.z, -(2 * k - 2), n - k)?;
            check_range(&format!("y^{k}"), &lv.y, -(2 * k - 1), n - k)?;
            check_range(&format!("x^{k}"), &lv.x, -2 * k, n - k)?;
            for i in 0..lv.y.len() {
                if lv.x[i] < lv.y[i] {
                    return Err(Error::Interlacing(format!(
                        "x^{k}_{0} >= y^{k}_{0} fails ({1} < {2})",
                        i + 1,
                        lv.x[i],
                        lv.y[i]
                    )));
                }
                if lv.y[i] <= lv.x[i + 1] {
                    return Err(Error::Interlacing(format!(
                        "y^{k}_{0} > x^{k}_{1} fails ({2} <= {3})",
                        i + 1,
                        i + 2,
                        lv.y[i],
                        lv.x[i + 1]
                    )));
                }
            }
            for i in 0..lv.z.len() {
                if lv.y[i] < lv.z[i] {
                    return Err(Error::Interlacing(format!(
                        "y^{k}_{0} >= z^{k}_{0} fails ({1} < {2})",
                        i + 1,
                        lv.y[i],
                        lv.z[i]
                    )));
                }
                if lv.z[i] <= lv.y[i + 1] {
                    return Err(Error::Interlacing(format!(
                        "z^{k}_{0} > y^{k}_{1} fails ({2} <= {3})",
                        i + 1,
                        i + 2,
                        lv.z[i],
                        lv.y[i + 1]
                    )));
                }
            }
            if k >= 2 {
                let prev = &self.levels[idx - 1].x;
                for i in 0..lv.z.len() {
                    if !(prev[i] >= lv.z[i] && lv.z[i] >= prev[i] - 1) {
                        return Err(Error::Interlacing(format!(
                            "x^{0}_{1} >= z^{k}_{1} >= x^{0}_{1} - 1 fails (x = {2}, z = {3})",
                            k - 1,
                            i + 1,
                            prev[i],
                            lv.z[i]
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Particle positions `U` in column `X`.
    pub fn particles_in_column(&self, x: i64) -> &[i64] {
        let t = x.div_euclid(3) + 1;
        if x < 0 || t as usize > self.levels.len() {
            return &[];
        }
        let lv = &self.levels[(t - 1) as usize];
        match x.rem_euclid(3) {
            0 => &lv.z,
            1 => &lv.y,
            _ => &lv.x,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Configuration> {
        let c: Configuration = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }
}

/// A set of tower edges, stored sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Matching {
    pub n: u32,
    pub edges: Vec<EdgeKey>,
}

impl Matching {
    pub fn new(n: u32, mut edges: Vec<EdgeKey>) -> Matching {
        edges.sort();
        Matching { n, edges }
    }

    pub fn contains(&self, key: &EdgeKey) -> bool {
        self.edges.binary_search(key).is_ok()
    }

    /// Check that every vertex of the size-`n` tower is covered exactly once
    /// by lattice edges inside the tower.
    pub fn check_perfect(&self) -> Result<()> {
        let mut seen_w = HashSet::new();
        let mut seen_b = HashSet::new();
        for e in &self.edges {
            if lattice_edge(e.white, e.black).is_none() {
                return Err(Error::NotPerfect(format!("{e} is not a lattice edge")));
            }
            if !in_tower(self.n, e.white) || !in_tower(self.n, e.black) {
                return Err(Error::NotPerfect(format!("{e} leaves the tower")));
            }
            if !seen_w.insert(e.white) {
                return Err(Error::NotPerfect(format!("white {} covered twice", e.white)));
            }
            if !seen_b.insert(e.black) {
                return Err(Error::NotPerfect(format!("black {} covered twice", e.black)));
            }
        }
        let (whites, blacks) = tower_vertex_counts(self.n);
        if seen_w.len() != whites || seen_b.len() != blacks {
            return Err(Error::NotPerfect(format!(
                "{} of {} white and {} of {} black vertices covered",
                seen_w.len(),
                whites,
                seen_b.len(),
                blacks
            )));
        }
        Ok(())
    }

    pub fn weight(&self, g: &TowerGraph) -> Result<BigRational> {
        let mut w = BigRational::one();
        for e in &self.edges {
            let edge = g.edge(*e).ok_or_else(|| Error::EdgeNotInGraph(e.to_string()))?;
            w *= &edge.weight;
        }
        Ok(w)
    }

    /// The partner of a vertex, if covered.
    pub fn partner(&self, c: LatticeCoord, color: Color) -> Option<LatticeCoord> {
        self.edges.iter().find_map(|e| match color {
            Color::White if e.white == c => Some(e.black),
            Color::Black if e.black == c => Some(e.white),
            _ => None,
        })
    }
}

fn tower_vertex_counts(n: u32) -> (usize, usize) {
    let ni = n as i64;
    let (mut w, mut b) = (0, 0);
    for x in 0..=3 * ni {
        let q = x.div_euclid(3);
        let len = (ni - q - 1) - (-x + q) + 1;
        let len = len.max(0) as usize;
        match x.rem_euclid(3) {
            0 => w += len,
            1 => {
                w += len;
                b += len;
            }
            _ => b += len,
        }
    }
    (w, b)
}

fn column_range(n: u32, x: i64) -> std::ops::RangeInclusive<i64> {
    let q = x.div_euclid(3);
    (-x + q)..=(n as i64 - q - 1)
}

fn sorted_desc(mut v: Vec<i64>) -> Vec<i64> {
    v.sort_unstable_by(|a, b| b.cmp(a));
    v
}

pub fn matching_to_arrays(m: &Matching) -> Result<Configuration> {
    m.check_perfect()?;
    let n = m.n;
    let mut levels = Vec::with_capacity(n as usize + 1);
    for t in 1..=(n as i64 + 1) {
        let mut z = Vec::new();
        let mut y = Vec::new();
        let mut x = Vec::new();
        for e in &m.edges {
            if e.white.x == 3 * t - 3 && e.black.x == 3 * t - 4 {
                z.push(e.white.u);
            }
            if e.black.x == 3 * t - 2 && e.white.x == 3 * t - 2 {
                y.push(e.black.u);
            }
            if e.black.x == 3 * t - 1 && e.white.x == 3 * t {
                x.push(e.black.u);
            }
        }
        let mut lv = Level { k: t as u32, z: sorted_desc(z), y: sorted_desc(y), x: sorted_desc(x) };
        if t == n as i64 + 1 {
            let empty = Level::empty(t as u32);
            lv.y = empty.y;
            lv.x = empty.x;
        }
        levels.push(lv);
    }
    let c = Configuration { n, levels };
    c.validate()?;
    Ok(c)
}

/// Pair the unmatched whites of column `xw` with the unmatched blacks of
/// column `xw + 1` in order.
fn pair_strip(
    n: u32,
    xw: i64,
    taken_w: &[i64],
    taken_b: &[i64],
    out: &mut Vec<EdgeKey>,
) -> Result<()> {
    let tw: BTreeSet<i64> = taken_w.iter().copied().collect();
    let tb: BTreeSet<i64> = taken_b.iter().copied().collect();
    let ws: Vec<i64> = column_range(n, xw).filter(|u| !tw.contains(u)).collect();
    let bs: Vec<i64> = column_range(n, xw + 1).filter(|u| !tb.contains(u)).collect();
    if ws.len() != bs.len() {
        return Err(Error::Interlacing(format!(
            "strip between columns {xw} and {} has {} free whites and {} free blacks",
            xw + 1,
            ws.len(),
            bs.len()
        )));
    }
    for (&uw, &ub) in ws.iter().zip(&bs) {
        out.push(EdgeKey { white: LatticeCoord::new(xw, uw), black: LatticeCoord::new(xw + 1, ub) });
    }
    Ok(())
}

pub fn arrays_to_matching(c: &Configuration, g: &TowerGraph) -> Result<Matching> {
    if c.n != g.n {
        return Err(Error::InvalidParameter(format!("configuration size {} but graph size {}", c.n, g.n)));
    }
    c.validate()?;
    let n = c.n;
    let mut edges = Vec::new();
    for t in 1..=(n as i64 + 1) {
        let lv = c.level(t as u32);
        if t >= 2 {
            let prev = &c.level(t as u32 - 1).x;
            for (&xb, &zw) in prev.iter().zip(&lv.z) {
                edges.push(EdgeKey { white: LatticeCoord::new(3 * t - 3, zw), black: LatticeCoord::new(3 * t - 4, xb) });
            }
        }
        if t == n as i64 + 1 {
            break;
        }
        for &u in &lv.y {
            edges.push(EdgeKey { white: LatticeCoord::new(3 * t - 2, u), black: LatticeCoord::new(3 * t - 2, u) });
        }
        pair_strip(n, 3 * t - 3, &lv.z, &lv.y, &mut edges)?;
        pair_strip(n, 3 * t - 2, &lv.y, &lv.x, &mut edges)?;
    }
    for e in &edges {
        if g.edge(*e).is_none() {
            return Err(Error::Interlacing(format!("reconstruction produced non-edge {e}")));
        }
    }
    let m = Matching::new(n, edges);
    m.check_perfect()?;
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeightFunction {
    pub values: BTreeMap<Face, i64>,
}

impl HeightFunction {
    pub fn get(&self, f: Face) -> Option<i64> {
        self.values.get(&f).copied()
    }

    /// `H(X,U) = -#{particles at (X,V) : V > U}` on the tower coordinates.
    pub fn from_particles(c: &Configuration) -> HeightFunction {
        let mut values = BTreeMap::new();
        let n = c.n as i64;
        for x in 0..=3 * n {
            let ps = c.particles_in_column(x);
            for u in column_range(c.n, x) {
                let above = ps.iter().filter(|&&v| v > u).count() as i64;
                values.insert(Face::new(x, u), -above);
            }
        }
        HeightFunction { values }
    }
}

fn in_reference(e: &EdgeKey) -> bool {
    e.black.x == e.white.x + 1 && e.black.u == e.white.u
}

/// Dimer height with respect to the reference matching `M₀` of all edges
/// `w(X,U) - b(X+1,U)`: crossing `F → F'` with the white vertex on the right
/// adds `1[e ∈ M] - 1[e ∈ M₀]`. Faces are those above tower vertices,
/// normalised by `H(0,0) = 0`.
pub fn height_function(m: &Matching) -> Result<HeightFunction> {
    m.check_perfect()?;
    let n = m.n as i64;
    let faces: BTreeSet<Face> = (0..=3 * n)
        .flat_map(|x| column_range(m.n, x).map(move |u| Face::new(x, u)))
        .collect();
    let mut adj: BTreeMap<Face, Vec<(Face, i64)>> = BTreeMap::new();
    for x in -1..=3 * n + 1 {
        if x.rem_euclid(3) == 2 {
            continue;
        }
        for u in -2 * n - 3..=n + 1 {
            let w = LatticeCoord::new(x, u);
            for b in neighbours(w, Color::White) {
                let key = EdgeKey { white: w, black: b };
                let (f, fp) = dual_crossing(key).expect("lattice edge");
                if !faces.contains(&f) || !faces.contains(&fp) {
                    continue;
                }
                let inc = m.contains(&key) as i64 - in_reference(&key) as i64;
                adj.entry(f).or_default().push((fp, inc));
                adj.entry(fp).or_default().push((f, -inc));
            }
        }
    }
    let origin = Face::new(0, 0);
    let mut values = BTreeMap::new();
    values.insert(origin, 0i64);
    let mut queue = VecDeque::from([origin]);
    while let Some(f) = queue.pop_front() {
        let h = values[&f];
        for &(g, inc) in adj.get(&f).map(|v| v.as_slice()).unwrap_or(&[]) {
            match values.get(&g) {
                None => {
                    values.insert(g, h + inc);
                    queue.push_back(g);
                }
                Some(&hg) if hg != h + inc => {
                    return Err(Error::InconsistentIncrements(format!("{f:?} -> {g:?}")));
                }
                _ => {}
            }
        }
    }
    Ok(HeightFunction { values })
}

/// Exponents `(a, b)` with unnormalised weight `α^a β^b`, from the
/// partitions `λ_i = x_i + i`, `μ_i = y_i + i`, `ν_i = z_i + i`.
pub fn config_weight(c: &Configuration) -> (i64, i64) {
    let size = |v: &[i64]| v.iter().enumerate().map(|(i, &p)| p + i as i64 + 1).sum::<i64>();
    let n = c.n;
    let (mut a, mut b) = (0, 0);
    for k in 1..=n {
        let lv = c.level(k);
        a += size(&lv.y) - size(&lv.z);
        b += size(&lv.x) - size(&c.level(k + 1).z);
    }
    (a, b)
}
