//! Exact Kasteleyn linear algebra over the rationals and the brute-force
//! matching enumerator.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::interlacing::Matching;
use crate::lattice::{EdgeKey, TowerGraph};

pub const ENUMERATION_LIMIT: u32 = 4;

/// Rows indexed by the graph's black vertices, columns by its white
/// vertices, both in lexicographic `(X, U)` order.
#[derive(Debug, Clone, PartialEq)]
pub struct KasteleynMatrix {
    pub entries: Vec<Vec<BigRational>>,
}

impl KasteleynMatrix {
    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, black: usize, white: usize) -> &BigRational {
        &self.entries[black][white]
    }
}

pub fn build_matrix(g: &TowerGraph) -> KasteleynMatrix {
    let n = g.blacks.len();
    let mut entries = vec![vec![BigRational::zero(); g.whites.len()]; n];
    for e in &g.edges {
        let b = g.black_idx(e.black).expect("edge endpoints are graph vertices");
        let w = g.white_idx(e.white).expect("edge endpoints are graph vertices");
        entries[b][w] = e.entry();
    }
    KasteleynMatrix { entries }
}

/// Determinant by Bareiss fraction-free elimination after clearing the
/// denominators of each row.
pub fn determinant(m: &[Vec<BigRational>]) -> BigRational {
    let n = m.len();
    if n == 0 {
        return BigRational::one();
    }
    let mut scale = BigInt::one();
    let mut a: Vec<Vec<BigInt>> = m
        .iter()
        .map(|row| {
            let l = row.iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
            scale *= &l;
            row.iter().map(|r| r.numer() * (&l / r.denom())).collect()
        })
        .collect();
    let mut sign = 1i32;
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(p) => {
                    a.swap(k, p);
                    sign = -sign;
                }
                None => return BigRational::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    let det = BigRational::new(a[n - 1][n - 1].clone() * sign, scale);
    det
}

/// Exact inverse by Gauss-Jordan elimination over the rationals.
pub fn invert(m: &[Vec<BigRational>]) -> Result<Vec<Vec<BigRational>>> {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m.to_vec();
    let mut inv: Vec<Vec<BigRational>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect())
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero()).ok_or(Error::Singular)?;
        a.swap(col, piv);
        inv.swap(col, piv);
        let p = a[col][col].clone();
        for j in 0..n {
            a[col][j] /= &p;
            inv[col][j] /= &p;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in 0..n {
                let t = &f * &a[col][j];
                a[r][j] -= t;
                let t = &f * &inv[col][j];
                inv[r][j] -= t;
            }
        }
    }
    Ok(inv)
}

pub fn partition_function(g: &TowerGraph) -> BigRational {
    determinant(&build_matrix(g).entries).abs()
}

/// `K⁻¹` indexed `[white][black]` in the graph's vertex order.
#[derive(Debug, Clone)]
pub struct ExactInverse {
    pub entries: Vec<Vec<BigRational>>,
}

pub fn inverse(k: &KasteleynMatrix) -> Result<ExactInverse> {
    Ok(ExactInverse { entries: invert(&k.entries)? })
}

impl ExactInverse {
    pub fn get(&self, white: usize, black: usize) -> &BigRational {
        &self.entries[white][black]
    }

    /// Probability that all `edges` belong to the random matching:
    /// `Π K(bᵢ,wᵢ) · det[K⁻¹(wᵢ,bⱼ)]`.
    pub fn edge_probability(&self, g: &TowerGraph, edges: &[EdgeKey]) -> Result<BigRational> {
        let mut prod = BigRational::one();
        let mut idx = Vec::with_capacity(edges.len());
        for e in edges {
            let edge = g.edge(*e).ok_or_else(|| Error::EdgeNotInGraph(e.to_string()))?;
            prod *= edge.entry();
            idx.push((g.white_idx(e.white).unwrap(), g.black_idx(e.black).unwrap()));
        }
        for i in 0..idx.len() {
            for j in 0..i {
                if idx[i] == idx[j] {
                    return Err(Error::InvalidParameter(format!("edge {} listed twice", edges[i])));
                }
            }
        }
        let sub: Vec<Vec<BigRational>> =
            idx.iter().map(|&(wi, _)| idx.iter().map(|&(_, bj)| self.entries[wi][bj].clone()).collect()).collect();
        Ok(prod * determinant(&sub))
    }
}

pub fn edge_probabilities(g: &TowerGraph, edges: &[EdgeKey]) -> Result<BigRational> {
    inverse(&build_matrix(g))?.edge_probability(g, edges)
}

/// Visit every perfect matching with its weight, backtracking over black
/// vertices in lexicographic order.
pub fn for_each_matching<F: FnMut(&[EdgeKey], &BigRational)>(g: &TowerGraph, mut visit: F) {
    let nbrs: Vec<Vec<(usize, EdgeKey, BigRational)>> = g
        .blacks
        .iter()
        .map(|&b| {
            g.edges_at(b, crate::lattice::Color::Black)
                .into_iter()
                .map(|e| (g.white_idx(e.white).unwrap(), e.key(), e.weight.clone()))
                .collect()
        })
        .collect();
    let mut used = vec![false; g.whites.len()];
    let mut chosen = Vec::with_capacity(g.blacks.len());
    let mut weights = vec![BigRational::one()];

    fn rec<F: FnMut(&[EdgeKey], &BigRational)>(
        i: usize,
        nbrs: &[Vec<(usize, EdgeKey, BigRational)>],
        used: &mut [bool],
        chosen: &mut Vec<EdgeKey>,
        weights: &mut Vec<BigRational>,
        visit: &mut F,
    ) {
        if i == nbrs.len() {
            visit(chosen, weights.last().unwrap());
            return;
        }
        for (wi, key, w) in &nbrs[i] {
            if used[*wi] {
                continue;
            }
            used[*wi] = true;
            chosen.push(*key);
            let next = weights.last().unwrap() * w;
            weights.push(next);
            rec(i + 1, nbrs, used, chosen, weights, visit);
            weights.pop();
            chosen.pop();
            used[*wi] = false;
        }
    }
    rec(0, &nbrs, &mut used, &mut chosen, &mut weights, &mut visit);
}

pub fn enumerate_matchings(g: &TowerGraph) -> Result<Vec<(Matching, BigRational)>> {
    if g.n > ENUMERATION_LIMIT {
        return Err(Error::SizeGuard { n: g.n, max: ENUMERATION_LIMIT });
    }
    let mut out = Vec::new();
    for_each_matching(g, |edges, w| out.push((Matching::new(g.n, edges.to_vec()), w.clone())));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_tower;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn small_determinants() {
        let m = vec![vec![q(1, 2), q(1, 3)], vec![q(2, 1), q(-1, 1)]];
        assert_eq!(determinant(&m), q(-1, 2) - q(2, 3));
        let z = vec![vec![q(1, 1), q(2, 1)], vec![q(2, 1), q(4, 1)]];
        assert_eq!(determinant(&z), q(0, 1));
        assert!(invert(&z).is_err());
    }

    #[test]
    fn pivoting_needed() {
        let m = vec![
            vec![q(0, 1), q(1, 1), q(0, 1)],
            vec![q(1, 1), q(0, 1), q(0, 1)],
            vec![q(0, 1), q(0, 1), q(3, 7)],
        ];
        assert_eq!(determinant(&m), q(-3, 7));
    }

    #[test]
    fn size_one_matrix() {
        let g = build_tower(1, &q(1, 1), &q(1, 1)).unwrap();
        let k = build_matrix(&g);
        assert_eq!(k.dim(), 5);
        assert_eq!(partition_function(&g), q(4, 1));
    }

    #[test]
    fn guard() {
        let g = build_tower(5, &q(1, 1), &q(1, 1)).unwrap();
        assert!(matches!(enumerate_matchings(&g), Err(Error::SizeGuard { .. })));
    }
}
