use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use tower_dimers::interlacing::{arrays_to_matching, config_weight, height_function, matching_to_arrays, HeightFunction};
use tower_dimers::kasteleyn::{build_matrix, enumerate_matchings, inverse, partition_function};
use tower_dimers::lattice::{build_tower, face_sign, parse_rational, Color, TowerGraph};

fn params() -> Vec<(BigRational, BigRational)> {
    [("1", "1"), ("2", "1/2"), ("1/3", "3")]
        .iter()
        .map(|(a, b)| (parse_rational(a).unwrap(), parse_rational(b).unwrap()))
        .collect()
}

fn pow(base: &BigRational, e: i64) -> BigRational {
    let mut r = BigRational::one();
    for _ in 0..e.abs() {
        r *= base;
    }
    if e < 0 {
        r.recip()
    } else {
        r
    }
}

fn towers() -> Vec<TowerGraph> {
    let mut out = Vec::new();
    for n in 1..=3 {
        for (a, b) in params() {
            out.push(build_tower(n, &a, &b).unwrap());
        }
    }
    out
}

#[test]
fn determinant_equals_matching_sum() {
    for g in towers() {
        let list = enumerate_matchings(&g).unwrap();
        let total: BigRational = list.iter().map(|(_, w)| w.clone()).sum();
        assert_eq!(partition_function(&g).abs(), total, "N={} α={} β={}", g.n, g.alpha, g.beta);
        assert_eq!(list.len(), [4, 64, 4096][g.n as usize - 1]);
    }
}

#[test]
fn face_signs_are_kasteleyn() {
    for g in towers().into_iter().filter(|g| g.n == 3) {
        for f in g.inner_faces() {
            let (got, want) = face_sign(f);
            assert_eq!(got, want, "{f:?}");
        }
    }
}

#[test]
fn bijection_reproduces_weights() {
    for g in towers() {
        for (m, w) in enumerate_matchings(&g).unwrap() {
            let c = matching_to_arrays(&m).unwrap();
            c.validate().unwrap();
            assert_eq!(arrays_to_matching(&c, &g).unwrap(), m);
            let (a, b) = config_weight(&c);
            assert_eq!(pow(&g.alpha, a) * pow(&g.beta, b), w);
        }
    }
}

#[test]
fn heights_agree_with_particle_counts() {
    let one = BigRational::one();
    for n in 1..=3 {
        let g = build_tower(n, &one, &one).unwrap();
        for (m, _) in enumerate_matchings(&g).unwrap() {
            let h = height_function(&m).unwrap();
            let c = matching_to_arrays(&m).unwrap();
            let p = HeightFunction::from_particles(&c);
            let shift = p.get(tower_dimers::lattice::Face::new(0, 0)).unwrap();
            for (f, v) in &h.values {
                if let Some(q) = p.get(*f) {
                    assert_eq!(*v, q - shift, "{f:?}");
                }
            }
        }
    }
}

#[test]
fn edge_probabilities_match_enumeration() {
    for g in towers().into_iter().filter(|g| g.n <= 2) {
        let list = enumerate_matchings(&g).unwrap();
        let z: BigRational = list.iter().map(|(_, w)| w.clone()).sum();
        let mut freq: HashMap<_, BigRational> = HashMap::new();
        for (m, w) in &list {
            for e in &m.edges {
                *freq.entry(*e).or_insert_with(BigRational::zero) += w;
            }
        }
        let inv = inverse(&build_matrix(&g)).unwrap();
        for e in &g.edges {
            let want = freq.get(&e.key()).cloned().unwrap_or_else(BigRational::zero) / &z;
            assert_eq!(inv.edge_probability(&g, &[e.key()]).unwrap(), want, "{}", e.key());
        }
        for &w in &g.whites {
            let s: BigRational =
                g.edges_at(w, Color::White).iter().map(|e| inv.edge_probability(&g, &[e.key()]).unwrap()).sum();
            assert!(s.is_one(), "white {w}");
        }
        let pair: Vec<_> = list[0].0.edges.iter().take(2).copied().collect();
        let joint = list.iter().filter(|(m, _)| pair.iter().all(|e| m.contains(e))).map(|(_, w)| w.clone()).sum::<BigRational>() / &z;
        assert_eq!(inv.edge_probability(&g, &pair).unwrap(), joint);
    }
}
