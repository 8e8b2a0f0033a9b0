use std::f64::consts::PI;

use num_rational::BigRational;
use proptest::prelude::*;
use tower_dimers::kasteleyn::{build_matrix, inverse};
use tower_dimers::kernels::{
    fundamental_edges, gibbs_edge_probability, gibbs_kernel, phi, probe_edges, probe_probabilities_closed_form,
    w_of_z, CharPoly, FiniteKernel, GibbsPoint, C64,
};
use tower_dimers::lattice::{build_tower, in_tower, parse_rational, rational_to_f64, Color, LatticeCoord};

fn q(s: &str) -> BigRational {
    parse_rational(s).unwrap()
}

#[test]
fn finite_kernel_is_the_inverse() {
    for n in 1..=3u32 {
        for (a, b) in [("1", "1"), ("2", "1/2")] {
            let g = build_tower(n, &q(a), &q(b)).unwrap();
            let inv = inverse(&build_matrix(&g)).unwrap();
            let fk = FiniteKernel::new(n, rational_to_f64(&g.alpha), rational_to_f64(&g.beta)).unwrap();
            let mut worst: f64 = 0.0;
            for (j, &blk) in g.blacks.iter().enumerate() {
                let col = fk.column(blk, &g.whites).unwrap();
                for (i, kv) in col.iter().enumerate() {
                    let want = rational_to_f64(inv.get(i, j));
                    worst = worst.max((kv.value - want).norm());
                }
            }
            assert!(worst < 1e-8, "N={n} ({a},{b}) error {worst}");
        }
    }
}

#[test]
fn kernel_vanishes_on_the_boundary() {
    for n in 1..=3u32 {
        for (a, b) in [("1", "1"), ("2", "1/2")] {
            let g = build_tower(n, &q(a), &q(b)).unwrap();
            let fk = FiniteKernel::new(n, rational_to_f64(&g.alpha), rational_to_f64(&g.beta)).unwrap();
            let ni = n as i64;
            let mut points = Vec::new();
            for x in 0..=3 * ni {
                let (k, m) = LatticeCoord::new(x, 0).k_m();
                points.push(LatticeCoord::new(x, ni - k + 1));
                if m == 2 {
                    points.push(LatticeCoord::new(x, -2 * k));
                }
                if m == 3 {
                    points.push(LatticeCoord::new(x, -2 * k + 1));
                }
            }
            for p in &points {
                assert!(!in_tower(n, *p) || !g.contains(*p, Color::White), "{p} is inside");
            }
            for &blk in &g.blacks {
                for kv in fk.column(blk, &points).unwrap() {
                    assert!(kv.value.norm() < 1e-10, "N={n} b{blk}: {}", kv.value);
                }
            }
        }
    }
}

#[test]
fn phi_matches_its_definition() {
    let z = C64::new(0.7, -1.3);
    let (a, b) = (2.0, 0.5);
    // X = 4 = 3·2 − 2, so t = 2, m = 2
    let direct = (1.0 + b * z).powi(5 - 2 + 1) * (1.0 - 1.0 / z).powi(1) * (1.0 - a / z).powi(2);
    assert!((phi(4, 5, z, a, b).unwrap() - direct).norm() < 1e-13);
}

fn pick_liquid() -> impl Strategy<Value = (f64, f64, f64, f64)> {
    (-3.0f64..3.0, 0.05f64..3.0, 0.2f64..4.0, 0.2f64..4.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn w_lies_on_the_spectral_curve((re, im, a, b) in pick_liquid()) {
        let z = C64::new(re, im);
        let w = w_of_z(z, a, b).unwrap();
        let p = CharPoly::new(a, b).unwrap().p(z, w);
        prop_assert!(p.norm() < 1e-12 * (1.0 + w.norm()) * (1.0 + z.norm()));
    }

    #[test]
    fn gibbs_quadrature_matches_closed_forms((re, im, a, b) in pick_liquid()) {
        let gp = GibbsPoint::new(C64::new(re, im), a, b).unwrap();
        let closed = probe_probabilities_closed_form(&gp);
        for (e, want) in probe_edges(0, 0).iter().zip(closed) {
            let p = gibbs_edge_probability(&gp, *e).unwrap();
            prop_assert!((p.re - want).abs() < 1e-8 && p.im.abs() < 1e-8, "{}: {} vs {}", e, p, want);
        }
    }

    #[test]
    fn gibbs_probabilities_sum_to_one((re, im, a, b) in pick_liquid()) {
        let gp = GibbsPoint::new(C64::new(re, im), a, b).unwrap();
        let edges = fundamental_edges();
        for w in [LatticeCoord::new(0, 0), LatticeCoord::new(1, 0)] {
            let s: C64 = edges.iter().filter(|e| e.white == w).map(|e| gibbs_edge_probability(&gp, *e).unwrap()).sum();
            prop_assert!((s - 1.0).norm() < 1e-9, "{}", s);
            for e in edges.iter().filter(|e| e.white == w) {
                let p = gibbs_edge_probability(&gp, *e).unwrap().re;
                prop_assert!((-1e-9..=1.0 + 1e-9).contains(&p));
            }
        }
    }

    #[test]
    fn frozen_measures_are_deterministic(a in 0.2f64..4.0, b in 0.2f64..4.0, s in 0.1f64..0.9) {
        let (lo, hi) = (a.min(1.0), a.max(1.0));
        let nb = -1.0 / b;
        let mut picks = vec![nb - 1.0 - 3.0 * s, nb * (1.0 - s), s * lo, hi + 2.0 * s];
        if hi - lo > 1e-3 {
            picks.push(lo + s * (hi - lo));
        }
        for x0 in picks {
            let gp = GibbsPoint::new(C64::new(x0, 0.0), a, b).unwrap();
            for e in fundamental_edges() {
                let p = gibbs_edge_probability(&gp, e).unwrap();
                prop_assert!(p.im.abs() < 1e-10 && (p.re.abs() < 1e-10 || (p.re - 1.0).abs() < 1e-10),
                    "x0={} {}: {}", x0, e, p);
            }
        }
    }
}

#[test]
fn kernel_entry_gives_the_current() {
    let gp = GibbsPoint::new(C64::new(0.4, 0.9), 1.5, 0.5).unwrap();
    let k = gibbs_kernel(&gp, LatticeCoord::new(0, 0), LatticeCoord::new(-1, 1)).unwrap();
    let want = (1.0 + 0.5 * gp.z0).arg() / PI;
    assert!((0.5 * k.re - want).abs() < 1e-10, "{k}");
}

#[test]
fn rejects_bad_points() {
    assert!(GibbsPoint::new(C64::new(0.0, -1.0), 1.0, 1.0).is_err());
    assert!(GibbsPoint::new(C64::new(1.0, 0.0), 1.0, 1.0).is_err());
    assert!(FiniteKernel::new(0, 1.0, 1.0).is_err());
    assert!(FiniteKernel::new(2, -1.0, 1.0).is_err());
}
