use std::f64::consts::PI;

use proptest::prelude::*;
use tower_dimers::kernels::{gibbs_edge_probability, probe_edges, GibbsPoint, C64};
use tower_dimers::limitshape::*;

/// A point of the rescaled tower from two unit parameters.
fn tower_point(a: f64, s: f64) -> (f64, f64) {
    (a, -2.0 * a + s * (1.0 + a))
}

fn liquid_uniform() -> impl Strategy<Value = (f64, f64)> {
    (0.02f64..0.98, 0.02f64..0.98)
        .prop_map(|(a, s)| tower_point(a, s))
        .prop_filter("liquid", |&(x, u)| uniform_discriminant(x, u) < -1e-4)
}

fn upper_half() -> impl Strategy<Value = C64> {
    (-4.0f64..4.0, 0.01f64..4.0).prop_map(|(re, im)| C64::new(re, im))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn cubic_roots_are_critical_points(a in 0.01f64..1.0, s in 0.01f64..1.0, al in 0.2f64..4.0, be in 0.2f64..4.0) {
        let (x, u) = tower_point(a, s);
        prop_assume!(u < 1.0 - x - 1e-3);
        let act = Action::new(al, be, x, u);
        let roots = cubic_roots(&critical_cubic_coeffs(x, u, al, be));
        prop_assert_eq!(roots.len(), 3);
        let poles = [0.0, 1.0, al, -1.0 / be];
        for z in roots.into_iter().filter(|z| poles.iter().all(|p| (z - p).norm() > 1e-6)) {
            // derivative of S by central differences, independent of `ds`
            let h = 1e-5 * (1.0 + z.norm());
            let num = (act.s(z + h) - act.s(z - h)) / (2.0 * h);
            let off_cut = z.im.abs() > 1e-3;
            // size of the individual terms of ∂S, which cancel at a root
            let scale = x * ((1.0 / (z * (z - 1.0))).norm() + (al / (z * (z - al))).norm())
                + (u / z).norm()
                + (1.0 - x) * (be / (1.0 + be * z)).norm();
            prop_assert!(act.ds(z).norm() < 1e-10 * scale.max(1.0), "{} at {}", act.ds(z).norm(), z);
            if off_cut {
                prop_assert!(num.norm() < 1e-6, "{}", num);
            }
        }
    }

    #[test]
    fn uniform_closed_form_agrees((x, u) in liquid_uniform()) {
        let zu = z_uniform(x, u).unwrap();
        let zc = critical_point(x, u, 1.0, 1.0).unwrap();
        let act = Action::new(1.0, 1.0, x, u);
        prop_assert!(zu.im > 0.0);
        prop_assert!(act.ds(zu).norm() < 1e-12, "{}", act.ds(zu).norm());
        prop_assert!(act.ds(zc).norm() < 1e-10);
        prop_assert!((zu - zc).norm() < 1e-10, "{} vs {}", zu, zc);
        prop_assert_eq!(classify(x, u, 1.0, 1.0).unwrap(), RegionLabel::Liquid);
    }

    #[test]
    fn characteristics_hold(a in 0.02f64..0.98, s in 0.02f64..0.98, al in 0.3f64..3.0, be in 0.3f64..3.0) {
        let (x, u) = tower_point(a, s);
        prop_assume!(classify(x, u, al, be).unwrap() == RegionLabel::Liquid);
        let z = critical_point(x, u, al, be).unwrap();
        prop_assert!(characteristics_residual(z, x, u, al, be).unwrap() < 1e-8);
    }

    #[test]
    fn slopes_sit_in_the_newton_polygon(z in upper_half(), al in 0.2f64..4.0, be in 0.2f64..4.0) {
        let gp = GibbsPoint::new(z, al, be).unwrap();
        let (s, t) = slopes_of(&gp);
        prop_assert!(in_newton_polygon(s, t, 1e-12), "({}, {})", s, t);
        prop_assert!(slope_reconciliation(&gp) < 1e-12);
        for r in law_of_sines_residuals(&gp) {
            prop_assert!(r < 1e-12, "{}", r);
        }
    }

    #[test]
    fn current_is_harmonic(z in upper_half(), be in prop::sample::select(vec![0.5, 1.0, 3.0])) {
        let gp = GibbsPoint::new(z, 1.0, be).unwrap();
        let r = 0.5 * z.im.min(0.02);
        prop_assert!((current_circle_mean(&gp, r, 64) - current(&gp)).abs() < 1e-6);
        let p1 = gibbs_edge_probability(&gp, probe_edges(0, 0)[0]).unwrap();
        prop_assert!((current(&gp) + p1.re).abs() < 1e-8);
    }

    #[test]
    fn hydrodynamic_identity(a in 0.05f64..0.95, s in 0.05f64..0.95, tau in 0.5f64..4.0) {
        let (xi, eta) = tower_point(a, s);
        prop_assume!(-uniform_discriminant(xi, eta) >= HYDRO_GUARD);
        let r = hydro_residual(xi * tau, eta * tau, tau, 1e-5).unwrap();
        prop_assert!(r < 1e-6, "{}", r);
    }

    #[test]
    fn height_slope_is_t((x, u) in liquid_uniform()) {
        prop_assume!(uniform_discriminant(x, u) < -0.05);
        let h = 1e-5;
        let d = (limit_height(x, u + h, 1.0).unwrap() - limit_height(x, u - h, 1.0).unwrap()) / (2.0 * h);
        let gp = GibbsPoint::new(z_uniform(x, u).unwrap(), 1.0, 1.0).unwrap();
        prop_assert!((d - slopes_of(&gp).1).abs() < 1e-6, "{} vs {}", d, slopes_of(&gp).1);
    }
}

#[test]
fn uniform_cubic_has_root_one() {
    for (x, u) in [(0.2, 0.1), (0.5, -0.5), (0.9, -1.0)] {
        let c = critical_cubic_coeffs(x, u, 1.0, 1.0);
        assert!(c.iter().sum::<f64>().abs() < 1e-15);
    }
}

#[test]
fn corner_is_frozen_with_real_roots() {
    let (x, u) = (5e-4, 1.0 - 1e-3);
    assert!(matches!(classify(x, u, 1.0, 1.0).unwrap(), RegionLabel::Frozen(_)));
    let roots = cubic_roots(&critical_cubic_coeffs(x, u, 1.0, 1.0));
    assert!(roots.iter().all(|z| z.im == 0.0));
    assert!(cubic_discriminant(&critical_cubic_coeffs(x, u, 1.0, 1.0)) > 0.0);
    assert!(critical_point(x, u, 1.0, 1.0).unwrap().im == 0.0);
}

#[test]
fn outside_the_tower_is_rejected() {
    assert!(classify(0.5, 0.6, 1.0, 1.0).is_err());
    assert!(z_uniform(-0.1, 0.0).is_err());
    assert!(limit_height(0.5, 0.0, 0.0).is_err());
    assert!(arctic_curve(1.0, 1.0, 8).is_err());
}

#[test]
fn height_vanishes_at_the_top_and_grows_with_u() {
    assert_eq!(limit_height(0.05, 0.9, 1.0).unwrap(), 0.0);
    let x = 0.4;
    let mut prev = f64::NEG_INFINITY;
    for i in 0..=40 {
        let u = -2.0 * x + (1.0 + x) * i as f64 / 40.0;
        let h = limit_height(x, u, 1.0).unwrap();
        assert!(h >= prev - 1e-12, "u={u}: {h} < {prev}");
        prev = h;
    }
    assert!(prev.abs() < 1e-12);
    // on the bottom edge every level below is frozen at arg = π, so h = −(height of the column above)
    let bottom = limit_height(0.3, -0.6, 1.0).unwrap();
    assert!(bottom < 0.0 && bottom > -1.3);
}

#[test]
fn hydro_residual_is_second_order() {
    let (x, u) = (0.45, -0.2);
    let r: Vec<f64> = [4e-3, 2e-3, 1e-3].iter().map(|&h| hydro_residual(x, u, 1.0, h).unwrap()).collect();
    for w in r.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 2.0).abs() < 0.2, "{r:?}");
    }
    assert!(matches!(hydro_residual(0.5, -0.95, 1.0, 1e-5), Err(tower_dimers::Error::TooCloseToArctic(_))));
}

#[test]
fn uniform_arctic_curve_is_the_discriminant_locus() {
    let c = arctic_curve(1.0, 1.0, 64).unwrap();
    assert!(c.points.len() > 100);
    for &(x, u) in &c.points {
        assert!(in_domain(x, u));
        assert!(uniform_discriminant(x, u).abs() < 1e-8, "({x}, {u})");
    }
}

#[test]
fn classification_flips_across_the_curve() {
    for (a, b) in [(1.0, 1.0), (2.0, 0.5), (1.0 / 3.0, 3.0)] {
        let c = arctic_curve(a, b, 48).unwrap();
        assert!(!c.points.is_empty());
        // the curve touches the edges of the tower; no two-sided probe exists there
        let interior = |&&(x, u): &&(f64, f64)| x > 1e-4 && x < 1.0 - 1e-4 && u > -2.0 * x + 1e-4 && u < 1.0 - x - 1e-4;
        for &(x, u) in c.points.iter().filter(interior) {
            let d = 1e-6;
            let probe = |dx: f64, du: f64| {
                let (p, q) = (x + dx, u + du);
                in_domain(p, q).then(|| classify(p, q, a, b).unwrap() == RegionLabel::Liquid)
            };
            let flips = [(d, 0.0), (0.0, d)].iter().any(|&(dx, du)| match (probe(dx, du), probe(-dx, -du)) {
                (Some(s), Some(t)) => s != t,
                _ => false,
            });
            assert!(flips, "({a},{b}) at ({x}, {u})");
        }
    }
}

#[test]
fn current_special_values() {
    let gp = GibbsPoint::new(C64::i(), 1.0, 1.0).unwrap();
    assert!((current(&gp) + 0.25).abs() < 1e-15);
    let pos = GibbsPoint::new(C64::new(0.5, 0.0), 2.0, 1.0).unwrap();
    assert_eq!(current(&pos), 0.0);
    assert!((current(&gp) - (-(1.0f64).atan2(1.0) / PI)).abs() < 1e-15);
}

#[test]
fn slopes_are_continuous_along_a_liquid_path() {
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=200 {
        let x = 0.3 + 0.4 * i as f64 / 200.0;
        let z = critical_point(x, -0.3, 1.0, 1.0).unwrap();
        let st = slopes_of(&GibbsPoint::new(z, 1.0, 1.0).unwrap());
        if let Some(p) = prev {
            assert!((st.0 - p.0).abs() < 0.02 && (st.1 - p.1).abs() < 0.02);
        }
        prev = Some(st);
    }
}

#[test]
fn frozen_slopes_are_integers() {
    for (x, u) in [(5e-4, 1.0 - 1e-3), (0.05, 0.9), (0.8, -1.5), (0.98, -0.5)] {
        if let RegionLabel::Frozen(_) = classify(x, u, 1.0, 1.0).unwrap() {
            let z = critical_point(x, u, 1.0, 1.0).unwrap();
            let (s, t) = slopes_of(&GibbsPoint::new(z, 1.0, 1.0).unwrap());
            assert!((s - s.round()).abs() < 1e-12 && (t - t.round()).abs() < 1e-12);
        } else {
            panic!("({x}, {u}) is expected to be frozen");
        }
    }
}
