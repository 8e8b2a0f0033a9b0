use proptest::prelude::*;
use tower_dimers::isoradial::*;
use tower_dimers::kernels::{GibbsPoint, C64};
use tower_dimers::lattice::Face;

const CAPTION_Z0: C64 = C64::new(0.9177956164184642, 0.7575595655669651);

fn liquid() -> impl Strategy<Value = GibbsPoint> {
    (-3.0f64..3.0, 0.05f64..3.0, 0.2f64..4.0, 0.2f64..4.0)
        .prop_map(|(re, im, a, b)| GibbsPoint::new(C64::new(re, im), a, b).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn faces_close(gp in liquid()) {
        let scale = 1.0 + gp.z0.norm().powi(3) * (1.0 + gp.w0().norm()) * (1.0 + gp.alpha) * (1.0 + gp.beta);
        prop_assert!(face_closure_residual(&gp) < 1e-12 * scale, "{}", face_closure_residual(&gp));
    }

    #[test]
    fn patches_are_periodic(gp in liquid()) {
        let e = embed_patch(&gp, -4..=4, -3..=3).unwrap();
        let (px, py) = e.periodicity_residual();
        let scale = 1.0 + e.vx.norm() + e.vy.norm();
        prop_assert!(px < 1e-12 * scale && py < 1e-12 * scale, "{} {}", px, py);
        prop_assert_eq!(e.positions[&Face::new(0, 0)], C64::new(0.0, 0.0));
    }

    #[test]
    fn conjugate_point_gives_conjugate_embedding(gp in liquid()) {
        let f = positions_at(gp.z0, gp.alpha, gp.beta, -3..=3, -2..=2).unwrap();
        let g = positions_at(gp.z0.conj(), gp.alpha, gp.beta, -3..=3, -2..=2).unwrap();
        prop_assert_eq!(f.len(), g.len());
        for (k, v) in &f {
            prop_assert!((g[k] - v.conj()).norm() < 1e-12 * (1.0 + v.norm()));
        }
    }

    #[test]
    fn every_vertex_gets_a_circle(gp in liquid()) {
        let r = isoradiality_report(&gp).unwrap();
        prop_assert_eq!(r.circles.len(), 4);
        prop_assert!(r.circles.iter().all(|c| c.radius.is_finite() && c.spread >= 0.0));
    }
}

#[test]
fn closure_needs_the_spectral_curve() {
    let gp = GibbsPoint::new(C64::new(0.3, 0.7), 1.5, 0.8).unwrap();
    let base = face_closure_residual(&gp);
    let off = face_closure_residual_with(gp.z0, gp.w0() + 0.1, gp.alpha, gp.beta);
    assert!(base < 1e-14 && off > 1e-3, "{base} {off}");
    let err = positions_with(gp.z0, gp.w0() + 0.1, gp.alpha, gp.beta, -3..=3, -2..=2).unwrap_err();
    assert!(err.to_string().contains("F(0, 0)"), "{err}");
}

#[test]
fn uniform_at_i() {
    let gp = GibbsPoint::new(C64::i(), 1.0, 1.0).unwrap();
    let (_, vy) = period_vectors(&gp);
    assert!((vy - C64::new(0.0, 2.0)).norm() < 1e-15);
    assert!(face_closure_residual(&gp) < 1e-12);
}

#[test]
fn caption_point_is_isoradial() {
    let gp = GibbsPoint::new(CAPTION_Z0, 1.0, 1.0).unwrap();
    let r = isoradiality_report(&gp).unwrap();
    assert!(r.max_spread < 1e-9, "{r:?}");
    assert!(r.radius_spread < 1e-6, "{r:?}");
    assert!(r.isoradial);
    assert!((r.common_radius - 0.456078838).abs() < 1e-8, "{}", r.common_radius);
}

#[test]
fn translation_shifts_by_period_vectors() {
    let gp = GibbsPoint::new(CAPTION_Z0, 1.0, 1.0).unwrap();
    let e = embed_patch(&gp, -3..=6, -3..=3).unwrap();
    let p = |x, u| e.positions[&Face::new(x, u)];
    assert!((p(3, -1) - p(0, 0) - e.vx).norm() < 1e-12);
    assert!((p(0, 1) - p(0, 0) - e.vy).norm() < 1e-12);
    let w0 = gp.w0();
    let z = gp.z0;
    assert!((e.vx - (w0 * z + (z - 1.0) + (z - 1.0))).norm() < 1e-15);
}

#[test]
fn embedding_round_trips_through_json() {
    let gp = GibbsPoint::new(CAPTION_Z0, 1.0, 1.0).unwrap();
    let e = embed_patch(&gp, -2..=2, -1..=1).unwrap();
    let back: DualEmbedding = serde_json::from_str(&serde_json::to_string(&e).unwrap()).unwrap();
    assert_eq!(back, e);
}

#[test]
fn real_points_are_rejected() {
    let gp = GibbsPoint::new(C64::new(-0.5, 0.0), 1.0, 1.0).unwrap();
    assert!(embed_patch(&gp, -1..=1, -1..=1).is_err());
}
