//! Closed-form geometry against finite-difference oracles.

mod common;

use common::{families, interior_points};
use geonoise_core::manifold::{families as closed, numeric};
use geonoise_core::{Family, LocalPoint, ManifoldSpec};
use nalgebra::Matrix3;
use proptest::prelude::*;

#[test]
fn jacobian_matches_central_differences() {
    for (name, m) in families() {
        for u in interior_points(&m, 100, 11) {
            let j = m.jacobian(&u).unwrap();
            let fd = numeric::jacobian_fd(&m, &u, 1e-6).unwrap();
            let err = (j - fd).abs().max();
            assert!(err < 1e-6, "{name} at {u:?}: {err:e}");
        }
    }
}

#[test]
fn induced_metric_identity() {
    for (name, m) in families() {
        for u in m.sample_local_uniform(100, 12).unwrap() {
            let g = m.metric(&u).unwrap().g;
            let j = m.jacobian(&u).unwrap();
            let err = (g - j.transpose() * j).abs().max();
            assert!(err <= 1e-9, "{name} at {u:?}: {err:e}");
            assert_eq!(g, g.transpose());
            assert!(m.metric(&u).unwrap().eigenvalues().0 > 0.0);
        }
    }
}

#[test]
fn projector_algebra() {
    for (name, m) in families() {
        for u in m.sample_local_uniform(100, 13).unwrap() {
            let p = m.projection_matrix(&u).unwrap();
            let j = m.jacobian(&u).unwrap();
            let n = m.unit_normal(&u).unwrap();
            assert!((p - p.transpose()).abs().max() <= 1e-12, "{name}");
            assert!((p * p - p).abs().max() <= 1e-10, "{name}");
            assert!((p * j - j).abs().max() <= 1e-9, "{name}");
            assert!((p * n).abs().max() <= 1e-9, "{name}");
            assert!((p.trace() - 2.0).abs() <= 1e-12, "{name}");
            assert!((n.norm() - 1.0).abs() <= 1e-12);
            assert!(n.dot(&j.column(0)).abs() <= 1e-9 && n.dot(&j.column(1)).abs() <= 1e-9);
            // P = J g⁻¹ Jᵀ
            let ginv = m.metric(&u).unwrap().inverse().unwrap();
            let alt: Matrix3<f64> = j * ginv * j.transpose();
            assert!((p - alt).abs().max() <= 1e-9, "{name}");
        }
    }
}

#[test]
fn outward_normals_on_closed_surfaces() {
    let s = ManifoldSpec::spheroid(1.0, 0.5).unwrap();
    let t = ManifoldSpec::torus(2.0, 1.0).unwrap();
    for u in s.sample_local_uniform(50, 3).unwrap() {
        let x = s.chart_embed(&u).unwrap();
        assert!(s.unit_normal(&u).unwrap().dot(&x) > 0.0);
    }
    for u in t.sample_local_uniform(50, 3).unwrap() {
        let x = t.chart_embed(&u).unwrap();
        let core = nalgebra::Vector3::new(x[0], x[1], 0.0).normalize() * 2.0;
        assert!(t.unit_normal(&u).unwrap().dot(&(x - core)) > 0.0);
    }
}

#[test]
fn christoffel_closed_form_matches_metric_differences() {
    for (name, m) in families() {
        for u in interior_points(&m, 100, 14) {
            let gamma = m.christoffel(&u).unwrap();
            let fd = numeric::christoffel_from_metric(&m, &u, numeric::default_step(&u)).unwrap();
            let err = gamma.max_abs_diff(&fd);
            assert!(err <= 1e-5, "{name} at {u:?}: {err:e}");
            for k in 0..2 {
                assert_eq!(gamma.get(k, 0, 1), gamma.get(k, 1, 0));
                assert!((fd.get(k, 0, 1) - fd.get(k, 1, 0)).abs() <= 1e-8);
            }
        }
    }
}

#[test]
fn drift_closed_form_matches_generic_formula() {
    for (name, m) in families() {
        for u in interior_points(&m, 100, 15) {
            let d = m.bm_drift(&u).unwrap();
            let fd = numeric::drift_from_metric(&m, &u, 1e-6).unwrap();
            let err = (d - fd).abs().max();
            assert!(err <= 1e-6, "{name} at {u:?}: {d:?} vs {fd:?} ({err:e})");
        }
    }
}

#[test]
fn disc_height_derivatives() {
    let (a, b, c, d) = (0.5, 2.0, -1.0, 2.0);
    let z = |r: f64| closed::disc_profile(a, b, c, d, r).z;
    let dz = |r: f64| closed::disc_profile(a, b, c, d, r).dz;
    let h = 1e-6;
    for i in 0..200 {
        let r = d * (0.05 + 0.4 * (i as f64 + 0.5) / 200.0);
        let p = closed::disc_profile(a, b, c, d, r);
        assert!((p.dz - (z(r + h) - z(r - h)) / (2.0 * h)).abs() < 1e-5);
        assert!((p.d2z - (dz(r + h) - dz(r - h)) / (2.0 * h)).abs() < 1e-5);
    }
}

#[test]
fn spheroid_christoffel_example_against_finite_differences() {
    let m = ManifoldSpec::spheroid(1.0, 2.0).unwrap();
    for u in interior_points(&m, 20, 99) {
        let fd = numeric::christoffel_from_metric(&m, &u, numeric::default_step(&u)).unwrap();
        assert!(m.christoffel(&u).unwrap().max_abs_diff(&fd) < 1e-5);
    }
    assert!(matches!(m.family, Family::Spheroid { .. }));
}

proptest! {
    #[test]
    fn pushforward_of_pullback_recovers_tangent_vector(
        u1 in 0.3f64..2.8, u2 in 0.0f64..6.28,
        e0 in -1.0f64..1.0, e1 in -1.0f64..1.0, e2 in -1.0f64..1.0,
    ) {
        let m = ManifoldSpec::spheroid(1.3, 0.7).unwrap();
        let u = LocalPoint::new(u1, u2);
        let p = m.projection_matrix(&u).unwrap();
        let eps_t = p * nalgebra::Vector3::new(e0, e1, e2);
        let tv = geonoise_core::TangentVector { base: m.chart_embed(&u).unwrap(), v: eps_t };
        let w = geonoise_core::noise::pullback_velocity(&m, &u, &tv).unwrap();
        let j = m.jacobian(&u).unwrap();
        prop_assert!((j * w - eps_t).norm() <= 1e-9);
        // g-norm of w is the ambient norm of ε_⊤.
        prop_assert!((m.metric(&u).unwrap().norm(&w) - eps_t.norm()).abs() <= 1e-9);
    }

    #[test]
    fn torus_projector_is_idempotent(u1 in -10.0f64..10.0, u2 in -10.0f64..10.0, c in 0.1f64..0.95) {
        let m = ManifoldSpec::torus(1.0, c).unwrap();
        let p = m.projection_matrix(&LocalPoint::new(u1, u2)).unwrap();
        prop_assert!((p * p - p).abs().max() <= 1e-10);
    }
}
