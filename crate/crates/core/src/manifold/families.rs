//! Closed-form geometry of the built-in surface families.
//!
//! Every function here is evaluated without domain checks; callers in
//! `manifold::mod` validate the point first.

use nalgebra::{Matrix2, Vector2, Vector3};

use super::{AmbientPoint, Christoffel, Jacobian, LocalPoint};

/// Height profile of the biconcave disc,
/// `z(r) = d·sqrt(1 − 4r²/d²)·(a + b r²/d² + c r⁴/d⁴)`, with its first two
/// derivatives in `r`.
#[derive(Debug, Clone, Copy)]
pub struct DiscProfile {
    pub z: f64,
    pub dz: f64,
    pub d2z: f64,
}

pub fn disc_profile(a: f64, b: f64, c: f64, d: f64, r: f64) -> DiscProfile {
    let d2 = d * d;
    let d4 = d2 * d2;
    let s = (1.0 - 4.0 * r * r / d2).sqrt();
    let ds = -4.0 * r / (d2 * s);
    let d2s = -4.0 / (d2 * s * s * s);
    let p = a + b * r * r / d2 + c * r.powi(4) / d4;
    let dp = 2.0 * b * r / d2 + 4.0 * c * r.powi(3) / d4;
    let d2p = 2.0 * b / d2 + 12.0 * c * r * r / d4;
    DiscProfile {
        z: d * s * p,
        dz: d * (ds * p + s * dp),
        d2z: d * (d2s * p + 2.0 * ds * dp + s * d2p),
    }
}

pub fn plane_embed(u: &LocalPoint) -> AmbientPoint {
    Vector3::new(u[0], u[1], 0.0)
}

pub fn plane_jacobian(_u: &LocalPoint) -> Jacobian {
    Jacobian::new(1.0, 0.0, 0.0, 1.0, 0.0, 0.0)
}

pub fn spheroid_embed(a: f64, c: f64, u: &LocalPoint) -> AmbientPoint {
    let (su, cu) = u[0].sin_cos();
    let (sv, cv) = u[1].sin_cos();
    Vector3::new(a * su * sv, a * su * cv, c * cu)
}

pub fn spheroid_jacobian(a: f64, c: f64, u: &LocalPoint) -> Jacobian {
    let (su, cu) = u[0].sin_cos();
    let (sv, cv) = u[1].sin_cos();
    Jacobian::from_columns(&[
        Vector3::new(a * cu * sv, a * cu * cv, -c * su),
        Vector3::new(a * su * cv, -a * su * sv, 0.0),
    ])
}

pub fn spheroid_metric(a: f64, c: f64, u: &LocalPoint) -> Matrix2<f64> {
    let (su, cu) = u[0].sin_cos();
    Matrix2::new(a * a * cu * cu + c * c * su * su, 0.0, 0.0, a * a * su * su)
}

pub fn spheroid_christoffel(a: f64, c: f64, u: &LocalPoint) -> Christoffel {
    let (su, cu) = u[0].sin_cos();
    let g11 = a * a * cu * cu + c * c * su * su;
    let mut gamma = Christoffel::zero();
    gamma.set(0, 0, 0, (c * c - a * a) * su * cu / g11);
    gamma.set(0, 1, 1, -a * a * su * cu / g11);
    gamma.set_sym(1, 0, 1, cu / su);
    gamma
}

pub fn spheroid_drift(a: f64, c: f64, u: &LocalPoint) -> Vector2<f64> {
    let (su, cu) = u[0].sin_cos();
    let g11 = a * a * cu * cu + c * c * su * su;
    Vector2::new(a * a * cu / (2.0 * su * g11 * g11), 0.0)
}

pub fn torus_embed(a: f64, c: f64, u: &LocalPoint) -> AmbientPoint {
    let (su, cu) = u[0].sin_cos();
    let (sv, cv) = u[1].sin_cos();
    let rad = a + c * su;
    Vector3::new(rad * sv, rad * cv, c * cu)
}

pub fn torus_jacobian(a: f64, c: f64, u: &LocalPoint) -> Jacobian {
    let (su, cu) = u[0].sin_cos();
    let (sv, cv) = u[1].sin_cos();
    let rad = a + c * su;
    Jacobian::from_columns(&[
        Vector3::new(c * cu * sv, c * cu * cv, -c * su),
        Vector3::new(rad * cv, -rad * sv, 0.0),
    ])
}

pub fn torus_metric(a: f64, c: f64, u: &LocalPoint) -> Matrix2<f64> {
    let rad = a + c * u[0].sin();
    Matrix2::new(c * c, 0.0, 0.0, rad * rad)
}

pub fn torus_christoffel(a: f64, c: f64, u: &LocalPoint) -> Christoffel {
    let (su, cu) = u[0].sin_cos();
    let rad = a + c * su;
    let mut gamma = Christoffel::zero();
    gamma.set(0, 1, 1, -rad * cu / c);
    gamma.set_sym(1, 0, 1, c * cu / rad);
    gamma
}

pub fn torus_drift(a: f64, c: f64, u: &LocalPoint) -> Vector2<f64> {
    let (su, cu) = u[0].sin_cos();
    Vector2::new(cu / (2.0 * c * (a + c * su)), 0.0)
}

pub fn swiss_roll_embed(a: f64, u: &LocalPoint) -> AmbientPoint {
    let (s, c) = u[0].sin_cos();
    Vector3::new(a * u[0] * s, a * u[0] * c, u[1])
}

pub fn swiss_roll_jacobian(a: f64, u: &LocalPoint) -> Jacobian {
    let t = u[0];
    let (s, c) = t.sin_cos();
    Jacobian::from_columns(&[
        Vector3::new(a * (s + t * c), a * (c - t * s), 0.0),
        Vector3::new(0.0, 0.0, 1.0),
    ])
}

pub fn swiss_roll_metric(a: f64, u: &LocalPoint) -> Matrix2<f64> {
    Matrix2::new(a * a * (1.0 + u[0] * u[0]), 0.0, 0.0, 1.0)
}

pub fn swiss_roll_christoffel(u: &LocalPoint) -> Christoffel {
    let t = u[0];
    let mut gamma = Christoffel::zero();
    gamma.set(0, 0, 0, t / (1.0 + t * t));
    gamma
}

pub fn swiss_roll_drift(a: f64, u: &LocalPoint) -> Vector2<f64> {
    let t = u[0];
    let q = 1.0 + t * t;
    Vector2::new(-t / (2.0 * a * a * q * q), 0.0)
}

pub fn disc_embed(p: &DiscProfile, u: &LocalPoint) -> AmbientPoint {
    let (s, c) = u[1].sin_cos();
    Vector3::new(u[0] * c, u[0] * s, p.z)
}

pub fn disc_jacobian(p: &DiscProfile, u: &LocalPoint) -> Jacobian {
    let r = u[0];
    let (s, c) = u[1].sin_cos();
    Jacobian::from_columns(&[Vector3::new(c, s, p.dz), Vector3::new(-r * s, r * c, 0.0)])
}

pub fn disc_metric(p: &DiscProfile, u: &LocalPoint) -> Matrix2<f64> {
    Matrix2::new(1.0 + p.dz * p.dz, 0.0, 0.0, u[0] * u[0])
}

pub fn disc_christoffel(p: &DiscProfile, u: &LocalPoint) -> Christoffel {
    let r = u[0];
    let q = 1.0 + p.dz * p.dz;
    let mut gamma = Christoffel::zero();
    gamma.set(0, 0, 0, p.dz * p.d2z / q);
    gamma.set(0, 1, 1, -r / q);
    gamma.set_sym(1, 0, 1, 1.0 / r);
    gamma
}

pub fn disc_drift(p: &DiscProfile, u: &LocalPoint) -> Vector2<f64> {
    let r = u[0];
    let q = 1.0 + p.dz * p.dz;
    Vector2::new((q - r * p.dz * p.d2z) / (2.0 * r * q * q), 0.0)
}
