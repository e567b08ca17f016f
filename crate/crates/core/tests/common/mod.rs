#![allow(dead_code)]

use std::f64::consts::PI;

use geonoise_core::manifold::{Coord, CoordKind, Domain};
use geonoise_core::{rng, LocalPoint, ManifoldSpec};
use nalgebra::Matrix3;
use rand::Rng;

/// One representative of every built-in family.
pub fn families() -> Vec<(&'static str, ManifoldSpec)> {
    vec![
        ("sphere", ManifoldSpec::unit_sphere()),
        ("spheroid(1,2)", ManifoldSpec::spheroid(1.0, 2.0).unwrap()),
        ("squeezed(1,0.5)", ManifoldSpec::spheroid(1.0, 0.5).unwrap()),
        ("torus(2,1)", ManifoldSpec::torus(2.0, 1.0).unwrap()),
        ("onion(3,0.5)", ManifoldSpec::torus(3.0, 0.5).unwrap()),
        ("swissroll(1)", ManifoldSpec::swiss_roll(1.0).unwrap()),
        ("swissroll(0.5)", ManifoldSpec::swiss_roll(0.5).unwrap()),
        ("disc", ManifoldSpec::default_biconcave_disc()),
    ]
}

/// Uniform points with polar angles kept away from the poles, where
/// finite differences of `cot u` lose digits.
pub fn interior_points(m: &ManifoldSpec, n: usize, seed: u64) -> Vec<LocalPoint> {
    let mut coords = m.domain.coords;
    for c in coords.iter_mut() {
        if c.kind == CoordKind::Polar {
            *c = Coord::new(0.2, PI - 0.2, CoordKind::Polar);
        }
    }
    let d = Domain::new(coords[0], coords[1]);
    let mut r = rng::seeded(seed);
    (0..n).map(|_| d.sample(&mut r)).collect()
}

pub fn random_unit2<R: Rng>(r: &mut R) -> nalgebra::Vector2<f64> {
    let a: f64 = r.random::<f64>() * 2.0 * PI;
    nalgebra::Vector2::new(a.cos(), a.sin())
}

/// `exp(A)` by scaling and squaring with a Taylor core.
pub fn expm(a: &Matrix3<f64>) -> Matrix3<f64> {
    let norm = a.abs().max() * 3.0;
    let mut s = 0;
    while norm / 2f64.powi(s) > 0.25 {
        s += 1;
    }
    let b = a / 2f64.powi(s);
    let mut term = Matrix3::identity();
    let mut acc = Matrix3::identity();
    for k in 1..20 {
        term = term * b / k as f64;
        acc += term;
    }
    for _ in 0..s {
        acc = acc * acc;
    }
    acc
}

/// Great-circle distance on the unit sphere.
pub fn sphere_distance(x: &nalgebra::Vector3<f64>, y: &nalgebra::Vector3<f64>) -> f64 {
    // atan2 form stays accurate for tiny and near-antipodal separations.
    x.cross(y).norm().atan2(x.dot(y))
}
