//! Generic finite-difference geometry.
//!
//! These routines only need `X(u)` or `g(u)` and work for any chart. Deformed
//! surfaces use them directly; for the built-in families they are the
//! independent check on the closed forms.

use nalgebra::{Matrix2, Vector2};

use super::{Christoffel, Jacobian, LocalPoint, ManifoldSpec, MetricTensor};
use crate::error::{GeoError, Result};

/// Central-difference step `1e-5 · max(1, ‖u‖)`.
pub fn default_step(u: &LocalPoint) -> f64 {
    1e-5 * u.norm().max(1.0)
}

fn unit(i: usize) -> LocalPoint {
    let mut e = LocalPoint::zeros();
    e[i] = 1.0;
    e
}

/// Central differences of the chart.
pub fn jacobian_fd(m: &ManifoldSpec, u: &LocalPoint, h: f64) -> Result<Jacobian> {
    let mut j = Jacobian::zeros();
    for i in 0..2 {
        let e = unit(i) * h;
        let col = (m.embed_raw(&(u + e))? - m.embed_raw(&(u - e))?) / (2.0 * h);
        j.set_column(i, &col);
    }
    Ok(j)
}

/// `∂g/∂u_l` for both `l` by central differences.
fn metric_derivatives(m: &ManifoldSpec, u: &LocalPoint, h: f64) -> Result<[Matrix2<f64>; 2]> {
    let mut dg = [Matrix2::zeros(); 2];
    for (l, slot) in dg.iter_mut().enumerate() {
        let e = unit(l) * h;
        *slot = (m.metric_raw(&(u + e))? - m.metric_raw(&(u - e))?) / (2.0 * h);
    }
    Ok(dg)
}

/// `Γ^k_{ij} = ½ Σ_l g^{kl} (∂_i g_{jl} + ∂_j g_{il} − ∂_l g_{ij})` with the
/// metric derivatives taken by central differences.
pub fn christoffel_from_metric(m: &ManifoldSpec, u: &LocalPoint, h: f64) -> Result<Christoffel> {
    let g = MetricTensor::new(m.metric_raw(u)?, *u);
    let ginv = g.inverse()?;
    let dg = metric_derivatives(m, u, h)?;
    let mut gamma = Christoffel::zero();
    for k in 0..2 {
        for i in 0..2 {
            for j in i..2 {
                let mut acc = 0.0;
                for l in 0..2 {
                    acc += ginv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                }
                gamma.set_sym(k, i, j, 0.5 * acc);
            }
        }
    }
    Ok(gamma)
}

/// `√det g · g⁻¹`.
fn density_weighted_inverse(m: &ManifoldSpec, u: &LocalPoint) -> Result<(f64, Matrix2<f64>)> {
    let g = MetricTensor::new(m.metric_raw(u)?, *u);
    let det = g.det();
    if !(det > 0.0) {
        return Err(GeoError::SingularMetric {
            u: [u[0], u[1]],
            cond: f64::INFINITY,
        });
    }
    let root = det.sqrt();
    Ok((root, g.inverse()? * root))
}

/// Brownian-motion drift `(1 / (2√det g)) Σ_l ∂_l(√det g · g^{kl})` by
/// central differences.
pub fn drift_from_metric(m: &ManifoldSpec, u: &LocalPoint, h: f64) -> Result<Vector2<f64>> {
    let (root, _) = density_weighted_inverse(m, u)?;
    let mut drift = Vector2::zeros();
    for l in 0..2 {
        let e = unit(l) * h;
        let (_, plus) = density_weighted_inverse(m, &(u + e))?;
        let (_, minus) = density_weighted_inverse(m, &(u - e))?;
        let d = (plus - minus) / (2.0 * h);
        for k in 0..2 {
            drift[k] += d[(k, l)];
        }
    }
    Ok(drift / (2.0 * root))
}
