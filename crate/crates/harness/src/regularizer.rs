//! Monte Carlo check of the second-order expansion of the noisy loss.
//!
//! For `ℓ = ½(f − y)²` and `ε ~ N(0, σ²Σ)`,
//! `E[ℓ(x + ε)] − ℓ(x) ≈ (σ²/2)(∇fᵀΣ∇f + (f − y) tr(ΣH))`. With `Σ = I` this is
//! the gradient-norm penalty plus the modelling-error term; with `Σ = P` only
//! the tangential part of the gradient is penalised.

use geonoise_core::noise::gaussian3;
use geonoise_core::{rng, LocalPoint, ManifoldSpec};
use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::mlp::{as_batch, Mlp};

/// A twice differentiable scalar function of the ambient point.
pub trait ScalarModel {
    fn value(&self, x: &Vector3<f64>) -> f64;
    fn gradient(&self, x: &Vector3<f64>) -> Vector3<f64>;
    /// `dᵀ ∇²f d`.
    fn directional_second(&self, x: &Vector3<f64>, d: &Vector3<f64>) -> f64;

    fn values(&self, xs: &[Vector3<f64>]) -> Vec<f64> {
        xs.iter().map(|x| self.value(x)).collect()
    }
}

impl ScalarModel for Mlp {
    fn value(&self, x: &Vector3<f64>) -> f64 {
        self.eval(x)
    }

    fn gradient(&self, x: &Vector3<f64>) -> Vector3<f64> {
        self.input_gradient(x)
    }

    fn directional_second(&self, x: &Vector3<f64>, d: &Vector3<f64>) -> f64 {
        Mlp::directional_second(self, x, d)
    }

    fn values(&self, xs: &[Vector3<f64>]) -> Vec<f64> {
        self.forward(as_batch(xs).view()).to_vec()
    }
}

/// `f(x) = wᵀx + b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearModel {
    pub w: Vector3<f64>,
    pub b: f64,
}

impl ScalarModel for LinearModel {
    fn value(&self, x: &Vector3<f64>) -> f64 {
        self.w.dot(x) + self.b
    }

    fn gradient(&self, _: &Vector3<f64>) -> Vector3<f64> {
        self.w
    }

    fn directional_second(&self, _: &Vector3<f64>, _: &Vector3<f64>) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    /// Monte Carlo mean of `L(x + ε) − L(x)`.
    pub mc_mean: f64,
    pub mc_se: f64,
    /// `(σ²/2) Σ ‖Σ^{1/2}∇f‖²`, the interpolation-limit penalty.
    pub predicted: f64,
    /// `predicted` plus the modelling-error term.
    pub predicted_full: f64,
    /// `(mc_mean − predicted) / mc_se`.
    pub z: f64,
    pub within: bool,
    pub within_full: bool,
}

impl Estimate {
    fn new(mc_mean: f64, mc_se: f64, predicted: f64, predicted_full: f64, k: f64) -> Self {
        let ok = |p: f64| (mc_mean - p).abs() <= k * mc_se + 1e-15;
        Estimate {
            mc_mean,
            mc_se,
            predicted,
            predicted_full,
            z: if mc_se > 0.0 {
                (mc_mean - predicted) / mc_se
            } else {
                0.0
            },
            within: ok(predicted),
            within_full: ok(predicted_full),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularizerReport {
    pub sigma2: f64,
    pub n_mc: usize,
    pub points: usize,
    /// `Σ ½(f − y)²` at the clean points.
    pub loss: f64,
    pub ambient: Estimate,
    pub tangent: Estimate,
    /// Largest relative gap between model gradients and central differences.
    pub gradient_rel_err: f64,
    pub gradients_agree: bool,
}

impl RegularizerReport {
    pub fn ok(&self) -> bool {
        self.ambient.within && self.tangent.within && self.gradients_agree
    }
}

pub const FD_STEP: f64 = 1e-5;
pub const GRADIENT_TOL: f64 = 1e-6;
pub const SE_MULTIPLE: f64 = 3.0;
const BLOCK: usize = 256;

fn fd_gradient<M: ScalarModel + ?Sized>(f: &M, x: &Vector3<f64>) -> Vector3<f64> {
    Vector3::from_fn(|k, _| {
        let mut e = Vector3::zeros();
        e[k] = FD_STEP;
        (f.value(&(x + e)) - f.value(&(x - e))) / (2.0 * FD_STEP)
    })
}

fn tangent_basis(m: &ManifoldSpec, u: &LocalPoint) -> Result<[Vector3<f64>; 2]> {
    let j = m.jacobian(u)?;
    let t1 = j.column(0).normalize();
    let t2 = (j.column(1) - t1 * t1.dot(&j.column(1))).normalize();
    Ok([t1, t2])
}

/// Mean and standard error of `Σᵢ ℓ(xᵢ + εᵢ) − ℓ(xᵢ)` over `n_mc` antithetic
/// pairs `±ε`, with `εᵢ = Aᵢ ξ` and `ξ ~ N(0, σ²I₃)`.
fn monte_carlo<M: ScalarModel + ?Sized>(
    f: &M,
    xs: &[Vector3<f64>],
    ys: &[f64],
    maps: &[Matrix3<f64>],
    sigma2: f64,
    n_mc: usize,
    seed: u64,
) -> (f64, f64) {
    let base: f64 = f.values(xs).iter().zip(ys).map(|(f, y)| 0.5 * (f - y).powi(2)).sum();
    let mut r = rng::seeded(seed);
    let n = xs.len();
    let (mut sum, mut sq) = (0.0, 0.0);
    let mut done = 0;
    while done < n_mc {
        let block = BLOCK.min(n_mc - done);
        let mut pts = Vec::with_capacity(2 * block * n);
        for _ in 0..block {
            for (x, a) in xs.iter().zip(maps) {
                let eps = a * gaussian3(sigma2.sqrt(), &mut r);
                pts.push(x + eps);
                pts.push(x - eps);
            }
        }
        let vals = f.values(&pts);
        for b in 0..block {
            let mut d = -base;
            for i in 0..n {
                let k = 2 * (b * n + i);
                let y = ys[i];
                d += 0.25 * ((vals[k] - y).powi(2) + (vals[k + 1] - y).powi(2));
            }
            sum += d;
            sq += d * d;
        }
        done += block;
    }
    let mean = sum / n_mc as f64;
    let var = (sq / n_mc as f64 - mean * mean).max(0.0) * n_mc as f64 / (n_mc as f64 - 1.0);
    (mean, (var / n_mc as f64).sqrt())
}

/// Compares Monte Carlo estimates of the noise-induced loss increase with
/// the predicted penalties, for ambient and tangential noise at the chart
/// points `points` of `m`.
pub fn mc_regularizer_check<M: ScalarModel + ?Sized>(
    f: &M,
    m: &ManifoldSpec,
    points: &[LocalPoint],
    targets: &[f64],
    sigma2: f64,
    n_mc: usize,
    seed: u64,
) -> Result<RegularizerReport> {
    if points.is_empty() || points.len() != targets.len() {
        return Err(HarnessError::InvalidConfig(
            "need one target per point and at least one point".into(),
        ));
    }
    if !(sigma2 > 0.0 && sigma2 <= 1e-2) {
        return Err(HarnessError::InvalidConfig(format!(
            "the expansion needs small noise, 0 < sigma2 <= 1e-2, got {sigma2}"
        )));
    }
    if n_mc < 10_000 {
        return Err(HarnessError::InvalidConfig(format!(
            "n_mc must be at least 1e4, got {n_mc}"
        )));
    }
    let xs = points
        .iter()
        .map(|u| m.chart_embed(u))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let projectors = points
        .iter()
        .map(|u| m.projection_matrix(u))
        .collect::<std::result::Result<Vec<_>, _>>()?;

    let (mut grad_amb, mut grad_tan, mut nme_amb, mut nme_tan) = (0.0, 0.0, 0.0, 0.0);
    let mut gradient_rel_err: f64 = 0.0;
    let mut loss = 0.0;
    for ((u, x), (y, p)) in points.iter().zip(&xs).zip(targets.iter().zip(&projectors)) {
        let g = f.gradient(x);
        let fd = fd_gradient(f, x);
        gradient_rel_err = gradient_rel_err.max((g - fd).norm() / g.norm().max(1e-12));
        let resid = f.value(x) - y;
        loss += 0.5 * resid * resid;
        grad_amb += g.norm_squared();
        grad_tan += (p * g).norm_squared();
        let lap: f64 = (0..3).map(|k| f.directional_second(x, &Vector3::ith(k, 1.0))).sum();
        let tan_lap: f64 = tangent_basis(m, u)?.iter().map(|t| f.directional_second(x, t)).sum();
        nme_amb += resid * lap;
        nme_tan += resid * tan_lap;
    }
    let half = sigma2 / 2.0;
    let identity = vec![Matrix3::identity(); xs.len()];
    let (am, ase) = monte_carlo(f, &xs, targets, &identity, sigma2, n_mc, rng::derive_seed(seed, 0));
    let (tm, tse) = monte_carlo(f, &xs, targets, &projectors, sigma2, n_mc, rng::derive_seed(seed, 1));
    Ok(RegularizerReport {
        sigma2,
        n_mc,
        points: points.len(),
        loss,
        ambient: Estimate::new(am, ase, half * grad_amb, half * (grad_amb + nme_amb), SE_MULTIPLE),
        tangent: Estimate::new(tm, tse, half * grad_tan, half * (grad_tan + nme_tan), SE_MULTIPLE),
        gradient_rel_err,
        gradients_agree: gradient_rel_err <= GRADIENT_TOL,
    })
}
