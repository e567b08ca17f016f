//! Input-noise strategies for points on a manifold.
//!
//! - ambient: `x + ε`, `ε ~ N(0, σ²I₃)`;
//! - tangent: `x + Pε`, the ambient draw projected onto the tangent plane;
//! - geodesic: the projected draw pulled back to parameter space and mapped
//!   onto the surface along a geodesic;
//! - brownian: Euler–Maruyama simulation of intrinsic Brownian motion for
//!   total time `T = σ²`.
//!
//! Samplers take an explicit RNG so that callers control the streams.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Vector2, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::geodesic;
use crate::manifold::{AmbientPoint, LocalPoint, ManifoldSpec, ParamVelocity, TangentVector};

pub const DEFAULT_BM_STEPS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// No perturbation (the training baseline).
    None,
    Ambient,
    Tangent,
    Geodesic,
    Brownian,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::None,
        Strategy::Ambient,
        Strategy::Tangent,
        Strategy::Geodesic,
        Strategy::Brownian,
    ];

    /// Row label used in result tables.
    pub fn tag(&self) -> &'static str {
        match self {
            Strategy::None => "B",
            Strategy::Ambient => "A",
            Strategy::Tangent => "T",
            Strategy::Geodesic => "G",
            Strategy::Brownian => "BM",
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::None => "none",
            Strategy::Ambient => "ambient",
            Strategy::Tangent => "tangent",
            Strategy::Geodesic => "geodesic",
            Strategy::Brownian => "brownian",
        }
    }

    /// Whether samples carry local coordinates.
    pub fn has_local(&self) -> bool {
        matches!(self, Strategy::Geodesic | Strategy::Brownian)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" | "baseline" | "b" => Ok(Strategy::None),
            "ambient" | "a" => Ok(Strategy::Ambient),
            "tangent" | "t" => Ok(Strategy::Tangent),
            "geodesic" | "g" => Ok(Strategy::Geodesic),
            "brownian" | "bm" => Ok(Strategy::Brownian),
            other => Err(format!("unknown noise strategy `{other}`")),
        }
    }
}

/// Which length the geodesic is evaluated at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeodesicNorm {
    /// Unit-speed geodesic evaluated at the ambient length `‖ε_⊤‖`, i.e.
    /// `Exp(u, w)` with `w` the pulled-back velocity.
    #[default]
    Ambient,
    /// Unit-speed geodesic evaluated at the Euclidean length `‖w‖` of the
    /// pulled-back velocity in parameter space.
    Parameter,
}

impl FromStr for GeodesicNorm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ambient" => Ok(GeodesicNorm::Ambient),
            "parameter" => Ok(GeodesicNorm::Parameter),
            other => Err(format!("unknown geodesic norm `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub strategy: Strategy,
    /// Noise variance; total diffusion time for Brownian motion.
    pub sigma2: f64,
    pub bm_steps: usize,
    pub seed: u64,
    pub geodesic_norm: GeodesicNorm,
    /// RK4 steps per geodesic sample; `None` uses the arc-length heuristic.
    pub geodesic_steps: Option<usize>,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::None,
            sigma2: 0.0,
            bm_steps: DEFAULT_BM_STEPS,
            seed: 0,
            geodesic_norm: GeodesicNorm::Ambient,
            geodesic_steps: None,
        }
    }
}

impl NoiseConfig {
    pub fn new(strategy: Strategy, sigma2: f64) -> Self {
        Self {
            strategy,
            sigma2,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma2.is_finite() && self.sigma2 >= 0.0) {
            return Err(GeoError::InvalidArgument(format!(
                "sigma2 must be >= 0, got {}",
                self.sigma2
            )));
        }
        if self.bm_steps == 0 {
            return Err(GeoError::InvalidArgument("bm_steps must be at least 1".into()));
        }
        if self.geodesic_steps == Some(0) {
            return Err(GeoError::InvalidArgument("geodesic_steps must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSample {
    pub original: AmbientPoint,
    pub perturbed: AmbientPoint,
    /// Chart coordinates of `perturbed` (geodesic and Brownian only).
    pub local: Option<LocalPoint>,
    pub strategy: Strategy,
}

fn check_sigma2(sigma2: f64) -> Result<()> {
    if sigma2.is_finite() && sigma2 >= 0.0 {
        Ok(())
    } else {
        Err(GeoError::InvalidArgument(format!("sigma2 must be >= 0, got {sigma2}")))
    }
}

/// `ε ~ N(0, σ²I₃)`.
pub fn gaussian3<R: Rng + ?Sized>(sigma: f64, rng: &mut R) -> Vector3<f64> {
    Vector3::new(
        rng.sample::<f64, _>(StandardNormal),
        rng.sample::<f64, _>(StandardNormal),
        rng.sample::<f64, _>(StandardNormal),
    ) * sigma
}

fn gaussian2<R: Rng + ?Sized>(rng: &mut R) -> Vector2<f64> {
    Vector2::new(
        rng.sample::<f64, _>(StandardNormal),
        rng.sample::<f64, _>(StandardNormal),
    )
}

pub fn ambient_noise<R: Rng + ?Sized>(x: &AmbientPoint, sigma2: f64, rng: &mut R) -> Result<NoiseSample> {
    check_sigma2(sigma2)?;
    let eps = gaussian3(sigma2.sqrt(), rng);
    Ok(NoiseSample {
        original: *x,
        perturbed: x + eps,
        local: None,
        strategy: Strategy::Ambient,
    })
}

/// Ambient draw projected onto the tangent plane at `X(u)`.
pub fn tangent_noise<R: Rng + ?Sized>(
    m: &ManifoldSpec,
    u: &LocalPoint,
    sigma2: f64,
    rng: &mut R,
) -> Result<NoiseSample> {
    check_sigma2(sigma2)?;
    let x = m.chart_embed(u)?;
    let p = m.projection_matrix(u)?;
    let eps = gaussian3(sigma2.sqrt(), rng);
    Ok(NoiseSample {
        original: x,
        perturbed: x + p * eps,
        local: None,
        strategy: Strategy::Tangent,
    })
}

/// `w = g⁻¹ Jᵀ ε_⊤`, the parameter-space velocity whose push-forward is `ε_⊤`.
pub fn pullback_velocity(m: &ManifoldSpec, u: &LocalPoint, eps_tangent: &TangentVector) -> Result<ParamVelocity> {
    let j = m.jacobian(u)?;
    let g = m.metric(u)?;
    Ok(g.inverse()? * (j.transpose() * eps_tangent.v))
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GeodesicOptions {
    pub norm: GeodesicNorm,
    pub steps: Option<usize>,
}

pub fn geodesic_noise<R: Rng + ?Sized>(
    m: &ManifoldSpec,
    u: &LocalPoint,
    sigma2: f64,
    rng: &mut R,
) -> Result<NoiseSample> {
    geodesic_noise_with(m, u, sigma2, &GeodesicOptions::default(), rng)
}

/// Draws `ε`, projects it, pulls it back to `w` and follows the geodesic.
pub fn geodesic_noise_with<R: Rng + ?Sized>(
    m: &ManifoldSpec,
    u: &LocalPoint,
    sigma2: f64,
    opts: &GeodesicOptions,
    rng: &mut R,
) -> Result<NoiseSample> {
    check_sigma2(sigma2)?;
    let x = m.chart_embed(u)?;
    let p = m.projection_matrix(u)?;
    let eps_t = p * gaussian3(sigma2.sqrt(), rng);
    let w = pullback_velocity(m, u, &TangentVector { base: x, v: eps_t })?;
    let w = match opts.norm {
        GeodesicNorm::Ambient => w,
        GeodesicNorm::Parameter => {
            let g_norm = m.metric(u)?.norm(&w);
            if g_norm > 0.0 {
                w * (w.norm() / g_norm)
            } else {
                w
            }
        }
    };
    let local = geodesic::exp_map_with_steps(m, u, &w, opts.steps)?;
    Ok(NoiseSample {
        original: x,
        perturbed: m.embed_raw(&local)?,
        local: Some(local),
        strategy: Strategy::Geodesic,
    })
}

/// One Euler–Maruyama step of intrinsic Brownian motion,
/// `u ← u + drift(u)·dt + sqrt(g⁻¹)·√dt·ξ`, `ξ ~ N(0, I₂)`. Box and polar
/// coordinates reflect at their interval ends.
pub fn brownian_step<R: Rng + ?Sized>(m: &ManifoldSpec, u: &LocalPoint, dt: f64, rng: &mut R) -> Result<LocalPoint> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(GeoError::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    m.check(u)?;
    let drift = m.drift_raw(u)?;
    let g = crate::manifold::MetricTensor::new(m.metric_raw(u)?, *u);
    let diffusion = g.inv_sqrt()?;
    let next = u + drift * dt + diffusion * gaussian2(rng) * dt.sqrt();
    if !next.iter().all(|v| v.is_finite()) {
        return Err(GeoError::NonFinite(format!("Brownian step from ({}, {})", u[0], u[1])));
    }
    let reflected = m.domain.reflect(&next).ok_or_else(|| GeoError::Domain {
        u: [next[0], next[1]],
        t: None,
        reason: "Brownian step overshot the domain box".into(),
    })?;
    m.check(&reflected)?;
    Ok(reflected)
}

/// Brownian path with `steps` steps of size `T / steps`, starting point included.
pub fn brownian_path<R: Rng + ?Sized>(
    m: &ManifoldSpec,
    u: &LocalPoint,
    total_time: f64,
    steps: usize,
    rng: &mut R,
) -> Result<Vec<LocalPoint>> {
    let mut path = Vec::with_capacity(steps + 1);
    run_brownian(m, u, total_time, steps, rng, |p| path.push(*p))?;
    Ok(path)
}

fn run_brownian<R: Rng + ?Sized, F: FnMut(&LocalPoint)>(
    m: &ManifoldSpec,
    u: &LocalPoint,
    total_time: f64,
    steps: usize,
    rng: &mut R,
    mut visit: F,
) -> Result<LocalPoint> {
    check_sigma2(total_time)?;
    if steps == 0 {
        return Err(GeoError::InvalidArgument(
            "Brownian motion needs at least one step".into(),
        ));
    }
    m.check(u)?;
    visit(u);
    if total_time == 0.0 {
        return Ok(*u);
    }
    let dt = total_time / steps as f64;
    let mut cur = *u;
    for i in 0..steps {
        cur = brownian_step(m, &cur, dt, rng).map_err(|e| match e {
            GeoError::Domain { u, reason, .. } => GeoError::Domain {
                u,
                t: Some((i + 1) as f64 * dt),
                reason,
            },
            other => other,
        })?;
        visit(&cur);
    }
    Ok(cur)
}

pub fn brownian_noise<R: Rng + ?Sized>(
    m: &ManifoldSpec,
    u: &LocalPoint,
    total_time: f64,
    steps: usize,
    rng: &mut R,
) -> Result<NoiseSample> {
    let x = m.chart_embed(u)?;
    let end = run_brownian(m, u, total_time, steps, rng, |_| {})?;
    Ok(NoiseSample {
        original: x,
        perturbed: if end == *u { x } else { m.embed_raw(&end)? },
        local: Some(end),
        strategy: Strategy::Brownian,
    })
}

/// Applies the configured strategy to the chart point `u`.
pub fn perturb<R: Rng + ?Sized>(
    m: &ManifoldSpec,
    u: &LocalPoint,
    cfg: &NoiseConfig,
    rng: &mut R,
) -> Result<NoiseSample> {
    match cfg.strategy {
        Strategy::None => {
            let x = m.chart_embed(u)?;
            Ok(NoiseSample {
                original: x,
                perturbed: x,
                local: Some(*u),
                strategy: Strategy::None,
            })
        }
        Strategy::Ambient => ambient_noise(&m.chart_embed(u)?, cfg.sigma2, rng),
        Strategy::Tangent => tangent_noise(m, u, cfg.sigma2, rng),
        Strategy::Geodesic => geodesic_noise_with(
            m,
            u,
            cfg.sigma2,
            &GeodesicOptions {
                norm: cfg.geodesic_norm,
                steps: cfg.geodesic_steps,
            },
            rng,
        ),
        Strategy::Brownian => brownian_noise(m, u, cfg.sigma2, cfg.bm_steps, rng),
    }
}
