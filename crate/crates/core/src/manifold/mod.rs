//! Parametrised surfaces embedded in R³.
//!
//! A [`ManifoldSpec`] couples a surface [`Family`] with the parameter box its
//! chart is used on. Built-in families evaluate Jacobians, metrics,
//! Christoffel symbols and Brownian-motion drifts in closed form; deformed
//! surfaces push the base chart through a flow and fall back to the generic
//! finite-difference routines in [`numeric`].

mod domain;
pub mod families;
pub mod numeric;

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix3, Matrix3x2, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::deformation::{DeformedChart, FlowField};
use crate::error::{GeoError, Result};
use crate::rng;

pub use domain::{Coord, CoordKind, Domain};

/// Chart coordinates `u ∈ R²`.
pub type LocalPoint = Vector2<f64>;
/// Embedded coordinates `x ∈ R³`.
pub type AmbientPoint = Vector3<f64>;
/// A velocity in parameter space; pushes forward to `J·w`.
pub type ParamVelocity = Vector2<f64>;
/// `∂X/∂u`, one column per local coordinate.
pub type Jacobian = Matrix3x2<f64>;

pub const DEFAULT_POLE_MARGIN: f64 = 1e-4;
/// `‖X_u × X_v‖` below which no normal is defined.
pub const DEGENERATE_FRAME_TOL: f64 = 1e-12;
/// Condition number above which the metric is treated as singular.
pub const MAX_METRIC_CONDITION: f64 = 1e12;

/// An ambient vector attached to a point of the surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentVector {
    pub base: AmbientPoint,
    pub v: Vector3<f64>,
}

/// Christoffel symbols of the second kind, indexed `[k][i][j]` for `Γ^k_{ij}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Christoffel(pub [[[f64; 2]; 2]; 2]);

impl Christoffel {
    pub fn zero() -> Self {
        Self([[[0.0; 2]; 2]; 2])
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.0[k][i][j]
    }

    pub fn set(&mut self, k: usize, i: usize, j: usize, value: f64) {
        self.0[k][i][j] = value;
    }

    /// Sets `Γ^k_{ij}` and `Γ^k_{ji}`.
    pub fn set_sym(&mut self, k: usize, i: usize, j: usize, value: f64) {
        self.0[k][i][j] = value;
        self.0[k][j][i] = value;
    }

    /// `Σ_{ij} Γ^k_{ij} w_i w_j` for each `k`.
    pub fn contract(&self, w: &ParamVelocity) -> Vector2<f64> {
        let mut out = Vector2::zeros();
        for k in 0..2 {
            let mut acc = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    acc += self.0[k][i][j] * w[i] * w[j];
                }
            }
            out[k] = acc;
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Christoffel) -> f64 {
        let mut m: f64 = 0.0;
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    m = m.max((self.0[k][i][j] - other.0[k][i][j]).abs());
                }
            }
        }
        m
    }
}

/// The induced metric `g = JᵀJ` at a chart point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricTensor {
    pub g: Matrix2<f64>,
    pub u: LocalPoint,
}

impl MetricTensor {
    pub fn new(g: Matrix2<f64>, u: LocalPoint) -> Self {
        Self { g, u }
    }

    pub fn det(&self) -> f64 {
        self.g[(0, 0)] * self.g[(1, 1)] - self.g[(0, 1)] * self.g[(1, 0)]
    }

    /// Eigenvalues in ascending order (closed form for a symmetric 2×2).
    pub fn eigenvalues(&self) -> (f64, f64) {
        let (a, b, c) = (self.g[(0, 0)], 0.5 * (self.g[(0, 1)] + self.g[(1, 0)]), self.g[(1, 1)]);
        let mean = 0.5 * (a + c);
        let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
        (mean - rad, mean + rad)
    }

    pub fn condition_number(&self) -> f64 {
        let (lo, hi) = self.eigenvalues();
        if lo <= 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    }

    fn ensure_regular(&self) -> Result<()> {
        let cond = self.condition_number();
        if !cond.is_finite() || cond > MAX_METRIC_CONDITION {
            return Err(GeoError::SingularMetric {
                u: [self.u[0], self.u[1]],
                cond,
            });
        }
        Ok(())
    }

    pub fn inverse(&self) -> Result<Matrix2<f64>> {
        self.ensure_regular()?;
        let det = self.det();
        Ok(Matrix2::new(
            self.g[(1, 1)] / det,
            -self.g[(0, 1)] / det,
            -self.g[(1, 0)] / det,
            self.g[(0, 0)] / det,
        ))
    }

    /// Symmetric positive-definite square root of `g⁻¹`.
    pub fn inv_sqrt(&self) -> Result<Matrix2<f64>> {
        let inv = self.inverse()?;
        if inv[(0, 1)] == 0.0 && inv[(1, 0)] == 0.0 {
            return Ok(Matrix2::new(inv[(0, 0)].sqrt(), 0.0, 0.0, inv[(1, 1)].sqrt()));
        }
        // For SPD 2×2 M: sqrt(M) = (M + sqrt(det M)·I) / sqrt(tr M + 2·sqrt(det M)).
        let s = (inv[(0, 0)] * inv[(1, 1)] - inv[(0, 1)] * inv[(1, 0)]).sqrt();
        let t = (inv[(0, 0)] + inv[(1, 1)] + 2.0 * s).sqrt();
        Ok((inv + Matrix2::identity() * s) / t)
    }

    pub fn inner(&self, a: &ParamVelocity, b: &ParamVelocity) -> f64 {
        (a.transpose() * self.g * b)[(0, 0)]
    }

    pub fn norm(&self, w: &ParamVelocity) -> f64 {
        self.inner(w, w).max(0.0).sqrt()
    }
}

/// Surface families and their coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Family {
    /// `X(u) = (u₁, u₂, 0)`; flat reference chart.
    Plane,
    /// `X(u, v) = (a sin u sin v, a sin u cos v, c cos u)`.
    Spheroid { a: f64, c: f64 },
    /// `X(u, v) = ((a + c sin u) sin v, (a + c sin u) cos v, c cos u)`.
    Torus { a: f64, c: f64 },
    /// `X(u₁, u₂) = (a u₁ sin u₁, a u₁ cos u₁, u₂)`.
    SwissRoll { a: f64 },
    /// `X(r, θ) = (r cos θ, r sin θ, z(r))`, upper half of a red-blood-cell shape.
    BiconcaveDisc { a: f64, b: f64, c: f64, d: f64 },
    /// A base chart pushed through a flow.
    Deformed(Box<DeformedChart>),
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Plane => "plane",
            Family::Spheroid { .. } => "spheroid",
            Family::Torus { .. } => "torus",
            Family::SwissRoll { .. } => "swissroll",
            Family::BiconcaveDisc { .. } => "biconcavedisc",
            Family::Deformed(_) => "deformed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifoldSpec {
    pub family: Family,
    pub domain: Domain,
    pub pole_margin: f64,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(GeoError::InvalidSpec(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

fn angle() -> Coord {
    Coord::new(0.0, 2.0 * PI, CoordKind::Periodic)
}

impl ManifoldSpec {
    pub fn plane() -> Self {
        Self {
            family: Family::Plane,
            domain: Domain::new(
                Coord::new(-1.0, 1.0, CoordKind::Open),
                Coord::new(-1.0, 1.0, CoordKind::Open),
            ),
            pole_margin: DEFAULT_POLE_MARGIN,
        }
    }

    pub fn spheroid(a: f64, c: f64) -> Result<Self> {
        positive("spheroid a", a)?;
        positive("spheroid c", c)?;
        let m = DEFAULT_POLE_MARGIN;
        Ok(Self {
            family: Family::Spheroid { a, c },
            domain: Domain::new(Coord::new(m, PI - m, CoordKind::Polar), angle()),
            pole_margin: m,
        })
    }

    pub fn unit_sphere() -> Self {
        Self::spheroid(1.0, 1.0).expect("unit sphere coefficients are valid")
    }

    pub fn torus(a: f64, c: f64) -> Result<Self> {
        positive("torus a", a)?;
        positive("torus c", c)?;
        if c >= a {
            return Err(GeoError::InvalidSpec(format!(
                "torus requires 0 < c < a, got a = {a}, c = {c}"
            )));
        }
        Ok(Self {
            family: Family::Torus { a, c },
            domain: Domain::new(angle(), angle()),
            pole_margin: DEFAULT_POLE_MARGIN,
        })
    }

    pub fn swiss_roll(a: f64) -> Result<Self> {
        positive("swiss roll a", a)?;
        Ok(Self {
            family: Family::SwissRoll { a },
            domain: Domain::new(
                Coord::new(PI / 2.0, 3.0 * PI, CoordKind::Open),
                Coord::new(0.0, 10.0, CoordKind::Bounded),
            ),
            pole_margin: DEFAULT_POLE_MARGIN,
        })
    }

    pub fn biconcave_disc(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        positive("biconcave disc d", d)?;
        for (name, v) in [("a", a), ("b", b), ("c", c)] {
            if !v.is_finite() {
                return Err(GeoError::InvalidSpec(format!(
                    "biconcave disc {name} = {v} is not finite"
                )));
            }
        }
        Ok(Self {
            family: Family::BiconcaveDisc { a, b, c, d },
            domain: Domain::new(Coord::new(0.05 * d, 0.45 * d, CoordKind::Bounded), angle()),
            pole_margin: DEFAULT_POLE_MARGIN,
        })
    }

    /// Biconcave disc with the default erythrocyte-like coefficients.
    pub fn default_biconcave_disc() -> Self {
        Self::biconcave_disc(0.5, 2.0, -1.0, 2.0).expect("default disc coefficients are valid")
    }

    /// `base` pushed through `field` for time `t_end` with `euler_steps` steps.
    pub fn deformed(base: ManifoldSpec, field: FlowField, t_end: f64, euler_steps: usize) -> Result<Self> {
        let chart = DeformedChart::new(base, field, t_end, euler_steps)?;
        let domain = chart.base.domain;
        let pole_margin = chart.base.pole_margin;
        Ok(Self {
            family: Family::Deformed(Box::new(chart)),
            domain,
            pole_margin,
        })
    }

    pub fn with_domain(mut self, domain: Domain) -> Result<Self> {
        for c in &domain.coords {
            if !(c.lo.is_finite() && c.hi.is_finite() && c.lo < c.hi) {
                return Err(GeoError::InvalidSpec(format!(
                    "empty or non-finite interval [{}, {}]",
                    c.lo, c.hi
                )));
            }
        }
        if let Family::BiconcaveDisc { d, .. } = self.family {
            let r = domain.coords[0];
            if r.lo <= 0.0 || r.hi >= 0.5 * d {
                return Err(GeoError::InvalidSpec(format!(
                    "biconcave disc radius box [{}, {}] must lie inside (0, d/2)",
                    r.lo, r.hi
                )));
            }
        }
        self.domain = domain;
        Ok(self)
    }

    /// Changes the pole margin; polar sampling intervals follow it.
    pub fn with_pole_margin(mut self, margin: f64) -> Result<Self> {
        if !(margin.is_finite() && margin > 0.0 && margin < 0.5) {
            return Err(GeoError::InvalidSpec(format!(
                "pole margin {margin} must lie in (0, 0.5)"
            )));
        }
        for c in self.domain.coords.iter_mut() {
            if c.kind == CoordKind::Polar {
                c.lo = margin;
                c.hi = PI - margin;
            }
        }
        self.pole_margin = margin;
        if let Family::Deformed(chart) = &mut self.family {
            chart.base = chart.base.clone().with_pole_margin(margin)?;
        }
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        2
    }

    pub fn ambient_dim(&self) -> usize {
        3
    }

    pub fn check(&self, u: &LocalPoint) -> Result<()> {
        match self.domain.violation(u, self.pole_margin) {
            None => Ok(()),
            Some(reason) => Err(GeoError::Domain {
                u: [u[0], u[1]],
                t: None,
                reason,
            }),
        }
    }

    /// Sign applied to `X_u × X_v` so that closed surfaces get outward normals.
    pub fn orientation(&self) -> f64 {
        match &self.family {
            Family::Spheroid { .. } | Family::Torus { .. } => -1.0,
            Family::Deformed(chart) => chart.base.orientation(),
            _ => 1.0,
        }
    }

    fn profile(a: f64, b: f64, c: f64, d: f64, u: &LocalPoint) -> families::DiscProfile {
        families::disc_profile(a, b, c, d, u[0])
    }

    // Unchecked evaluations. Finite-difference stencils step slightly past
    // the domain box, so they go through these.

    pub(crate) fn embed_raw(&self, u: &LocalPoint) -> Result<AmbientPoint> {
        Ok(match &self.family {
            Family::Plane => families::plane_embed(u),
            Family::Spheroid { a, c } => families::spheroid_embed(*a, *c, u),
            Family::Torus { a, c } => families::torus_embed(*a, *c, u),
            Family::SwissRoll { a } => families::swiss_roll_embed(*a, u),
            Family::BiconcaveDisc { a, b, c, d } => families::disc_embed(&Self::profile(*a, *b, *c, *d, u), u),
            Family::Deformed(chart) => chart.embed(u)?,
        })
    }

    pub(crate) fn jacobian_raw(&self, u: &LocalPoint) -> Result<Jacobian> {
        Ok(match &self.family {
            Family::Plane => families::plane_jacobian(u),
            Family::Spheroid { a, c } => families::spheroid_jacobian(*a, *c, u),
            Family::Torus { a, c } => families::torus_jacobian(*a, *c, u),
            Family::SwissRoll { a } => families::swiss_roll_jacobian(*a, u),
            Family::BiconcaveDisc { a, b, c, d } => families::disc_jacobian(&Self::profile(*a, *b, *c, *d, u), u),
            Family::Deformed(chart) => chart.flow_jacobian_raw(u)?,
        })
    }

    pub(crate) fn metric_raw(&self, u: &LocalPoint) -> Result<Matrix2<f64>> {
        Ok(match &self.family {
            Family::Plane => Matrix2::identity(),
            Family::Spheroid { a, c } => families::spheroid_metric(*a, *c, u),
            Family::Torus { a, c } => families::torus_metric(*a, *c, u),
            Family::SwissRoll { a } => families::swiss_roll_metric(*a, u),
            Family::BiconcaveDisc { a, b, c, d } => families::disc_metric(&Self::profile(*a, *b, *c, *d, u), u),
            Family::Deformed(chart) if chart.is_identity() => chart.base.metric_raw(u)?,
            Family::Deformed(chart) => {
                let j = chart.flow_jacobian_raw(u)?;
                j.transpose() * j
            }
        })
    }

    pub(crate) fn christoffel_raw(&self, u: &LocalPoint) -> Result<Christoffel> {
        Ok(match &self.family {
            Family::Plane => Christoffel::zero(),
            Family::Spheroid { a, c } => families::spheroid_christoffel(*a, *c, u),
            Family::Torus { a, c } => families::torus_christoffel(*a, *c, u),
            Family::SwissRoll { .. } => families::swiss_roll_christoffel(u),
            Family::BiconcaveDisc { a, b, c, d } => families::disc_christoffel(&Self::profile(*a, *b, *c, *d, u), u),
            Family::Deformed(chart) if chart.is_identity() => chart.base.christoffel_raw(u)?,
            Family::Deformed(_) => numeric::christoffel_from_metric(self, u, numeric::default_step(u))?,
        })
    }

    pub(crate) fn drift_raw(&self, u: &LocalPoint) -> Result<Vector2<f64>> {
        Ok(match &self.family {
            Family::Plane => Vector2::zeros(),
            Family::Spheroid { a, c } => families::spheroid_drift(*a, *c, u),
            Family::Torus { a, c } => families::torus_drift(*a, *c, u),
            Family::SwissRoll { a } => families::swiss_roll_drift(*a, u),
            Family::BiconcaveDisc { a, b, c, d } => families::disc_drift(&Self::profile(*a, *b, *c, *d, u), u),
            Family::Deformed(chart) if chart.is_identity() => chart.base.drift_raw(u)?,
            Family::Deformed(_) => numeric::drift_from_metric(self, u, numeric::default_step(u))?,
        })
    }

    /// `X(u)`.
    pub fn chart_embed(&self, u: &LocalPoint) -> Result<AmbientPoint> {
        self.check(u)?;
        self.embed_raw(u)
    }

    /// `J_X(u) = [∂X/∂u₁, ∂X/∂u₂]`.
    pub fn jacobian(&self, u: &LocalPoint) -> Result<Jacobian> {
        self.check(u)?;
        self.jacobian_raw(u)
    }

    pub fn metric(&self, u: &LocalPoint) -> Result<MetricTensor> {
        self.check(u)?;
        Ok(MetricTensor::new(self.metric_raw(u)?, *u))
    }

    /// Unit normal, oriented outward on closed surfaces.
    pub fn unit_normal(&self, u: &LocalPoint) -> Result<Vector3<f64>> {
        let j = self.jacobian(u)?;
        let n = j.column(0).cross(&j.column(1));
        let norm = n.norm();
        if !(norm >= DEGENERATE_FRAME_TOL) {
            return Err(GeoError::DegenerateFrame { u: [u[0], u[1]], norm });
        }
        Ok(n * (self.orientation() / norm))
    }

    /// Unit vectors spanning the normal space (one for a surface in R³).
    pub fn normal_frame(&self, u: &LocalPoint) -> Result<Vec<Vector3<f64>>> {
        Ok(vec![self.unit_normal(u)?])
    }

    /// Orthogonal projector onto the tangent plane, `P = I − Σ nᵢnᵢᵀ`.
    pub fn projection_matrix(&self, u: &LocalPoint) -> Result<Matrix3<f64>> {
        let n = self.unit_normal(u)?;
        Ok(Matrix3::identity() - n * n.transpose())
    }

    pub fn christoffel(&self, u: &LocalPoint) -> Result<Christoffel> {
        self.check(u)?;
        self.christoffel_raw(u)
    }

    /// Drift of intrinsic Brownian motion in chart coordinates,
    /// `(1 / (2√det g)) Σ_l ∂_l(√det g · g^{kl})`.
    pub fn bm_drift(&self, u: &LocalPoint) -> Result<Vector2<f64>> {
        self.check(u)?;
        self.drift_raw(u)
    }

    /// `n` points drawn uniformly from the domain box, deterministic in `seed`.
    pub fn sample_local_uniform(&self, n: usize, seed: u64) -> Result<Vec<LocalPoint>> {
        if n == 0 {
            return Err(GeoError::InvalidArgument("sample count must be at least 1".into()));
        }
        let mut rng = rng::seeded(seed);
        Ok((0..n).map(|_| self.domain.sample(&mut rng)).collect())
    }

    /// Residual of the surface's implicit equation at `x`, where one exists.
    pub fn implicit_residual(&self, x: &AmbientPoint) -> Option<f64> {
        match &self.family {
            Family::Plane => Some(x[2].abs()),
            Family::Spheroid { a, c } => {
                Some(((x[0] * x[0] + x[1] * x[1]) / (a * a) + x[2] * x[2] / (c * c) - 1.0).abs())
            }
            Family::Torus { a, c } => {
                let rho = x[0].hypot(x[1]);
                Some(((rho - a) * (rho - a) + x[2] * x[2] - c * c).abs())
            }
            Family::SwissRoll { a } => {
                // The chart image is {ρ = a|u₁|}; try both signs of u₁.
                let rho = x[0].hypot(x[1]);
                let best = [rho / a, -rho / a]
                    .iter()
                    .map(|&t| {
                        let (s, c) = t.sin_cos();
                        (x[0] - a * t * s).hypot(x[1] - a * t * c)
                    })
                    .fold(f64::INFINITY, f64::min);
                Some(best)
            }
            Family::BiconcaveDisc { a, b, c, d } => {
                let rho = x[0].hypot(x[1]);
                if rho >= 0.5 * d {
                    return Some(f64::INFINITY);
                }
                Some((x[2] - families::disc_profile(*a, *b, *c, *d, rho).z).abs())
            }
            Family::Deformed(_) => None,
        }
    }

    /// Distance between `x` and the chart image of `u`.
    pub fn chart_residual(&self, u: &LocalPoint, x: &AmbientPoint) -> Result<f64> {
        Ok((self.embed_raw(u)? - x).norm())
    }

    /// Implicit residual when available, otherwise the chart residual.
    pub fn on_manifold_residual(&self, u: Option<&LocalPoint>, x: &AmbientPoint) -> Result<f64> {
        match (self.implicit_residual(x), u) {
            (Some(r), _) => Ok(r),
            (None, Some(u)) => self.chart_residual(u, x),
            (None, None) => Err(GeoError::InvalidArgument(
                "chart residual needs local coordinates".into(),
            )),
        }
    }
}
