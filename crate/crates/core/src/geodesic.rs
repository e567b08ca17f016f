//! Geodesics in chart coordinates.
//!
//! The geodesic equation `α̈_k = −Σ_{ij} Γ^k_{ij}(α) α̇_i α̇_j` is integrated as a
//! first-order system with classical fixed-step RK4. Angle coordinates are
//! left unwrapped; only hard box coordinates and pole margins end an
//! integration with a domain error.

use nalgebra::Vector2;

use crate::error::{GeoError, Result};
use crate::manifold::{LocalPoint, ManifoldSpec, ParamVelocity};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicState {
    pub alpha: LocalPoint,
    pub alpha_dot: ParamVelocity,
    pub t: f64,
}

impl GeodesicState {
    pub fn new(alpha: LocalPoint, alpha_dot: ParamVelocity, t: f64) -> Self {
        Self { alpha, alpha_dot, t }
    }
}

fn with_time(err: GeoError, t: f64) -> GeoError {
    match err {
        GeoError::Domain { u, reason, .. } => GeoError::Domain { u, t: Some(t), reason },
        other => other,
    }
}

/// Right-hand side `(α̇, α̈)` of the geodesic system.
pub fn geodesic_rhs(m: &ManifoldSpec, s: &GeodesicState) -> Result<(Vector2<f64>, Vector2<f64>)> {
    m.check(&s.alpha).map_err(|e| with_time(e, s.t))?;
    rhs_unchecked(m, s)
}

// RK4 stage points may poke a hair past a box edge; only accepted states
// are checked against the domain.
fn rhs_unchecked(m: &ManifoldSpec, s: &GeodesicState) -> Result<(Vector2<f64>, Vector2<f64>)> {
    let gamma = m.christoffel_raw(&s.alpha)?;
    Ok((s.alpha_dot, -gamma.contract(&s.alpha_dot)))
}

/// `max(100, ⌈1000 · |t_end| · speed⌉)` with speed measured in the metric.
pub fn default_steps(m: &ManifoldSpec, u0: &LocalPoint, w0: &ParamVelocity, t_end: f64) -> Result<usize> {
    let speed = m.metric(u0)?.norm(w0);
    let arc = (t_end.abs() * speed * 1000.0).ceil();
    if !arc.is_finite() {
        return Err(GeoError::NonFinite(format!("geodesic arc length {arc}")));
    }
    Ok((arc as usize).max(100))
}

fn rk4_step(m: &ManifoldSpec, s: &GeodesicState, h: f64) -> Result<GeodesicState> {
    let shift = |base: &GeodesicState, k: &(Vector2<f64>, Vector2<f64>), c: f64| {
        GeodesicState::new(base.alpha + k.0 * c, base.alpha_dot + k.1 * c, base.t + c)
    };
    let k1 = rhs_unchecked(m, s)?;
    let k2 = rhs_unchecked(m, &shift(s, &k1, 0.5 * h))?;
    let k3 = rhs_unchecked(m, &shift(s, &k2, 0.5 * h))?;
    let k4 = rhs_unchecked(m, &shift(s, &k3, h))?;
    let alpha = s.alpha + (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0) * (h / 6.0);
    let alpha_dot = s.alpha_dot + (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1) * (h / 6.0);
    if !(alpha.iter().all(|v| v.is_finite()) && alpha_dot.iter().all(|v| v.is_finite())) {
        return Err(GeoError::NonFinite(format!("geodesic state at t = {}", s.t + h)));
    }
    Ok(GeodesicState::new(alpha, alpha_dot, s.t + h))
}

fn resolve_steps(
    m: &ManifoldSpec,
    u0: &LocalPoint,
    w0: &ParamVelocity,
    t_end: f64,
    steps: Option<usize>,
) -> Result<usize> {
    if !t_end.is_finite() || !w0.iter().all(|v| v.is_finite()) {
        return Err(GeoError::InvalidArgument(
            "geodesic time and velocity must be finite".into(),
        ));
    }
    match steps {
        Some(0) => Err(GeoError::InvalidArgument(
            "geodesic step count must be at least 1".into(),
        )),
        Some(n) => Ok(n),
        None => default_steps(m, u0, w0, t_end),
    }
}

/// Visits every RK4 state from `t = 0` to `t_end`.
fn integrate_with<F: FnMut(&GeodesicState)>(
    m: &ManifoldSpec,
    u0: &LocalPoint,
    w0: &ParamVelocity,
    t_end: f64,
    steps: Option<usize>,
    mut visit: F,
) -> Result<GeodesicState> {
    m.check(u0).map_err(|e| with_time(e, 0.0))?;
    let n = resolve_steps(m, u0, w0, t_end, steps)?;
    let h = t_end / n as f64;
    let mut s = GeodesicState::new(*u0, *w0, 0.0);
    visit(&s);
    for i in 1..=n {
        s = rk4_step(m, &s, h)?;
        // Pin the grid to i·h to avoid accumulating rounding in t.
        s.t = if i == n { t_end } else { i as f64 * h };
        m.check(&s.alpha).map_err(|e| with_time(e, s.t))?;
        visit(&s);
    }
    Ok(s)
}

/// Full RK4 trajectory from `(u0, w0)` to `t_end`, both endpoints included.
/// `steps = None` picks [`default_steps`].
pub fn integrate_geodesic(
    m: &ManifoldSpec,
    u0: &LocalPoint,
    w0: &ParamVelocity,
    t_end: f64,
    steps: Option<usize>,
) -> Result<Vec<GeodesicState>> {
    let mut out = Vec::new();
    integrate_with(m, u0, w0, t_end, steps, |s| out.push(*s))?;
    Ok(out)
}

/// Final state of [`integrate_geodesic`] without storing the trajectory.
pub fn geodesic_endpoint(
    m: &ManifoldSpec,
    u0: &LocalPoint,
    w0: &ParamVelocity,
    t_end: f64,
    steps: Option<usize>,
) -> Result<GeodesicState> {
    integrate_with(m, u0, w0, t_end, steps, |_| {})
}

/// `α(1)` for the geodesic with `α(0) = u`, `α̇(0) = w`. The injectivity
/// radius is not enforced, so large `w` may wrap around compact surfaces.
pub fn exp_map(m: &ManifoldSpec, u: &LocalPoint, w: &ParamVelocity) -> Result<LocalPoint> {
    exp_map_with_steps(m, u, w, None)
}

pub fn exp_map_with_steps(
    m: &ManifoldSpec,
    u: &LocalPoint,
    w: &ParamVelocity,
    steps: Option<usize>,
) -> Result<LocalPoint> {
    if w.iter().all(|v| *v == 0.0) {
        m.check(u)?;
        return Ok(*u);
    }
    Ok(geodesic_endpoint(m, u, w, 1.0, steps)?.alpha)
}
