//! Flow-based deformation of a parametrised surface.
//!
//! A deformed point is `φ_T(X(u))` where `φ_t` solves `dφ/dt = v_t(φ)`. The
//! flow is integrated with explicit Euler; the chart Jacobian is carried along
//! on the same grid through `dJ/dt = ∂v/∂x(φ_t) · J`, so the deformed metric is
//! `J(T)ᵀ J(T)`. Every field kind has a closed-form spatial Jacobian.

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::manifold::{AmbientPoint, Jacobian, LocalPoint, ManifoldSpec, MetricTensor};
use crate::rng;

pub const DEFAULT_EULER_STEPS: usize = 64;

/// `a · exp(−‖x − c‖² / (2w²))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianBump {
    pub center: Vector3<f64>,
    pub amplitude: Vector3<f64>,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FieldKind {
    Zero,
    Constant(Vector3<f64>),
    /// `v(x) = A x`.
    Linear(Matrix3<f64>),
    /// Sum of Gaussian bumps. `seed` records how the bumps were generated.
    SmoothBump {
        bumps: Vec<GaussianBump>,
        seed: Option<u64>,
    },
}

/// Scalar factor `s(t)` multiplying the field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TimeModulation {
    Constant,
    /// `s(t) = 1 + slope · t`.
    Linear {
        slope: f64,
    },
}

impl TimeModulation {
    pub fn at(&self, t: f64) -> f64 {
        match self {
            TimeModulation::Constant => 1.0,
            TimeModulation::Linear { slope } => 1.0 + slope * t,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowField {
    pub kind: FieldKind,
    pub modulation: TimeModulation,
}

impl FlowField {
    pub fn new(kind: FieldKind) -> Self {
        Self {
            kind,
            modulation: TimeModulation::Constant,
        }
    }

    pub fn zero() -> Self {
        Self::new(FieldKind::Zero)
    }

    pub fn constant(c: Vector3<f64>) -> Self {
        Self::new(FieldKind::Constant(c))
    }

    pub fn linear(a: Matrix3<f64>) -> Self {
        Self::new(FieldKind::Linear(a))
    }

    /// `count` radial bumps centred on seeded random unit directions, each
    /// pushing along its own centre direction with the given amplitude.
    pub fn smooth_bump(count: usize, seed: u64, amplitude: f64, width: f64) -> Result<Self> {
        if count == 0 || !(width > 0.0) || !amplitude.is_finite() {
            return Err(GeoError::InvalidSpec(format!(
                "smooth bump field needs count >= 1, width > 0 and finite amplitude (got {count}, {width}, {amplitude})"
            )));
        }
        let mut rng = rng::seeded(seed);
        let bumps = (0..count)
            .map(|_| {
                let dir = loop {
                    let v = Vector3::new(
                        rng.sample::<f64, _>(StandardNormal),
                        rng.sample::<f64, _>(StandardNormal),
                        rng.sample::<f64, _>(StandardNormal),
                    );
                    let n = v.norm();
                    if n > 1e-8 {
                        break v / n;
                    }
                };
                GaussianBump {
                    center: dir,
                    amplitude: dir * amplitude,
                    width,
                }
            })
            .collect();
        Ok(Self::new(FieldKind::SmoothBump {
            bumps,
            seed: Some(seed),
        }))
    }

    /// Four bumps, seed 7, amplitude 0.3, width 0.5.
    pub fn default_bumps() -> Self {
        Self::smooth_bump(4, 7, 0.3, 0.5).expect("default bump parameters are valid")
    }

    pub fn with_modulation(mut self, modulation: TimeModulation) -> Self {
        self.modulation = modulation;
        self
    }

    pub fn is_zero(&self) -> bool {
        match &self.kind {
            FieldKind::Zero => true,
            FieldKind::Constant(c) => c.iter().all(|v| *v == 0.0),
            FieldKind::Linear(a) => a.iter().all(|v| *v == 0.0),
            FieldKind::SmoothBump { bumps, .. } => bumps.iter().all(|b| b.amplitude.iter().all(|v| *v == 0.0)),
        }
    }

    /// `v_t(x)`.
    pub fn value(&self, x: &AmbientPoint, t: f64) -> Vector3<f64> {
        let s = self.modulation.at(t);
        let v = match &self.kind {
            FieldKind::Zero => Vector3::zeros(),
            FieldKind::Constant(c) => *c,
            FieldKind::Linear(a) => a * x,
            FieldKind::SmoothBump { bumps, .. } => bumps.iter().fold(Vector3::zeros(), |acc, b| {
                let d = x - b.center;
                acc + b.amplitude * (-d.norm_squared() / (2.0 * b.width * b.width)).exp()
            }),
        };
        v * s
    }

    /// `∂v_t/∂x` at `x`.
    pub fn jacobian(&self, x: &AmbientPoint, t: f64) -> Matrix3<f64> {
        let s = self.modulation.at(t);
        let j = match &self.kind {
            FieldKind::Zero | FieldKind::Constant(_) => Matrix3::zeros(),
            FieldKind::Linear(a) => *a,
            FieldKind::SmoothBump { bumps, .. } => bumps.iter().fold(Matrix3::zeros(), |acc, b| {
                let d = x - b.center;
                let w2 = b.width * b.width;
                let phi = (-d.norm_squared() / (2.0 * w2)).exp();
                acc - b.amplitude * d.transpose() * (phi / w2)
            }),
        };
        j * s
    }

    /// Value and Jacobian together, sharing the bump exponentials.
    fn value_and_jacobian(&self, x: &AmbientPoint, t: f64) -> (Vector3<f64>, Matrix3<f64>) {
        match &self.kind {
            FieldKind::SmoothBump { bumps, .. } => {
                let s = self.modulation.at(t);
                let mut v = Vector3::zeros();
                let mut j = Matrix3::zeros();
                for b in bumps {
                    let d = x - b.center;
                    let w2 = b.width * b.width;
                    let phi = (-d.norm_squared() / (2.0 * w2)).exp();
                    v += b.amplitude * phi;
                    j -= b.amplitude * d.transpose() * (phi / w2);
                }
                (v * s, j * s)
            }
            _ => (self.value(x, t), self.jacobian(x, t)),
        }
    }
}

/// A base chart deformed by the time-`t_end` flow of `field`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeformedChart {
    pub base: ManifoldSpec,
    pub field: FlowField,
    pub t_end: f64,
    pub euler_steps: usize,
}

fn finite3(x: &Vector3<f64>) -> bool {
    x.iter().all(|v| v.is_finite())
}

impl DeformedChart {
    pub fn new(base: ManifoldSpec, field: FlowField, t_end: f64, euler_steps: usize) -> Result<Self> {
        if !(t_end.is_finite() && t_end >= 0.0) {
            return Err(GeoError::InvalidSpec(format!(
                "flow time must be finite and >= 0, got {t_end}"
            )));
        }
        if euler_steps == 0 {
            return Err(GeoError::InvalidSpec("euler_steps must be at least 1".into()));
        }
        Ok(Self {
            base,
            field,
            t_end,
            euler_steps,
        })
    }

    /// No integration happens when the flow is the identity.
    pub fn is_identity(&self) -> bool {
        self.t_end == 0.0 || self.field.is_zero()
    }

    fn dt(&self) -> f64 {
        self.t_end / self.euler_steps as f64
    }

    /// `φ_T(x)` by explicit Euler.
    pub fn flow_integrate(&self, x: &AmbientPoint) -> Result<AmbientPoint> {
        if !finite3(x) {
            return Err(GeoError::NonFinite(format!("flow input {x:?}")));
        }
        if self.is_identity() {
            return Ok(*x);
        }
        let dt = self.dt();
        let mut p = *x;
        for i in 0..self.euler_steps {
            p += self.field.value(&p, i as f64 * dt) * dt;
        }
        if !finite3(&p) {
            return Err(GeoError::NonFinite("flow state overflowed".into()));
        }
        Ok(p)
    }

    /// Approximate `φ_T⁻¹(x̃)`: explicit Euler on the reversed field `−v_{T−t}`.
    pub fn flow_invert(&self, x_tilde: &AmbientPoint) -> Result<AmbientPoint> {
        if !finite3(x_tilde) {
            return Err(GeoError::NonFinite(format!("flow input {x_tilde:?}")));
        }
        if self.is_identity() {
            return Ok(*x_tilde);
        }
        let dt = self.dt();
        let mut p = *x_tilde;
        for i in 0..self.euler_steps {
            p -= self.field.value(&p, self.t_end - i as f64 * dt) * dt;
        }
        if !finite3(&p) {
            return Err(GeoError::NonFinite("inverse flow state overflowed".into()));
        }
        Ok(p)
    }

    /// Co-integrates the flow and `dJ/dt = ∂v/∂x · J` from `(x, j0)`.
    pub fn flow_with_jacobian(&self, x: &AmbientPoint, j0: &Jacobian) -> Result<(AmbientPoint, Jacobian)> {
        if self.is_identity() {
            return Ok((*x, *j0));
        }
        let dt = self.dt();
        let mut p = *x;
        let mut j = *j0;
        for i in 0..self.euler_steps {
            let (v, jv) = self.field.value_and_jacobian(&p, i as f64 * dt);
            j += jv * j * dt;
            p += v * dt;
        }
        if !finite3(&p) || !j.iter().all(|v| v.is_finite()) {
            return Err(GeoError::NonFinite("flow Jacobian overflowed".into()));
        }
        Ok((p, j))
    }

    pub(crate) fn embed(&self, u: &LocalPoint) -> Result<AmbientPoint> {
        self.flow_integrate(&self.base.embed_raw(u)?)
    }

    pub(crate) fn flow_jacobian_raw(&self, u: &LocalPoint) -> Result<Jacobian> {
        let x = self.base.embed_raw(u)?;
        let j0 = self.base.jacobian_raw(u)?;
        Ok(self.flow_with_jacobian(&x, &j0)?.1)
    }

    /// `J_u(T) = ∂φ_T(X(u))/∂u`.
    pub fn flow_jacobian(&self, u: &LocalPoint) -> Result<Jacobian> {
        self.base.check(u)?;
        self.flow_jacobian_raw(u)
    }

    /// `g̃ = J_u(T)ᵀ J_u(T)`.
    pub fn deformed_metric(&self, u: &LocalPoint) -> Result<MetricTensor> {
        if self.is_identity() {
            return self.base.metric(u);
        }
        let j = self.flow_jacobian(u)?;
        Ok(MetricTensor::new(j.transpose() * j, *u))
    }
}
