use geonoise_core::{Family, LocalPoint, ManifoldSpec};
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Regression targets as functions of the chart coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TargetKind {
    /// `y = u₁`
    FirstCoord,
    /// `y = u₂`
    SecondCoord,
    /// `y = sin u₂`
    SinSecond,
    /// `y = scale · cos u₁`, the height of a torus tube when `scale = 100c`.
    ScaledHeight { scale: f64 },
}

impl TargetKind {
    /// The usual target for a family. Tori thicker than `0.75a` count as beads,
    /// thinner ones as onion rings.
    pub fn default_for(m: &ManifoldSpec) -> Self {
        match &m.family {
            Family::Spheroid { .. } | Family::Plane | Family::BiconcaveDisc { .. } => TargetKind::SecondCoord,
            Family::Torus { a, c } if *c >= 0.75 * a => TargetKind::SinSecond,
            Family::Torus { c, .. } => TargetKind::ScaledHeight { scale: 100.0 * c },
            Family::SwissRoll { .. } => TargetKind::FirstCoord,
            Family::Deformed(chart) => TargetKind::default_for(&chart.base),
        }
    }

    pub fn eval(&self, u: &LocalPoint) -> f64 {
        match self {
            TargetKind::FirstCoord => u[0],
            TargetKind::SecondCoord => u[1],
            TargetKind::SinSecond => u[1].sin(),
            TargetKind::ScaledHeight { scale } => scale * u[0].cos(),
        }
    }
}

/// Default target of `m` at `u`.
pub fn target_fn(m: &ManifoldSpec, u: &LocalPoint) -> Result<f64> {
    m.check(u)?;
    Ok(TargetKind::default_for(m).eval(u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn examples() {
        let roll = ManifoldSpec::swiss_roll(1.0).unwrap();
        assert_eq!(target_fn(&roll, &LocalPoint::new(PI, 2.0)).unwrap(), PI);
        let onion = ManifoldSpec::torus(3.0, 0.5).unwrap();
        assert_eq!(target_fn(&onion, &LocalPoint::new(0.0, 1.3)).unwrap(), 50.0);
        let bead = ManifoldSpec::torus(1.0, 0.9).unwrap();
        assert_eq!(target_fn(&bead, &LocalPoint::new(2.0, 0.0)).unwrap(), 0.0);
        let sphere = ManifoldSpec::unit_sphere();
        assert_eq!(target_fn(&sphere, &LocalPoint::new(1.0, 2.5)).unwrap(), 2.5);
    }

    #[test]
    fn rejects_out_of_domain() {
        let roll = ManifoldSpec::swiss_roll(1.0).unwrap();
        assert!(target_fn(&roll, &LocalPoint::new(PI, 11.0)).is_err());
    }
}
