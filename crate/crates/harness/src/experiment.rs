use std::fmt;
use std::str::FromStr;

use geonoise_core::{FlowField, ManifoldSpec};
use serde::{Deserialize, Serialize};

use crate::target::TargetKind;

/// The manifolds of the regression benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Preset {
    Sphere,
    SqueezedSphere,
    DeformedSphere,
    Bead,
    OnionRing,
    SwissRoll,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::Sphere,
        Preset::SqueezedSphere,
        Preset::DeformedSphere,
        Preset::Bead,
        Preset::OnionRing,
        Preset::SwissRoll,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Sphere => "Sphere",
            Preset::SqueezedSphere => "SqueezedSphere",
            Preset::DeformedSphere => "DeformedSphere",
            Preset::Bead => "Bead",
            Preset::OnionRing => "OnionRing",
            Preset::SwissRoll => "SwissRoll",
        }
    }

    pub fn experiment(&self) -> Experiment {
        let (manifold, target) = match self {
            Preset::Sphere => (ManifoldSpec::unit_sphere(), TargetKind::SecondCoord),
            Preset::SqueezedSphere => (ManifoldSpec::spheroid(1.0, 0.5).unwrap(), TargetKind::SecondCoord),
            Preset::DeformedSphere => (
                ManifoldSpec::deformed(ManifoldSpec::unit_sphere(), FlowField::default_bumps(), 1.0, 64).unwrap(),
                TargetKind::SecondCoord,
            ),
            Preset::Bead => (ManifoldSpec::torus(1.0, 0.9).unwrap(), TargetKind::SinSecond),
            Preset::OnionRing => (
                ManifoldSpec::torus(3.0, 0.5).unwrap(),
                TargetKind::ScaledHeight { scale: 50.0 },
            ),
            Preset::SwissRoll => (ManifoldSpec::swiss_roll(0.5).unwrap(), TargetKind::FirstCoord),
        };
        let deformed = *self == Preset::DeformedSphere;
        Experiment {
            name: self.name().to_string(),
            manifold,
            target,
            n_train: if deformed { 40 } else { 200 },
            n_test: 1000,
            learning_rate: if deformed { 0.005 } else { 1e-3 },
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        Preset::ALL
            .into_iter()
            .find(|p| p.name().to_ascii_lowercase() == key)
            .ok_or_else(|| format!("unknown manifold preset `{s}`"))
    }
}

/// A manifold, its target and the data/optimiser sizes used with it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub name: String,
    pub manifold: ManifoldSpec,
    pub target: TargetKind,
    pub n_train: usize,
    pub n_test: usize,
    pub learning_rate: f64,
}

impl Experiment {
    /// An experiment on an arbitrary manifold with its default target.
    pub fn custom(name: impl Into<String>, manifold: ManifoldSpec) -> Self {
        let target = TargetKind::default_for(&manifold);
        Self {
            name: name.into(),
            manifold,
            target,
            n_train: 200,
            n_test: 1000,
            learning_rate: 1e-3,
        }
    }
}
