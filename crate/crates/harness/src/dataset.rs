use geonoise_core::{rng, AmbientPoint, LocalPoint, ManifoldSpec};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::target::TargetKind;

const TRAIN_STREAM: u64 = 0x7472_6169_6e;
const TEST_STREAM: u64 = 0x7465_7374;

/// Noiseless samples of a target on a manifold. Indices `train` and `test`
/// point into the shared point lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub manifold: ManifoldSpec,
    pub target: TargetKind,
    pub inputs_local: Vec<LocalPoint>,
    pub inputs_ambient: Vec<AmbientPoint>,
    pub targets: Vec<f64>,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub seed: u64,
}

impl Dataset {
    pub fn train_len(&self) -> usize {
        self.train.len()
    }

    pub fn test_len(&self) -> usize {
        self.test.len()
    }
}

/// Train and test points drawn uniformly over the chart domain from
/// independent sub-seeds of `seed`.
pub fn generate_dataset(
    m: &ManifoldSpec,
    target: TargetKind,
    n_train: usize,
    n_test: usize,
    seed: u64,
) -> Result<Dataset> {
    if n_train == 0 || n_test == 0 {
        return Err(HarnessError::InvalidConfig(format!(
            "dataset sizes must be positive, got train={n_train} test={n_test}"
        )));
    }
    let mut inputs_local = m.sample_local_uniform(n_train, rng::derive_seed(seed, TRAIN_STREAM))?;
    inputs_local.extend(m.sample_local_uniform(n_test, rng::derive_seed(seed, TEST_STREAM))?);
    let inputs_ambient = inputs_local
        .iter()
        .map(|u| m.chart_embed(u))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let targets = inputs_local.iter().map(|u| target.eval(u)).collect();
    Ok(Dataset {
        manifold: m.clone(),
        target,
        inputs_local,
        inputs_ambient,
        targets,
        train: (0..n_train).collect(),
        test: (n_train..n_train + n_test).collect(),
        seed,
    })
}
