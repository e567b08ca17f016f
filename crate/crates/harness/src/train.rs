use geonoise_core::noise::perturb;
use geonoise_core::{rng, GeoError, NoiseConfig, Strategy};
use ndarray::Array1;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{HarnessError, Result};
use crate::mlp::{as_batch, Mlp, ModelConfig};
use crate::optim::Adam;

const INIT_STREAM: u64 = 1;
const NOISE_STREAM: u64 = 2;
const SHUFFLE_STREAM: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub noise: NoiseConfig,
    /// Redraws allowed when a noisy sample leaves the chart domain; after
    /// that the clean point is used for this epoch.
    pub max_resample: usize,
    /// Mini-batch size; `None` trains on the full batch.
    pub batch_size: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 500,
            learning_rate: 1e-3,
            noise: NoiseConfig::default(),
            max_resample: 10,
            batch_size: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(HarnessError::InvalidConfig("epochs must be at least 1".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(HarnessError::InvalidConfig(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == Some(0) {
            return Err(HarnessError::InvalidConfig("batch_size must be at least 1".into()));
        }
        self.noise.validate()?;
        Ok(())
    }
}

/// Outcome of one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRun {
    pub seed: u64,
    pub initial_train_mse: f64,
    pub train_mse: f64,
    pub test_mse: f64,
    /// Noise draws rejected for leaving the domain.
    pub resampled: usize,
    /// Points that fell back to their clean input.
    pub clean_fallbacks: usize,
}

/// Mean of `(f − y)²` over `idx`.
pub fn mse(model: &Mlp, data: &Dataset, idx: &[usize]) -> f64 {
    let x: Vec<_> = idx.iter().map(|&i| data.inputs_ambient[i]).collect();
    let f = model.forward(as_batch(&x).view());
    idx.iter()
        .zip(f.iter())
        .map(|(&i, f)| (f - data.targets[i]).powi(2))
        .sum::<f64>()
        / idx.len() as f64
}

fn retryable(e: &GeoError) -> bool {
    matches!(e, GeoError::Domain { .. }) || e.is_numerical()
}

/// Trains from the `seed`-initialised network and returns the final model.
pub fn train_model(data: &Dataset, mc: &ModelConfig, tc: &TrainConfig, seed: u64) -> Result<(Mlp, SeedRun)> {
    tc.validate()?;
    let mut model = Mlp::new(mc, &mut rng::stream(seed, INIT_STREAM))?;
    let mut noise_rng = rng::stream(rng::derive_seed(seed, tc.noise.seed), NOISE_STREAM);
    let mut opt = Adam::new(&model, tc.learning_rate);
    let n = data.train.len();
    let targets = Array1::from_iter(data.train.iter().map(|&i| data.targets[i]));
    let clean: Vec<_> = data.train.iter().map(|&i| data.inputs_ambient[i]).collect();
    let initial_train_mse = mse(&model, data, &data.train);
    let noisy = tc.noise.strategy != Strategy::None;
    let mut inputs = clean.clone();
    let (mut resampled, mut clean_fallbacks) = (0, 0);
    let mut order: Vec<usize> = (0..n).collect();
    let mut shuffle_rng = rng::stream(seed, SHUFFLE_STREAM);

    for epoch in 0..tc.epochs {
        if noisy {
            for (k, &i) in data.train.iter().enumerate() {
                inputs[k] = clean[k];
                let mut accepted = false;
                for _ in 0..=tc.max_resample {
                    match perturb(&data.manifold, &data.inputs_local[i], &tc.noise, &mut noise_rng) {
                        Ok(s) => {
                            inputs[k] = s.perturbed;
                            accepted = true;
                            break;
                        }
                        Err(e) if retryable(&e) => resampled += 1,
                        Err(e) => return Err(e.into()),
                    }
                }
                if !accepted {
                    clean_fallbacks += 1;
                }
            }
        }
        let batch = tc.batch_size.unwrap_or(n).min(n);
        if batch < n {
            order.shuffle(&mut shuffle_rng);
        }
        for chunk in order.chunks(batch) {
            let x: Vec<_> = chunk.iter().map(|&k| inputs[k]).collect();
            let y = Array1::from_iter(chunk.iter().map(|&k| targets[k]));
            let tape = model.forward_tape(as_batch(&x).view());
            let residual = tape.output() - &y;
            let loss = 0.5 * residual.mapv(|r| r * r).sum() / chunk.len() as f64;
            if !loss.is_finite() {
                return Err(HarnessError::NonFiniteLoss {
                    epoch,
                    strategy: tc.noise.strategy.tag().to_string(),
                    sigma2: tc.noise.sigma2,
                    seed,
                });
            }
            let (grads, _) = model.backward(&tape, &(residual / chunk.len() as f64));
            opt.step(&mut model, &grads);
        }
    }

    let run = SeedRun {
        seed,
        initial_train_mse,
        train_mse: mse(&model, data, &data.train),
        test_mse: mse(&model, data, &data.test),
        resampled,
        clean_fallbacks,
    };
    Ok((model, run))
}

pub fn train(data: &Dataset, mc: &ModelConfig, tc: &TrainConfig, seed: u64) -> Result<SeedRun> {
    Ok(train_model(data, mc, tc, seed)?.1)
}
