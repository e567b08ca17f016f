//! σ² grids over strategies and seeds, and their aggregation.

use std::collections::BTreeMap;

use geonoise_core::{NoiseConfig, Strategy};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::generate_dataset;
use crate::error::{HarnessError, Result};
use crate::experiment::Experiment;
use crate::mlp::ModelConfig;
use crate::train::{train, TrainConfig};

/// `n` log-spaced values from `lo` to `hi`, both included.
pub fn sigma2_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..n)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64))
        .collect()
}

pub fn default_sigma2_grid() -> Vec<f64> {
    sigma2_grid(1e-4, 1.0, 8)
}

pub const DEFAULT_SEEDS: [u64; 5] = [0, 1, 2, 3, 4];

/// Everything shared by the runs of a table or sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub strategies: Vec<Strategy>,
    pub sigma2_grid: Vec<f64>,
    pub seeds: Vec<u64>,
    pub epochs: usize,
    pub batch_size: Option<usize>,
    pub model: ModelConfig,
    /// Step counts, geodesic convention and noise seed; strategy and σ² are
    /// filled in per run.
    pub noise: NoiseConfig,
    /// Worker threads; `None` lets rayon decide.
    pub jobs: Option<usize>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            strategies: Strategy::ALL.to_vec(),
            sigma2_grid: default_sigma2_grid(),
            seeds: DEFAULT_SEEDS.to_vec(),
            epochs: 500,
            batch_size: None,
            model: ModelConfig::default(),
            noise: NoiseConfig::default(),
            jobs: None,
        }
    }
}

impl GridConfig {
    fn validate(&self) -> Result<()> {
        if self.strategies.is_empty() || self.sigma2_grid.is_empty() || self.seeds.is_empty() {
            return Err(HarnessError::InvalidConfig(
                "strategies, sigma2 grid and seeds must be non-empty".into(),
            ));
        }
        if let Some(bad) = self.sigma2_grid.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
            return Err(HarnessError::InvalidConfig(format!("invalid sigma2 {bad}")));
        }
        if self.jobs == Some(0) {
            return Err(HarnessError::InvalidConfig("jobs must be at least 1".into()));
        }
        self.model.validate()
    }
}

/// One trained network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub manifold: String,
    pub strategy: Strategy,
    pub sigma2: f64,
    pub seed: u64,
    pub train_mse: f64,
    pub test_mse: f64,
    pub resampled: usize,
    pub clean_fallbacks: usize,
}

/// Seed statistics for one (manifold, strategy, σ²) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub manifold: String,
    pub strategy: Strategy,
    pub sigma2: f64,
    pub per_seed_mse: Vec<f64>,
    pub mean_mse: f64,
    /// Sample standard deviation over seeds divided by `√seeds`.
    pub sem: f64,
    pub relative_mse: f64,
    pub relative_sem: f64,
}

pub fn mean_and_sem(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

struct Job<'a> {
    experiment: &'a Experiment,
    strategy: Strategy,
    sigma2: f64,
    seed: u64,
}

fn run_job(job: &Job, cfg: &GridConfig) -> Result<RunRecord> {
    let e = job.experiment;
    let data = generate_dataset(&e.manifold, e.target, e.n_train, e.n_test, job.seed)?;
    let tc = TrainConfig {
        epochs: cfg.epochs,
        learning_rate: e.learning_rate,
        noise: NoiseConfig {
            strategy: job.strategy,
            sigma2: job.sigma2,
            ..cfg.noise
        },
        batch_size: cfg.batch_size,
        ..TrainConfig::default()
    };
    let run = train(&data, &cfg.model, &tc, job.seed)?;
    Ok(RunRecord {
        manifold: e.name.clone(),
        strategy: job.strategy,
        sigma2: job.sigma2,
        seed: job.seed,
        train_mse: run.train_mse,
        test_mse: run.test_mse,
        resampled: run.resampled,
        clean_fallbacks: run.clean_fallbacks,
    })
}

/// Trains every (experiment, strategy, σ², seed) combination. The baseline
/// ignores σ², so it is trained once per seed and its record repeated for
/// each grid value. A baseline is always included.
pub fn run_grid(experiments: &[Experiment], cfg: &GridConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let mut jobs = Vec::new();
    for e in experiments {
        for &seed in &cfg.seeds {
            jobs.push(Job {
                experiment: e,
                strategy: Strategy::None,
                sigma2: 0.0,
                seed,
            });
        }
        for &strategy in cfg.strategies.iter().filter(|s| **s != Strategy::None) {
            for &sigma2 in &cfg.sigma2_grid {
                for &seed in &cfg.seeds {
                    jobs.push(Job {
                        experiment: e,
                        strategy,
                        sigma2,
                        seed,
                    });
                }
            }
        }
    }
    let exec = || jobs.par_iter().map(|j| run_job(j, cfg)).collect::<Result<Vec<_>>>();
    let runs = match cfg.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| HarnessError::InvalidConfig(format!("thread pool: {e}")))?
            .install(exec)?,
        None => exec()?,
    };

    let mut records = Vec::new();
    for r in runs {
        if r.strategy == Strategy::None {
            for &sigma2 in &cfg.sigma2_grid {
                records.push(RunRecord { sigma2, ..r.clone() });
            }
        } else {
            records.push(r);
        }
    }
    Ok(records)
}

/// Seed statistics per (manifold, strategy, σ²), relative to the manifold's
/// baseline mean. Ordering follows the first appearance in `records`.
pub fn summarize(records: &[RunRecord]) -> Result<Vec<RunResult>> {
    let mut order: Vec<(String, Strategy, u64)> = Vec::new();
    let mut cells: BTreeMap<(String, Strategy, u64), Vec<f64>> = BTreeMap::new();
    for r in records {
        let key = (r.manifold.clone(), r.strategy, r.sigma2.to_bits());
        let entry = cells.entry(key.clone()).or_insert_with(|| {
            order.push(key);
            Vec::new()
        });
        entry.push(r.test_mse);
    }
    let mut baseline: BTreeMap<String, f64> = BTreeMap::new();
    for ((m, s, _), v) in &cells {
        if *s == Strategy::None {
            baseline.entry(m.clone()).or_insert_with(|| mean_and_sem(v).0);
        }
    }
    order
        .into_iter()
        .map(|key| {
            let per_seed_mse = cells[&key].clone();
            let (mean_mse, sem) = mean_and_sem(&per_seed_mse);
            let base = *baseline
                .get(&key.0)
                .ok_or_else(|| HarnessError::InvalidConfig(format!("no baseline runs for {}", key.0)))?;
            Ok(RunResult {
                manifold: key.0,
                strategy: key.1,
                sigma2: f64::from_bits(key.2),
                per_seed_mse,
                mean_mse,
                sem,
                relative_mse: mean_mse / base,
                relative_sem: sem / base,
            })
        })
        .collect()
}

/// The σ² with the lowest mean test MSE for each (manifold, strategy); ties
/// go to the smaller σ².
pub fn best_per_strategy(results: &[RunResult]) -> Vec<RunResult> {
    let mut best: Vec<RunResult> = Vec::new();
    for r in results {
        match best
            .iter_mut()
            .find(|b| b.manifold == r.manifold && b.strategy == r.strategy)
        {
            Some(b) if (r.mean_mse, r.sigma2) < (b.mean_mse, b.sigma2) => *b = r.clone(),
            Some(_) => {}
            None => best.push(r.clone()),
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub records: Vec<RunRecord>,
    pub results: Vec<RunResult>,
    pub best: Vec<RunResult>,
}

impl Table {
    pub fn best(&self, manifold: &str, strategy: Strategy) -> Option<&RunResult> {
        self.best
            .iter()
            .find(|r| r.manifold == manifold && r.strategy == strategy)
    }

    /// Rows B/A/T/G/BM, one column per manifold, cells `rel ± sem`.
    pub fn render_csv(&self) -> String {
        let mut manifolds: Vec<&str> = Vec::new();
        for r in &self.best {
            if !manifolds.contains(&r.manifold.as_str()) {
                manifolds.push(&r.manifold);
            }
        }
        let mut out = format!("strategy,{}\n", manifolds.join(","));
        for s in Strategy::ALL {
            let cells: Vec<String> = manifolds
                .iter()
                .map(|m| match self.best(m, s) {
                    Some(r) => format!("{:.2} ± {:.2}", r.relative_mse, r.relative_sem),
                    None => String::new(),
                })
                .collect();
            if cells.iter().any(|c| !c.is_empty()) {
                out.push_str(&format!("{},{}\n", s.tag(), cells.join(",")));
            }
        }
        out
    }
}

/// Trains the grid and reports the best σ² per strategy relative to the baseline.
pub fn run_table(experiments: &[Experiment], cfg: &GridConfig) -> Result<Table> {
    let records = run_grid(experiments, cfg)?;
    let results = summarize(&records)?;
    let best = best_per_strategy(&results);
    Ok(Table { records, results, best })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub records: Vec<RunResult>,
    pub runs: Vec<RunRecord>,
}

impl Sweep {
    pub fn curve(&self, strategy: Strategy) -> Vec<&RunResult> {
        self.records.iter().filter(|r| r.strategy == strategy).collect()
    }

    /// Largest mean test loss over the grid.
    pub fn worst(&self, strategy: Strategy) -> Option<f64> {
        self.curve(strategy).iter().map(|r| r.mean_mse).reduce(f64::max)
    }
}

/// Per-σ² test-loss curves for one manifold.
pub fn run_sweep(experiment: &Experiment, cfg: &GridConfig) -> Result<Sweep> {
    let g = &cfg.sigma2_grid;
    if g.len() < 5 || g.windows(2).any(|w| !(w[0] > 0.0 && w[1] > w[0])) {
        return Err(HarnessError::InvalidConfig(
            "a sweep needs at least 5 increasing positive sigma2 values".into(),
        ));
    }
    let runs = run_grid(std::slice::from_ref(experiment), cfg)?;
    Ok(Sweep {
        records: summarize(&runs)?,
        runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints() {
        let g = default_sigma2_grid();
        assert_eq!(g.len(), 8);
        assert!((g[0] - 1e-4).abs() < 1e-18 && (g[7] - 1.0).abs() < 1e-12);
        assert!(g.windows(2).all(|w| (w[1] / w[0] - g[1] / g[0]).abs() < 1e-9));
    }

    #[test]
    fn sem_of_constant_is_zero() {
        assert_eq!(mean_and_sem(&[2.0, 2.0, 2.0]), (2.0, 0.0));
        let (m, s) = mean_and_sem(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-12);
    }
}
