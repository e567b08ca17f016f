//! Regression experiments with noise injection on embedded surfaces.

pub mod dataset;
pub mod error;
pub mod experiment;
pub mod mlp;
pub mod optim;
pub mod regularizer;
pub mod table;
pub mod target;
pub mod train;

pub use dataset::{generate_dataset, Dataset};
pub use error::{HarnessError, Result};
pub use experiment::{Experiment, Preset};
pub use mlp::{Mlp, ModelConfig};
pub use table::{run_grid, run_sweep, run_table, GridConfig, RunRecord, RunResult, Sweep, Table};
pub use target::{target_fn, TargetKind};
pub use train::{train, train_model, SeedRun, TrainConfig};
