use std::fmt;

use geonoise_core::deformation::DeformedChart;
use geonoise_core::geodesic::integrate_geodesic;
use geonoise_core::noise::{brownian_path, perturb};
use geonoise_core::{rng, Family, GeoError, ManifoldSpec, Strategy};
use geonoise_harness::regularizer::{mc_regularizer_check, Estimate};
use geonoise_harness::table::run_sweep;
use geonoise_harness::{
    generate_dataset, run_table, train_model, GridConfig, HarnessError, ModelConfig, RunRecord, RunResult,
};
use serde_json::{json, Value};

use crate::config::{self, Command, ConfigError, RunSpec};
use crate::output::Artifact;

const MAX_REDRAWS: usize = 100;

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Run(HarnessError),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Run(e) if e.is_numerical() => 2,
            CliError::Run(_) => 1,
            CliError::Io(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(ConfigError::Parse { .. }) => "ParseError",
            CliError::Config(ConfigError::Validation { .. }) => "ValidationError",
            CliError::Run(HarnessError::Geo(GeoError::Domain { .. })) => "DomainError",
            CliError::Run(e) if e.is_numerical() => "NumericalError",
            CliError::Run(_) => "ValidationError",
            CliError::Io(_) => "IoError",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Run(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        CliError::Run(e)
    }
}

impl From<GeoError> for CliError {
    fn from(e: GeoError) -> Self {
        CliError::Run(e.into())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn model_config(spec: &RunSpec) -> Result<ModelConfig> {
    Ok(ModelConfig {
        hidden_layers: config::get_parsed(&spec.resolved, "train.hidden_layers")?,
        width: config::get_parsed(&spec.resolved, "train.width")?,
        ..ModelConfig::default()
    })
}

pub fn dispatch(spec: &RunSpec) -> Result<Artifact> {
    match spec.command {
        Command::Sample => sample(spec),
        Command::Geodesic => geodesic(spec),
        Command::Brownian => brownian(spec),
        Command::Deform => deform(spec),
        Command::Train => train(spec),
        Command::Table => table(spec),
        Command::Sweep => sweep(spec),
        Command::CheckReg => check_reg(spec),
    }
}

fn sample(spec: &RunSpec) -> Result<Artifact> {
    let m = spec.manifold();
    let n: usize = config::get_parsed(&spec.resolved, "sample.n")?;
    let points = m.sample_local_uniform(n, spec.seed)?;
    let mut r = rng::stream(rng::derive_seed(spec.seed, spec.noise.seed), 1);
    let mut art = Artifact::new(vec![
        "index", "u1", "u2", "x1", "x2", "x3", "y1", "y2", "y3", "v1", "v2",
    ]);
    art.seeds = vec![spec.seed, spec.noise.seed];
    for (i, u) in points.iter().enumerate() {
        // Draws leaving the chart are redrawn, as in training.
        let mut attempt = 0;
        let s = loop {
            match perturb(m, u, &spec.noise, &mut r) {
                Ok(s) => break s,
                Err(e) if attempt < MAX_REDRAWS && (matches!(e, GeoError::Domain { .. }) || e.is_numerical()) => {
                    attempt += 1
                }
                Err(e) => return Err(e.into()),
            }
        };
        let (v1, v2) = match s.local {
            Some(v) => (json!(v[0]), json!(v[1])),
            None => (Value::Null, Value::Null),
        };
        art.push(vec![
            json!(i),
            json!(u[0]),
            json!(u[1]),
            json!(s.original[0]),
            json!(s.original[1]),
            json!(s.original[2]),
            json!(s.perturbed[0]),
            json!(s.perturbed[1]),
            json!(s.perturbed[2]),
            v1,
            v2,
        ]);
    }
    Ok(art)
}

fn geodesic(spec: &RunSpec) -> Result<Artifact> {
    let m = spec.manifold();
    let r = &spec.resolved;
    let u = config::local_point(r, "geodesic.u", m)?;
    let w = nalgebra::Vector2::from(config::get_reals::<2>(r, "geodesic.w")?);
    let t_end: f64 = config::get_parsed(r, "geodesic.t_end")?;
    let steps: Option<usize> = config::get_optional(r, "geodesic.steps")?;
    let mut art = Artifact::new(vec!["t", "u1", "u2", "x1", "x2", "x3"]);
    for s in integrate_geodesic(m, &u, &w, t_end, steps)? {
        let x = m.chart_embed(&s.alpha)?;
        art.push(vec![
            json!(s.t),
            json!(s.alpha[0]),
            json!(s.alpha[1]),
            json!(x[0]),
            json!(x[1]),
            json!(x[2]),
        ]);
    }
    Ok(art)
}

fn brownian(spec: &RunSpec) -> Result<Artifact> {
    let m = spec.manifold();
    let r = &spec.resolved;
    let u = config::local_point(r, "brownian.u", m)?;
    let total: f64 = config::get_parsed(r, "brownian.t")?;
    let paths: usize = config::get_parsed(r, "brownian.paths")?;
    let steps = spec.noise.bm_steps;
    let mut rng_ = rng::stream(spec.seed, 2);
    let mut art = Artifact::new(vec!["path", "step", "t", "u1", "u2", "x1", "x2", "x3"]);
    art.seeds = vec![spec.seed];
    for p in 0..paths {
        for (k, v) in brownian_path(m, &u, total, steps, &mut rng_)?.iter().enumerate() {
            let x = m.chart_embed(v)?;
            art.push(vec![
                json!(p),
                json!(k),
                json!(total * k as f64 / steps as f64),
                json!(v[0]),
                json!(v[1]),
                json!(x[0]),
                json!(x[1]),
                json!(x[2]),
            ]);
        }
    }
    Ok(art)
}

fn deformed_chart(m: &ManifoldSpec) -> Result<&DeformedChart> {
    match &m.family {
        Family::Deformed(c) => Ok(c),
        f => Err(ConfigError::Validation {
            key: "manifold.family".into(),
            message: format!("deform needs a deformed manifold, got `{}`", f.name()),
        }
        .into()),
    }
}

fn deform(spec: &RunSpec) -> Result<Artifact> {
    let m = spec.manifold();
    let chart = deformed_chart(m)?;
    let n: usize = config::get_parsed(&spec.resolved, "sample.n")?;
    let mut art = Artifact::new(vec!["u1", "u2", "x1", "x2", "x3", "y1", "y2", "y3", "round_trip"]);
    art.seeds = vec![spec.seed];
    for u in m.sample_local_uniform(n, spec.seed)? {
        let x = chart.base.chart_embed(&u)?;
        let y = m.chart_embed(&u)?;
        let back = chart.flow_invert(&y)?;
        art.push(vec![
            json!(u[0]),
            json!(u[1]),
            json!(x[0]),
            json!(x[1]),
            json!(x[2]),
            json!(y[0]),
            json!(y[1]),
            json!(y[2]),
            json!((back - x).norm()),
        ]);
    }
    Ok(art)
}

fn train(spec: &RunSpec) -> Result<Artifact> {
    let e = &spec.experiment;
    let tc = spec.train.expect("train config is built for training commands");
    let mc = model_config(spec)?;
    let seeds = config::seed_list(&spec.resolved)?;
    let mut art = Artifact::new(vec![
        "manifold",
        "strategy",
        "sigma2",
        "seed",
        "initial_train_mse",
        "train_mse",
        "test_mse",
        "resampled",
        "clean_fallbacks",
    ]);
    for &seed in &seeds {
        let data = generate_dataset(&e.manifold, e.target, e.n_train, e.n_test, seed)?;
        let (_, run) = train_model(&data, &mc, &tc, seed)?;
        art.push(vec![
            json!(e.name),
            json!(tc.noise.strategy.tag()),
            json!(tc.noise.sigma2),
            json!(seed),
            json!(run.initial_train_mse),
            json!(run.train_mse),
            json!(run.test_mse),
            json!(run.resampled),
            json!(run.clean_fallbacks),
        ]);
    }
    art.seeds = seeds;
    Ok(art)
}

fn grid_config(spec: &RunSpec) -> Result<GridConfig> {
    let r = &spec.resolved;
    let tc = spec.train.expect("train config is built for training commands");
    Ok(GridConfig {
        strategies: config::strategy_list(r)?,
        sigma2_grid: config::sigma2_list(r)?,
        seeds: config::seed_list(r)?,
        epochs: tc.epochs,
        batch_size: tc.batch_size,
        model: model_config(spec)?,
        noise: spec.noise,
        jobs: spec.jobs,
    })
}

const RECORD_COLUMNS: [&str; 8] = [
    "manifold",
    "strategy",
    "sigma2",
    "seed",
    "train_mse",
    "test_mse",
    "resampled",
    "clean_fallbacks",
];

fn record_row(r: &RunRecord) -> Vec<Value> {
    vec![
        json!(r.manifold),
        json!(r.strategy.tag()),
        json!(r.sigma2),
        json!(r.seed),
        json!(r.train_mse),
        json!(r.test_mse),
        json!(r.resampled),
        json!(r.clean_fallbacks),
    ]
}

fn result_value(r: &RunResult) -> Value {
    json!({
        "manifold": r.manifold,
        "strategy": r.strategy.tag(),
        "sigma2": r.sigma2,
        "mean_mse": r.mean_mse,
        "sem": r.sem,
        "relative_mse": r.relative_mse,
        "relative_sem": r.relative_sem,
        "per_seed_mse": r.per_seed_mse,
    })
}

fn table(spec: &RunSpec) -> Result<Artifact> {
    let cfg = grid_config(spec)?;
    let mut experiments = Vec::new();
    for p in config::preset_list(&spec.resolved, "table.manifolds")? {
        let mut e = p.experiment();
        for (key, slot) in [("train.n_train", &mut e.n_train), ("train.n_test", &mut e.n_test)] {
            if let Some(n) = config::get_optional::<usize>(&spec.resolved, key)? {
                *slot = n;
            }
        }
        if let Some(lr) = config::get_optional::<f64>(&spec.resolved, "train.learning_rate")? {
            e.learning_rate = lr;
        }
        experiments.push(e);
    }
    let t = run_table(&experiments, &cfg)?;
    let mut art = Artifact::new(RECORD_COLUMNS.to_vec());
    for r in &t.records {
        art.push(record_row(r));
    }
    art.aggregates = Some(Value::Array(t.best.iter().map(result_value).collect()));
    art.csv_body = Some(t.render_csv());
    art.seeds = cfg.seeds;
    Ok(art)
}

fn sweep(spec: &RunSpec) -> Result<Artifact> {
    let cfg = grid_config(spec)?;
    let s = run_sweep(&spec.experiment, &cfg)?;
    let mut art = Artifact::new(vec![
        "manifold",
        "strategy",
        "sigma2",
        "mean_mse",
        "sem",
        "relative_mse",
        "relative_sem",
    ]);
    for r in &s.records {
        art.push(vec![
            json!(r.manifold),
            json!(r.strategy.tag()),
            json!(r.sigma2),
            json!(r.mean_mse),
            json!(r.sem),
            json!(r.relative_mse),
            json!(r.relative_sem),
        ]);
    }
    let worst: Vec<Value> = cfg
        .strategies
        .iter()
        .filter(|s| **s != Strategy::None)
        .map(|&st| json!({"strategy": st.tag(), "worst_relative_mse": s.worst(st)}))
        .collect();
    art.aggregates = Some(json!({
        "worst": worst,
        "runs": s.runs.iter().map(|r| record_row(r)).collect::<Vec<_>>(),
    }));
    art.seeds = cfg.seeds;
    Ok(art)
}

fn check_reg(spec: &RunSpec) -> Result<Artifact> {
    let e = &spec.experiment;
    let r = &spec.resolved;
    let tc = spec.train.expect("train config is built for training commands");
    let points: usize = config::get_parsed(r, "reg.points")?;
    let n_mc: usize = config::get_parsed(r, "reg.n_mc")?;
    let sigma2s: Vec<f64> = config::get_list(r, "reg.sigma2")?;
    let data = generate_dataset(&e.manifold, e.target, points, 1, spec.seed)?;
    let (model, run) = train_model(&data, &model_config(spec)?, &tc, spec.seed)?;
    let pts: Vec<_> = data.train.iter().map(|&i| data.inputs_local[i]).collect();
    let ys: Vec<_> = data.train.iter().map(|&i| data.targets[i]).collect();
    let mut art = Artifact::new(vec![
        "sigma2",
        "noise",
        "mc_mean",
        "mc_se",
        "predicted",
        "predicted_full",
        "z",
        "within",
        "gradient_rel_err",
        "train_mse",
    ]);
    let mc_seed = rng::derive_seed(spec.seed, spec.noise.seed);
    for &sigma2 in &sigma2s {
        let rep = mc_regularizer_check(&model, &e.manifold, &pts, &ys, sigma2, n_mc, mc_seed)?;
        let row = |name: &str, est: &Estimate| {
            vec![
                json!(sigma2),
                json!(name),
                json!(est.mc_mean),
                json!(est.mc_se),
                json!(est.predicted),
                json!(est.predicted_full),
                json!(est.z),
                json!(est.within),
                json!(rep.gradient_rel_err),
                json!(run.train_mse),
            ]
        };
        art.push(row("ambient", &rep.ambient));
        art.push(row("tangent", &rep.tangent));
    }
    art.seeds = vec![spec.seed, mc_seed];
    Ok(art)
}
