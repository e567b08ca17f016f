//! Flat `[section]` / `key = value` configuration with a fixed key set.

use std::collections::BTreeMap;
use std::fmt;

use geonoise_core::{FlowField, GeodesicNorm, ManifoldSpec, NoiseConfig, Strategy, TimeModulation};
use geonoise_harness::{Experiment, Preset, TrainConfig};
use nalgebra::{Matrix3, Vector3};
use sha2::{Digest, Sha256};

/// Every accepted key with its default. An empty default means "derived".
const KEYS: &[(&str, &str)] = &[
    ("command", ""),
    ("out", "-"),
    ("format", "csv"),
    ("seed", "0"),
    ("jobs", ""),
    ("manifold.preset", ""),
    ("manifold.family", "sphere"),
    ("manifold.base", "sphere"),
    ("manifold.a", ""),
    ("manifold.b", ""),
    ("manifold.c", ""),
    ("manifold.d", ""),
    ("manifold.pole_margin", "1e-4"),
    ("deform.field", "bumps"),
    ("deform.t_end", "1"),
    ("deform.steps", "64"),
    ("deform.bumps", "4"),
    ("deform.bump_seed", "7"),
    ("deform.amplitude", "0.3"),
    ("deform.width", "0.5"),
    ("deform.vector", "0,0,0"),
    ("deform.matrix", "0,0,0,0,0,0,0,0,0"),
    ("deform.slope", "0"),
    ("noise.strategy", "none"),
    ("noise.sigma2", "0.01"),
    ("noise.bm_steps", "100"),
    ("noise.seed", "0"),
    ("noise.geodesic_norm", "ambient"),
    ("noise.geodesic_steps", ""),
    ("sample.n", "100"),
    ("geodesic.u", ""),
    ("geodesic.w", "0.1,0.1"),
    ("geodesic.t_end", "1"),
    ("geodesic.steps", ""),
    ("brownian.u", ""),
    ("brownian.t", "0.01"),
    ("brownian.paths", "1"),
    ("train.epochs", "500"),
    ("train.learning_rate", ""),
    ("train.n_train", ""),
    ("train.n_test", ""),
    ("train.batch_size", ""),
    ("train.hidden_layers", "3"),
    ("train.width", "64"),
    ("train.seeds", ""),
    ("table.manifolds", "SwissRoll"),
    ("table.strategies", "B,A,T,G,BM"),
    ("table.sigma2", ""),
    ("table.sigma2_min", "1e-4"),
    ("table.sigma2_max", "1"),
    ("table.sigma2_count", "8"),
    ("reg.points", "20"),
    ("reg.n_mc", "10000"),
    ("reg.sigma2", "1e-4,1e-3"),
    ("reg.epochs", "5000"),
];

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Parse { line: usize, message: String },
    Validation { key: String, message: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Parse { line, message } => write!(f, "line {line}: {message}"),
            ConfigError::Validation { key, message } => write!(f, "{key}: {message}"),
        }
    }
}

impl std::error::Error for ConfigError {}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation {
        key: key.to_string(),
        message: message.into(),
    }
}

/// Raw `key → value` pairs from a document.
pub fn parse_document(text: &str) -> Result<Vec<(String, String, usize)>, ConfigError> {
    let mut section = String::new();
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::Parse {
                line: line_no,
                message: format!("unterminated section header `{line}`"),
            })?;
            let name = name.trim();
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(ConfigError::Parse {
                    line: line_no,
                    message: format!("bad section name `{name}`"),
                });
            }
            section = name.to_string();
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Parse {
            line: line_no,
            message: format!("expected `key = value`, got `{line}`"),
        })?;
        let k = k.trim();
        if k.is_empty() {
            return Err(ConfigError::Parse {
                line: line_no,
                message: "missing key before `=`".into(),
            });
        }
        let key = if section.is_empty() || k.contains('.') {
            k.to_string()
        } else {
            format!("{section}.{k}")
        };
        out.push((key, v.trim().to_string(), line_no));
    }
    Ok(out)
}

/// The fully resolved key set: defaults overlaid by the document and then by
/// `overrides`, in order.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    values: BTreeMap<String, String>,
}

impl Resolved {
    pub fn new(text: &str, overrides: &[(String, String)]) -> Result<Self, ConfigError> {
        let mut values: BTreeMap<String, String> = KEYS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        for (k, v, _) in parse_document(text)? {
            set(&mut values, &k, v)?;
        }
        for (k, v) in overrides {
            set(&mut values, k, v.clone())?;
        }
        Ok(Resolved { values })
    }

    pub fn get(&self, key: &str) -> &str {
        self.values
            .get(key)
            .map(String::as_str)
            .unwrap_or_else(|| panic!("unregistered key {key}"))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&String, &String)> {
        self.values.iter()
    }

    /// SHA-256 of the `key = value` lines in key order, leaving out `out`,
    /// which does not affect results.
    pub fn hash(&self) -> String {
        let text: String = self
            .values
            .iter()
            .filter(|(k, _)| k.as_str() != "out")
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect();
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        let raw = self.get(key);
        raw.parse::<T>()
            .map_err(|e| invalid(key, format!("cannot parse `{raw}`: {e}")))
    }

    fn optional<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        if self.get(key).is_empty() {
            Ok(None)
        } else {
            self.parse(key).map(Some)
        }
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Vec<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        self.get(key)
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<T>()
                    .map_err(|e| invalid(key, format!("cannot parse `{s}`: {e}")))
            })
            .collect()
    }

    fn reals<const N: usize>(&self, key: &str) -> Result<[f64; N], ConfigError> {
        let v: Vec<f64> = self.list(key)?;
        v.try_into()
            .map_err(|v: Vec<f64>| invalid(key, format!("expected {N} numbers, got {}", v.len())))
    }
}

fn set(values: &mut BTreeMap<String, String>, key: &str, value: String) -> Result<(), ConfigError> {
    match values.get_mut(key) {
        Some(slot) => {
            *slot = value;
            Ok(())
        }
        None => Err(invalid(key, "unknown key")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Sample,
    Geodesic,
    Brownian,
    Deform,
    Train,
    Table,
    Sweep,
    CheckReg,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Sample => "sample",
            Command::Geodesic => "geodesic",
            Command::Brownian => "brownian",
            Command::Deform => "deform",
            Command::Train => "train",
            Command::Table => "table",
            Command::Sweep => "sweep",
            Command::CheckReg => "check-reg",
        }
    }
}

impl std::str::FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "sample" => Command::Sample,
            "geodesic" => Command::Geodesic,
            "brownian" => Command::Brownian,
            "deform" => Command::Deform,
            "train" => Command::Train,
            "table" => Command::Table,
            "sweep" => Command::Sweep,
            "check-reg" => Command::CheckReg,
            "" => return Err("command is empty".into()),
            other => return Err(format!("unknown command `{other}`")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}`")),
        }
    }
}

/// Typed view of a resolved configuration.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub command: Command,
    pub format: Format,
    /// `-` writes to standard output.
    pub out: String,
    pub seed: u64,
    pub jobs: Option<usize>,
    pub experiment: Experiment,
    pub noise: NoiseConfig,
    /// Present for the commands that train models.
    pub train: Option<TrainConfig>,
    pub resolved: Resolved,
}

impl RunSpec {
    pub fn manifold(&self) -> &ManifoldSpec {
        &self.experiment.manifold
    }
}

fn family_manifold(r: &Resolved, family_key: &str) -> Result<ManifoldSpec, ConfigError> {
    let family = r.get(family_key).to_ascii_lowercase();
    let coef = |k: &str, default: f64| -> Result<f64, ConfigError> {
        Ok(r.optional::<f64>(&format!("manifold.{k}"))?.unwrap_or(default))
    };
    let geo = |e: geonoise_core::GeoError| invalid(family_key, e.to_string());
    Ok(match family.as_str() {
        "plane" => ManifoldSpec::plane(),
        "sphere" => ManifoldSpec::spheroid(coef("a", 1.0)?, coef("c", 1.0)?).map_err(geo)?,
        "spheroid" => ManifoldSpec::spheroid(coef("a", 1.0)?, coef("c", 0.5)?).map_err(geo)?,
        "torus" => ManifoldSpec::torus(coef("a", 2.0)?, coef("c", 1.0)?).map_err(geo)?,
        "swissroll" => ManifoldSpec::swiss_roll(coef("a", 1.0)?).map_err(geo)?,
        "disc" | "biconcavedisc" => {
            ManifoldSpec::biconcave_disc(coef("a", 0.5)?, coef("b", 2.0)?, coef("c", -1.0)?, coef("d", 2.0)?)
                .map_err(geo)?
        }
        other => return Err(invalid(family_key, format!("unknown family `{other}`"))),
    })
}

fn flow_field(r: &Resolved) -> Result<FlowField, ConfigError> {
    let kind = r.get("deform.field").to_ascii_lowercase();
    let field = match kind.as_str() {
        "zero" => FlowField::zero(),
        "constant" => FlowField::constant(Vector3::from(r.reals::<3>("deform.vector")?)),
        "linear" => FlowField::linear(Matrix3::from_row_slice(&r.reals::<9>("deform.matrix")?)),
        "bumps" => FlowField::smooth_bump(
            r.parse("deform.bumps")?,
            r.parse("deform.bump_seed")?,
            r.parse("deform.amplitude")?,
            r.parse("deform.width")?,
        )
        .map_err(|e| invalid("deform.field", e.to_string()))?,
        other => return Err(invalid("deform.field", format!("unknown field kind `{other}`"))),
    };
    let slope: f64 = r.parse("deform.slope")?;
    Ok(if slope != 0.0 {
        field.with_modulation(TimeModulation::Linear { slope })
    } else {
        field
    })
}

/// The manifold described by the `manifold.*` and `deform.*` keys.
fn custom_manifold(r: &Resolved) -> Result<ManifoldSpec, ConfigError> {
    let margin: f64 = r.parse("manifold.pole_margin")?;
    let m = if r.get("manifold.family").eq_ignore_ascii_case("deformed") {
        let base = family_manifold(r, "manifold.base")?
            .with_pole_margin(margin)
            .map_err(|e| invalid("manifold.pole_margin", e.to_string()))?;
        ManifoldSpec::deformed(base, flow_field(r)?, r.parse("deform.t_end")?, r.parse("deform.steps")?)
            .map_err(|e| invalid("deform.t_end", e.to_string()))?
    } else {
        family_manifold(r, "manifold.family")?
    };
    m.with_pole_margin(margin)
        .map_err(|e| invalid("manifold.pole_margin", e.to_string()))
}

pub fn preset_list(r: &Resolved, key: &str) -> Result<Vec<Preset>, ConfigError> {
    let v: Vec<Preset> = r.list(key)?;
    if v.is_empty() {
        return Err(invalid(key, "list is empty"));
    }
    Ok(v)
}

pub fn strategy_list(r: &Resolved) -> Result<Vec<Strategy>, ConfigError> {
    let v: Vec<Strategy> = r.list("table.strategies")?;
    if v.is_empty() {
        return Err(invalid("table.strategies", "list is empty"));
    }
    Ok(v)
}

pub fn sigma2_list(r: &Resolved) -> Result<Vec<f64>, ConfigError> {
    let explicit: Vec<f64> = r.list("table.sigma2")?;
    let grid = if explicit.is_empty() {
        let (lo, hi): (f64, f64) = (r.parse("table.sigma2_min")?, r.parse("table.sigma2_max")?);
        let n: usize = r.parse("table.sigma2_count")?;
        if !(lo > 0.0 && hi >= lo && n >= 1) {
            return Err(invalid("table.sigma2_min", "need 0 < min <= max and count >= 1"));
        }
        geonoise_harness::table::sigma2_grid(lo, hi, n)
    } else {
        explicit
    };
    if grid.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
        return Err(invalid("table.sigma2", "values must be finite and >= 0"));
    }
    Ok(grid)
}

/// Seeds for training commands: `train.seeds`, else five seeds from `seed`.
pub fn seed_list(r: &Resolved) -> Result<Vec<u64>, ConfigError> {
    let explicit: Vec<u64> = r.list("train.seeds")?;
    if !explicit.is_empty() {
        return Ok(explicit);
    }
    let base: u64 = r.parse("seed")?;
    Ok((0..5).map(|i| base.wrapping_add(i)).collect())
}

pub fn local_point(r: &Resolved, key: &str, m: &ManifoldSpec) -> Result<nalgebra::Vector2<f64>, ConfigError> {
    if r.get(key).is_empty() {
        let c = m.domain.coords;
        return Ok(nalgebra::Vector2::new(
            (c[0].lo + c[0].hi) / 2.0,
            (c[1].lo + c[1].hi) / 2.0,
        ));
    }
    Ok(nalgebra::Vector2::from(r.reals::<2>(key)?))
}

pub fn get_parsed<T: std::str::FromStr>(r: &Resolved, key: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    r.parse(key)
}

pub fn get_optional<T: std::str::FromStr>(r: &Resolved, key: &str) -> Result<Option<T>, ConfigError>
where
    T::Err: fmt::Display,
{
    r.optional(key)
}

pub fn get_list<T: std::str::FromStr>(r: &Resolved, key: &str) -> Result<Vec<T>, ConfigError>
where
    T::Err: fmt::Display,
{
    r.list(key)
}

pub fn get_reals<const N: usize>(r: &Resolved, key: &str) -> Result<[f64; N], ConfigError> {
    r.reals::<N>(key)
}

/// Resolves `text` plus overrides into a validated [`RunSpec`].
pub fn parse_config(text: &str, overrides: &[(String, String)]) -> Result<RunSpec, ConfigError> {
    let resolved = Resolved::new(text, overrides)?;
    let r = &resolved;
    let command: Command = r.parse("command")?;
    let format: Format = r.parse("format")?;
    let jobs: Option<usize> = r.optional("jobs")?;
    if jobs == Some(0) {
        return Err(invalid("jobs", "must be at least 1"));
    }

    let mut experiment = match r.get("manifold.preset") {
        "" => Experiment::custom(r.get("manifold.family"), custom_manifold(r)?),
        name => name
            .parse::<Preset>()
            .map_err(|e| invalid("manifold.preset", e))?
            .experiment(),
    };
    if let Some(lr) = r.optional::<f64>("train.learning_rate")? {
        experiment.learning_rate = lr;
    }
    if let Some(n) = r.optional::<usize>("train.n_train")? {
        experiment.n_train = n;
    }
    if let Some(n) = r.optional::<usize>("train.n_test")? {
        experiment.n_test = n;
    }

    let noise = NoiseConfig {
        strategy: r.parse("noise.strategy")?,
        sigma2: r.parse("noise.sigma2")?,
        bm_steps: r.parse("noise.bm_steps")?,
        seed: r.parse("noise.seed")?,
        geodesic_norm: r.parse::<GeodesicNorm>("noise.geodesic_norm")?,
        geodesic_steps: r.optional("noise.geodesic_steps")?,
    };
    noise.validate().map_err(|e| invalid("noise", e.to_string()))?;

    let train = match command {
        Command::Train | Command::Table | Command::Sweep | Command::CheckReg => {
            let epoch_key = if command == Command::CheckReg {
                "reg.epochs"
            } else {
                "train.epochs"
            };
            let tc = TrainConfig {
                epochs: r.parse(epoch_key)?,
                learning_rate: experiment.learning_rate,
                noise,
                batch_size: r.optional("train.batch_size")?,
                ..TrainConfig::default()
            };
            tc.validate().map_err(|e| invalid("train", e.to_string()))?;
            Some(tc)
        }
        _ => None,
    };

    Ok(RunSpec {
        command,
        format,
        out: r.get("out").to_string(),
        seed: r.parse("seed")?,
        jobs,
        experiment,
        noise,
        train,
        resolved,
    })
}
