//! Experiment configuration: defaults, config-file parsing, and precedence.
//!
//! Settings are resolved in four layers, each overriding the previous one:
//! built-in defaults, then a flat `key=value` config file, then the `--desk`
//! preset, then explicit command-line flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Errors surfaced to the command line, split by exit code: configuration
/// problems exit with 1, runtime failures with 2.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Run(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Run(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Run(msg) => write!(f, "runtime error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<collocate::Error> for CliError {
    fn from(err: collocate::Error) -> Self {
        CliError::Run(err.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Run(err.to_string())
    }
}

/// Index selection algorithm for the convergence experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    APriori,
    APosteriori,
}

impl Algo {
    pub fn label(&self) -> &'static str {
        match self {
            Algo::APriori => "apriori",
            Algo::APosteriori => "aposteriori",
        }
    }
}

impl FromStr for Algo {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "apriori" => Ok(Algo::APriori),
            "aposteriori" => Ok(Algo::APosteriori),
            other => Err(format!(
                "unknown algorithm {other:?}, expected apriori or aposteriori"
            )),
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Fixed multi-index family for the grid-size counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    TotalDegree,
    HyperbolicCross,
}

impl Family {
    pub fn label(&self) -> &'static str {
        match self {
            Family::TotalDegree => "td",
            Family::HyperbolicCross => "hc",
        }
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "td" => Ok(Family::TotalDegree),
            "hc" => Ok(Family::HyperbolicCross),
            other => Err(format!("unknown family {other:?}, expected td or hc")),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Partial settings from one configuration layer; `None` leaves the value
/// from the layers below in place.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub q: Option<f64>,
    pub sigma: Option<f64>,
    pub model_dims: Option<Vec<u32>>,
    pub reference_dims: Option<u32>,
    pub n_mc: Option<usize>,
    pub seed: Option<u64>,
    pub n_max: Option<usize>,
    pub m_buffer: Option<u32>,
    pub algo: Option<Algo>,
    pub family: Option<Family>,
    pub w_max: Option<u32>,
    pub out: Option<PathBuf>,
    pub nx: Option<usize>,
}

/// Fully resolved settings. `seed` and `model_dims` stay optional because
/// only some subcommands require them.
#[derive(Debug, Clone)]
pub struct Settings {
    pub q: f64,
    pub sigma: f64,
    pub model_dims: Option<Vec<u32>>,
    pub reference_dims: u32,
    pub n_mc: usize,
    pub seed: Option<u64>,
    pub n_max: usize,
    pub m_buffer: u32,
    pub algo: Algo,
    pub family: Family,
    pub w_max: u32,
    pub out: PathBuf,
    pub nx: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            q: 2.0,
            sigma: 0.1,
            model_dims: None,
            reference_dims: 640,
            n_mc: 1000,
            seed: None,
            n_max: 60,
            m_buffer: 5,
            algo: Algo::APosteriori,
            family: Family::TotalDegree,
            w_max: 6,
            out: PathBuf::from("."),
            nx: 1024,
        }
    }
}

impl Settings {
    /// Applies one layer of overrides on top of the current values.
    pub fn apply(&mut self, layer: &Overrides) {
        if let Some(q) = layer.q {
            self.q = q;
        }
        if let Some(sigma) = layer.sigma {
            self.sigma = sigma;
        }
        if let Some(dims) = &layer.model_dims {
            self.model_dims = Some(dims.clone());
        }
        if let Some(mref) = layer.reference_dims {
            self.reference_dims = mref;
        }
        if let Some(n_mc) = layer.n_mc {
            self.n_mc = n_mc;
        }
        if let Some(seed) = layer.seed {
            self.seed = Some(seed);
        }
        if let Some(n_max) = layer.n_max {
            self.n_max = n_max;
        }
        if let Some(buffer) = layer.m_buffer {
            self.m_buffer = buffer;
        }
        if let Some(algo) = layer.algo {
            self.algo = algo;
        }
        if let Some(family) = layer.family {
            self.family = family;
        }
        if let Some(w_max) = layer.w_max {
            self.w_max = w_max;
        }
        if let Some(out) = &layer.out {
            self.out = out.clone();
        }
        if let Some(nx) = layer.nx {
            self.nx = nx;
        }
    }

    /// Shrinks the expensive knobs to the interactive preset: a 64-mode
    /// reference field, 60 selection steps, and 500 Monte Carlo samples.
    pub fn apply_desk(&mut self) {
        self.reference_dims = 64;
        self.n_max = 60;
        self.n_mc = 500;
    }

    pub fn require_seed(&self) -> Result<u64, CliError> {
        self.seed
            .ok_or_else(|| CliError::Config("this command requires --seed".into()))
    }
}

/// Resolves the four configuration layers into final settings.
pub fn resolve(
    config_file: Option<&Path>,
    desk: bool,
    flags: &Overrides,
) -> Result<Settings, CliError> {
    let mut settings = Settings::default();
    if let Some(path) = config_file {
        let file_layer = parse_config_file(path)?;
        settings.apply(&file_layer);
    }
    if desk {
        settings.apply_desk();
    }
    settings.apply(flags);
    validate(&settings)?;
    Ok(settings)
}

fn validate(settings: &Settings) -> Result<(), CliError> {
    let bad = |msg: String| Err(CliError::Config(msg));
    if !settings.q.is_finite() || settings.q < 1.0 {
        return bad(format!("q must be at least 1, got {}", settings.q));
    }
    if !settings.sigma.is_finite() || settings.sigma <= 0.0 {
        return bad(format!("sigma must be positive, got {}", settings.sigma));
    }
    if settings.reference_dims == 0 {
        return bad("mref must be at least 1".into());
    }
    if let Some(dims) = &settings.model_dims {
        if dims.is_empty() {
            return bad("M must list at least one dimension count".into());
        }
        for &m in dims {
            if m == 0 {
                return bad("M entries must be at least 1".into());
            }
            if m > settings.reference_dims {
                return bad(format!(
                    "M = {m} exceeds the reference dimension mref = {}",
                    settings.reference_dims
                ));
            }
        }
    }
    if settings.n_mc == 0 {
        return bad("nmc must be at least 1".into());
    }
    if settings.n_max == 0 {
        return bad("nmax must be at least 1".into());
    }
    if settings.m_buffer == 0 {
        return bad("buffer must be at least 1".into());
    }
    if settings.nx < 16 || !settings.nx.is_power_of_two() {
        return bad(format!(
            "nx must be a power of two of at least 16, got {}",
            settings.nx
        ));
    }
    Ok(())
}

/// Parses a flat `key=value` config file. Blank lines and lines starting
/// with `#` are skipped; unknown keys are rejected.
pub fn parse_config_file(path: &Path) -> Result<Overrides, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|err| CliError::Config(format!("cannot read {}: {err}", path.display())))?;
    parse_config_text(&text).map_err(|msg| CliError::Config(format!("{}: {msg}", path.display())))
}

fn parse_config_text(text: &str) -> Result<Overrides, String> {
    let mut layer = Overrides::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key=value", lineno + 1))?;
        let key = key.trim();
        let value = value.trim();
        let place = |msg: String| format!("line {}: {msg}", lineno + 1);
        match key {
            "q" => layer.q = Some(parse_value(key, value).map_err(place)?),
            "sigma" => layer.sigma = Some(parse_value(key, value).map_err(place)?),
            "M" => layer.model_dims = Some(parse_dims(value).map_err(place)?),
            "mref" => layer.reference_dims = Some(parse_value(key, value).map_err(place)?),
            "nmc" => layer.n_mc = Some(parse_value(key, value).map_err(place)?),
            "seed" => layer.seed = Some(parse_value(key, value).map_err(place)?),
            "nmax" => layer.n_max = Some(parse_value(key, value).map_err(place)?),
            "buffer" => layer.m_buffer = Some(parse_value(key, value).map_err(place)?),
            "algo" => layer.algo = Some(value.parse().map_err(place)?),
            "family" => layer.family = Some(value.parse().map_err(place)?),
            "wmax" => layer.w_max = Some(parse_value(key, value).map_err(place)?),
            "out" => layer.out = Some(PathBuf::from(value)),
            "nx" => layer.nx = Some(parse_value(key, value).map_err(place)?),
            other => return Err(format!("line {}: unknown key {other:?}", lineno + 1)),
        }
    }
    Ok(layer)
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, String>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|err| format!("invalid value {value:?} for {key}: {err}"))
}

/// Parses a comma-separated list of dimension counts.
pub fn parse_dims(value: &str) -> Result<Vec<u32>, String> {
    value
        .split(',')
        .map(|part| parse_value("M", part.trim()))
        .collect()
}
