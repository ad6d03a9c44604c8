//! Experiment configuration: a flat TOML file, overridden by CLI flags.
//!
//! Keys (all optional):
//!
//! | key | meaning | default |
//! |---|---|---|
//! | `experiment` | spacing, formfactor, iterates, ipr, circuit_verify, isrm_stats | from the CLI |
//! | `alpha` | `"a/b"`, a float, or `"golden"` | `"1/3"` |
//! | `n_qubits` | single register size | 8 |
//! | `n_qubits_range` | inclusive range `"a..b"`, overrides `n_qubits` | none |
//! | `variant` | det, isrm-sym, isrm-nonsym | det |
//! | `phase_model` | uniform, gaussian, circuit | uniform |
//! | `sigma` | width of the gaussian phase model | 2π |
//! | `n_s` | CNOT pairs of the circuit phase model | 16 |
//! | `ensemble` | realizations per point (ISRM) | 50 |
//! | `seed` | master seed | 1 |
//! | `window` | κ averaging window | `3b` for α = a/b, else 9 |
//! | `iterate_start` | first iterate of the first window | 100000 |
//! | `iterate_width` | iterates per window | 100 |
//! | `n_windows` | consecutive iterate windows | 1 |
//! | `late_iterate` | iterate used for IPR column vectors | 100000 |
//! | `counting` | paper or optimized | paper |
//! | `shots` | probe-qubit shots for the trace cross-check (absent = exact) | none |
//! | `out` | output directory | `out` |
//! | `cache_dir` | matrix cache directory (absent = no cache) | none |
//! | `dense_cap` | largest register for dense matrices | 12 |
//! | `workers` | worker threads | 1 |

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::circuit::CountingMode;
use crate::error::{Error, Result};
use crate::params::{Alpha, MapSpec, PhaseModel, Variant, DEFAULT_DENSE_CAP};

/// Help text listing every configuration key.
pub const CONFIG_KEYS: &str = "\
Config file keys (flat TOML, all optional; CLI flags win):
  experiment      spacing | formfactor | iterates | ipr | circuit_verify | isrm_stats
  alpha           \"a/b\", a float, or \"golden\"                 [1/3]
  n_qubits        register size                                  [8]
  n_qubits_range  inclusive range \"a..b\", wins over n_qubits
  variant         det | isrm-sym | isrm-nonsym                   [det]
  phase_model     uniform | gaussian | circuit                   [uniform]
  sigma           width of the gaussian phase model              [2pi]
  n_s             CNOT pairs of the circuit phase model          [16]
  ensemble        realizations per point (ISRM)                  [50]
  seed            master seed                                    [1]
  window          kappa averaging window                         [3b for a/b, else 9]
  iterate_start   first iterate of the first window              [100000]
  iterate_width   iterates per window                            [100]
  n_windows       consecutive iterate windows                    [1]
  late_iterate    iterate used for IPR column vectors            [100000]
  counting        paper | optimized                              [paper]
  shots           probe shots for the trace cross-check          [exact]
  out             output directory                               [out]
  cache_dir       matrix cache directory                         [none]
  dense_cap       largest register for dense matrices            [12]
  workers         worker threads                                 [1]";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Experiment {
    Spacing,
    FormFactor,
    Iterates,
    Ipr,
    CircuitVerify,
    IsrmStats,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Spacing,
        Experiment::FormFactor,
        Experiment::Iterates,
        Experiment::Ipr,
        Experiment::CircuitVerify,
        Experiment::IsrmStats,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Spacing => "spacing",
            Experiment::FormFactor => "formfactor",
            Experiment::Iterates => "iterates",
            Experiment::Ipr => "ipr",
            Experiment::CircuitVerify => "circuit_verify",
            Experiment::IsrmStats => "isrm_stats",
        }
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().replace('-', "_");
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == key)
            .ok_or_else(|| Error::Config(format!("unknown experiment '{s}'")))
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
enum AlphaValue {
    Text(String),
    Number(f64),
}

/// The file as written; every key optional.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    experiment: Option<String>,
    alpha: Option<AlphaValue>,
    n_qubits: Option<u32>,
    n_qubits_range: Option<String>,
    variant: Option<String>,
    phase_model: Option<String>,
    sigma: Option<f64>,
    n_s: Option<usize>,
    ensemble: Option<usize>,
    seed: Option<u64>,
    window: Option<usize>,
    iterate_start: Option<u64>,
    iterate_width: Option<u64>,
    n_windows: Option<usize>,
    late_iterate: Option<u64>,
    counting: Option<String>,
    shots: Option<u64>,
    out: Option<PathBuf>,
    cache_dir: Option<PathBuf>,
    dense_cap: Option<u32>,
    workers: Option<usize>,
}

impl FileConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub experiment: Option<String>,
    pub alpha: Option<String>,
    pub n_qubits: Option<u32>,
    pub n_qubits_range: Option<String>,
    pub variant: Option<String>,
    pub ensemble: Option<usize>,
    pub seed: Option<u64>,
    pub window: Option<usize>,
    pub counting: Option<String>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

/// A validated configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub alpha: Alpha,
    pub n_qubits: Vec<u32>,
    pub variant: Variant,
    pub phase_model: PhaseModel,
    pub ensemble: usize,
    pub seed: u64,
    pub window: usize,
    pub iterate_start: u64,
    pub iterate_width: u64,
    pub n_windows: usize,
    pub late_iterate: u64,
    pub counting: CountingMode,
    pub shots: Option<u64>,
    pub out: PathBuf,
    pub cache_dir: Option<PathBuf>,
    pub dense_cap: u32,
    pub workers: usize,
}

fn parse_range(s: &str) -> Result<Vec<u32>> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| Error::Config(format!("range '{s}' is not of the form a..b")))?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let parse = |x: &str| {
        x.trim()
            .parse::<u32>()
            .map_err(|_| Error::Config(format!("bad range bound '{x}'")))
    };
    let (a, b) = (parse(a)?, parse(b)?);
    if a > b {
        return Err(Error::Config(format!("empty range '{s}'")));
    }
    Ok((a..=b).collect())
}

/// Default κ window, `3b` for rational `α = a/b`.
pub fn default_window(alpha: &Alpha) -> usize {
    match alpha.as_rational() {
        Some((_, b)) if b >= 2 => 3 * b as usize,
        _ => 9,
    }
}

fn config_err(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

impl ExperimentConfig {
    pub fn resolve(file: FileConfig, cli: Overrides) -> Result<Self> {
        let experiment: Experiment = cli
            .experiment
            .or(file.experiment)
            .ok_or_else(|| Error::Config("no experiment given".into()))?
            .parse()?;
        let alpha = match (cli.alpha, file.alpha) {
            (Some(s), _) | (None, Some(AlphaValue::Text(s))) => s.parse::<Alpha>().map_err(config_err)?,
            (None, Some(AlphaValue::Number(x))) => Alpha::real(x).map_err(config_err)?,
            (None, None) => Alpha::rational(1, 3)?,
        };
        let n_qubits = match (cli.n_qubits_range, cli.n_qubits, file.n_qubits_range, file.n_qubits) {
            (Some(r), _, _, _) => parse_range(&r)?,
            (None, Some(k), _, _) => vec![k],
            (None, None, Some(r), _) => parse_range(&r)?,
            (None, None, None, Some(k)) => vec![k],
            (None, None, None, None) => vec![8],
        };
        let variant: Variant = cli
            .variant
            .or(file.variant)
            .map(|s| s.parse().map_err(config_err))
            .transpose()?
            .unwrap_or(Variant::Deterministic);
        let phase_model = match file.phase_model.as_deref().unwrap_or("uniform") {
            "uniform" => PhaseModel::Uniform,
            "gaussian" => PhaseModel::Gaussian {
                sigma: file.sigma.unwrap_or(TAU),
            },
            "circuit" => PhaseModel::Circuit {
                n_s: file.n_s.unwrap_or(16),
            },
            other => return Err(Error::Config(format!("unknown phase model '{other}'"))),
        };
        let counting: CountingMode = cli
            .counting
            .or(file.counting)
            .map(|s| s.parse().map_err(config_err))
            .transpose()?
            .unwrap_or(CountingMode::PaperFaithful);
        let cfg = ExperimentConfig {
            experiment,
            window: cli.window.or(file.window).unwrap_or_else(|| default_window(&alpha)),
            alpha,
            n_qubits,
            variant,
            phase_model,
            ensemble: cli.ensemble.or(file.ensemble).unwrap_or(50),
            seed: cli.seed.or(file.seed).unwrap_or(1),
            iterate_start: file.iterate_start.unwrap_or(100_000),
            iterate_width: file.iterate_width.unwrap_or(100),
            n_windows: file.n_windows.unwrap_or(1),
            late_iterate: file.late_iterate.unwrap_or(100_000),
            counting,
            shots: file.shots,
            out: cli.out.or(file.out).unwrap_or_else(|| PathBuf::from("out")),
            cache_dir: file.cache_dir,
            dense_cap: file.dense_cap.unwrap_or(DEFAULT_DENSE_CAP),
            workers: cli.workers.or(file.workers).unwrap_or(1),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n_qubits.is_empty() {
            return bad("no register sizes".into());
        }
        for &n in &self.n_qubits {
            MapSpec::new(n, self.alpha, self.variant, self.phase_model, self.seed).map_err(config_err)?;
            if n > self.dense_cap {
                return bad(format!("n_qubits = {n} exceeds dense_cap = {}", self.dense_cap));
            }
        }
        if self.ensemble == 0 {
            return bad("ensemble must be positive".into());
        }
        if self.window == 0 {
            return bad("window must be positive".into());
        }
        if self.iterate_width == 0 || self.n_windows == 0 {
            return bad("iterate windows must be non-empty".into());
        }
        if self.workers == 0 {
            return bad("workers must be positive".into());
        }
        if self.shots == Some(0) {
            return bad("shots must be positive".into());
        }
        Ok(())
    }

    pub fn spec(&self, n_qubits: u32) -> Result<MapSpec> {
        MapSpec::new(n_qubits, self.alpha, self.variant, self.phase_model, self.seed)
    }

    /// `[lo, hi)` iterate windows.
    pub fn iterate_windows(&self) -> Vec<(u64, u64)> {
        (0..self.n_windows as u64)
            .map(|k| {
                let lo = self.iterate_start + k * self.iterate_width;
                (lo, lo + self.iterate_width)
            })
            .collect()
    }
}
