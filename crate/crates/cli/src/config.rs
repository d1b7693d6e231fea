use std::fmt;
use std::path::Path;

use fracdio::randwalk::BlockSpec;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    CfStats,
    Lyapunov,
    Positivity,
    Attraction,
    Flow,
    BaTest,
    DiTest,
    WalkEquidist,
    FnCheck,
    UrProbe,
    IdentityCheck,
}

impl Experiment {
    pub const ALL: [Experiment; 11] = [
        Experiment::CfStats,
        Experiment::Lyapunov,
        Experiment::Positivity,
        Experiment::Attraction,
        Experiment::Flow,
        Experiment::BaTest,
        Experiment::DiTest,
        Experiment::WalkEquidist,
        Experiment::FnCheck,
        Experiment::UrProbe,
        Experiment::IdentityCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::CfStats => "cf-stats",
            Experiment::Lyapunov => "lyapunov",
            Experiment::Positivity => "positivity",
            Experiment::Attraction => "attraction",
            Experiment::Flow => "flow",
            Experiment::BaTest => "ba-test",
            Experiment::DiTest => "di-test",
            Experiment::WalkEquidist => "walk-equidist",
            Experiment::FnCheck => "fn-check",
            Experiment::UrProbe => "ur-probe",
            Experiment::IdentityCheck => "identity-check",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Everything an experiment reads. Unset knobs take per-experiment defaults, which are
/// filled in before the run so the manifest records the values actually used.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, clap::Args)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[arg(skip)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    /// Root seed; required.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Preset name (cantor3, ex1314, middle_eps(1/5), fN(5), illustrative(2), ...),
    /// `sampler:<name>` for a block-triangular test measure, or a path to an IFS file.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub system: Option<String>,
    /// Steps, series length or probe length.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub digits: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chains: Option<usize>,
    /// Re-orthonormalization period; 0 picks one from the generators.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub period: Option<usize>,
    /// Exterior-power level of the adjoint representation.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_max: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_min: Option<i64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_max: Option<i64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_step: Option<i64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Real matrix, rows separated by `;` and entries by `,`, each entry in the real-number
    /// syntax (`p/q`, `golden`, `sqrtN`, `e`, `cf:...`, `geom:...`).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Tail depth of the coding enclosure in the walk/flow identity check.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coupling: Option<f64>,
    /// Seed used to build randomized generator sets such as `illustrative(d)`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub walk_seed: Option<u64>,
    /// Pass/fail tolerance for `--assert`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    /// Conjugating matrix `a,b;c,d` applied to a Möbius system.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conjugator: Option<String>,
    #[arg(skip)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<BlockSpec>>,
    #[arg(skip)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($f:ident),*) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f.clone(); } )*
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let json = path.extension().is_some_and(|e| e == "json");
        if json {
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        } else {
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        }
    }

    /// Fields set in `top` replace those in `self`.
    pub fn overlay(&mut self, top: &RunConfig) {
        overlay!(
            self, top, experiment, seed, system, n, points, digits, depth, trials, chains, period, level, k_max, q_min,
            q_max, q_step, t_max, dt, alpha, lambda, tail, coupling, walk_seed, tolerance, conjugator, blocks, weights,
            thresholds, format
        );
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn experiment(&self) -> Result<Experiment, CliError> {
        self.experiment.ok_or_else(|| CliError::Config("no experiment given".into()))
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| CliError::Config("a seed is required (--seed or `seed` in the config file)".into()))
    }

    pub fn system_or(&mut self, default: &str) -> String {
        self.system.get_or_insert_with(|| default.to_string()).clone()
    }
}

/// Inclusive range check for a knob.
pub fn check_range<T: PartialOrd + fmt::Display + Copy>(name: &str, v: T, lo: T, hi: T) -> Result<T, CliError> {
    if !(v >= lo && v <= hi) {
        return Err(CliError::Config(format!("{name} = {v} outside [{lo}, {hi}]")));
    }
    Ok(v)
}

/// Resolves a knob against its default and documented range, recording the value used.
pub fn knob<T: PartialOrd + fmt::Display + Copy>(slot: &mut Option<T>, name: &str, default: T, lo: T, hi: T) -> Result<T, CliError> {
    let v = *slot.get_or_insert(default);
    check_range(name, v, lo, hi)
}
