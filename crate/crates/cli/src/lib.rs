//! Experiment runner behind the `fracdio` binary.

pub mod config;
pub mod experiments;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use config::{Experiment, Format, RunConfig};
use report::Outcome;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SHORTFALL: i32 = 3;
pub const EXIT_ASSERT: i32 = 4;

/// Environment variable holding the worker-thread count.
pub const WORKERS_ENV: &str = "FRACDIO_WORKERS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("certification shortfall: {0}")]
    Shortfall(String),
    #[error("cannot write output: {0}")]
    Io(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Shortfall(_) => "certification-shortfall",
            CliError::Io(_) => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Shortfall(_) => EXIT_SHORTFALL,
            _ => EXIT_CONFIG,
        }
    }
}

impl From<fracdio::Error> for CliError {
    fn from(e: fracdio::Error) -> Self {
        match e {
            fracdio::Error::Uncertified(m) => CliError::Shortfall(m),
            other => CliError::Config(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fracdio", version, about = "Diophantine experiments on fractal measures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML or JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for the report and manifest; without it the report goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with status 4 when the experiment's pass criterion fails.
    #[arg(long = "assert")]
    assert_mode: bool,
    #[command(flatten)]
    knobs: RunConfig,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Gauss-measure statistics of certified CF digits of random points on a fractal.
    CfStats(RunArgs),
    /// Lyapunov spectrum of a random walk in a representation, or of a block-triangular sampler.
    Lyapunov(RunArgs),
    /// Minimum log growth of rho_d over random and adversarial directions.
    Positivity(RunArgs),
    /// Projective distance of random vectors to W along the walk.
    Attraction(RunArgs),
    /// Systole of a_t u_alpha Z^D along the diagonal flow.
    Flow(RunArgs),
    /// Direct badly-approximable constant up to q_max.
    BaTest(RunArgs),
    /// Dirichlet-improvability check for each Q in a range.
    DiTest(RunArgs),
    /// Birkhoff diagnostics of the lattice walk systole series.
    WalkEquidist(RunArgs),
    /// Bounded-quotient and coding identity for random F_N words.
    FnCheck(RunArgs),
    /// Hyperbolic heights of a Möbius walk after reduction.
    UrProbe(RunArgs),
    /// Walk element against flow element for IFS words.
    IdentityCheck(RunArgs),
    /// Run whatever experiment the config file names.
    Run(RunArgs),
    /// Re-run from a manifest written by an earlier run.
    Replay {
        manifest: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long = "assert")]
        assert_mode: bool,
    },
}

fn error_json(e: &CliError) -> String {
    json!({ "error": e.kind(), "message": e.to_string() }).to_string()
}

/// Entry point; returns the process exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            println!("{}", error_json(&CliError::Config(e.to_string().trim().to_string())));
            return EXIT_CONFIG;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            println!("{}", error_json(&e));
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    let (cfg, out, assert_mode) = match cli.command {
        Command::Replay { manifest, out, assert_mode } => (config_from_manifest(&manifest)?, out, assert_mode),
        Command::Run(a) => (merged(None, &a)?, a.out, a.assert_mode),
        cmd => {
            let (e, a) = match cmd {
                Command::CfStats(a) => (Experiment::CfStats, a),
                Command::Lyapunov(a) => (Experiment::Lyapunov, a),
                Command::Positivity(a) => (Experiment::Positivity, a),
                Command::Attraction(a) => (Experiment::Attraction, a),
                Command::Flow(a) => (Experiment::Flow, a),
                Command::BaTest(a) => (Experiment::BaTest, a),
                Command::DiTest(a) => (Experiment::DiTest, a),
                Command::WalkEquidist(a) => (Experiment::WalkEquidist, a),
                Command::FnCheck(a) => (Experiment::FnCheck, a),
                Command::UrProbe(a) => (Experiment::UrProbe, a),
                Command::IdentityCheck(a) => (Experiment::IdentityCheck, a),
                Command::Run(_) | Command::Replay { .. } => unreachable!(),
            };
            (merged(Some(e), &a)?, a.out, a.assert_mode)
        }
    };
    let pool = worker_pool()?;
    pool.install(|| execute(cfg, out.as_deref(), assert_mode))
}

fn merged(experiment: Option<Experiment>, a: &RunArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match &a.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let (Some(e), Some(f)) = (experiment, cfg.experiment) {
        if e != f {
            return Err(CliError::Config(format!("config file is for '{f}', not '{e}'")));
        }
    }
    cfg.overlay(&a.knobs);
    if experiment.is_some() {
        cfg.experiment = experiment;
    }
    Ok(cfg)
}

fn config_from_manifest(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let c = v.get("config").cloned().ok_or_else(|| CliError::Config("manifest has no `config` entry".into()))?;
    serde_json::from_value(c).map_err(|e| CliError::Config(format!("manifest config: {e}")))
}

fn worker_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let k: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&k| k >= 1)
            .ok_or_else(|| CliError::Config(format!("{WORKERS_ENV} must be a positive integer, got '{v}'")))?;
        b = b.num_threads(k);
    }
    b.build().map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn manifest(cfg: &RunConfig, out: &Outcome, report_file: &str) -> Value {
    json!({
        "tool": "fracdio",
        "versions": { "fracdio": fracdio::VERSION, "fracdio-cli": env!("CARGO_PKG_VERSION") },
        "experiment": cfg.experiment.map(Experiment::name),
        "config": cfg,
        "config_hash": cfg.hash(),
        "report": report_file,
        "summary": out.summary_json(),
        "pass": out.pass,
        "warnings": out.warnings,
        "status": if out.shortfall.is_some() { "certification-shortfall" } else { "ok" },
        "shortfall": out.shortfall,
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Runs a fully merged config and writes its artifacts.
pub fn execute(mut cfg: RunConfig, out_dir: Option<&Path>, assert_mode: bool) -> Result<i32, CliError> {
    let outcome = experiments::run(&mut cfg)?;
    let format = *cfg.format.get_or_insert(Format::Csv);
    let name = cfg.experiment()?.name();
    let body = match format {
        Format::Csv => outcome.to_csv(),
        Format::Json => format!("{}\n", serde_json::to_string_pretty(&outcome.to_json(name)).expect("report serializes")),
    };
    match out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
            let file = format!("{name}.{}", format.extension());
            write_file(&dir.join(&file), &body)?;
            let m = manifest(&cfg, &outcome, &file);
            write_file(&dir.join("manifest.json"), &format!("{}\n", serde_json::to_string_pretty(&m).expect("manifest serializes")))?;
        }
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(body.as_bytes()).map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(s) = &outcome.shortfall {
        eprintln!("certification shortfall: {s}");
        return Ok(EXIT_SHORTFALL);
    }
    if assert_mode && outcome.pass == Some(false) {
        eprintln!("assertion failed for {name}");
        return Ok(EXIT_ASSERT);
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_subcommand_is_a_config_error() {
        assert_eq!(main_with(["fracdio", "no-such-thing", "--seed", "1"]), EXIT_CONFIG);
    }

    #[test]
    fn config_experiment_must_match() {
        let dir = std::env::temp_dir().join(format!("fracdio-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("c.toml");
        std::fs::write(&p, "experiment = \"flow\"\nseed = 1\n").unwrap();
        let a = RunArgs { config: Some(p.clone()), out: None, assert_mode: false, knobs: RunConfig::default() };
        assert!(merged(Some(Experiment::BaTest), &a).is_err());
        let c = merged(None, &a).unwrap();
        assert_eq!(c.experiment, Some(Experiment::Flow));
        std::fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn every_experiment_has_a_subcommand() {
        for e in Experiment::ALL {
            let code = main_with(["fracdio", e.name(), "--help"]);
            assert_eq!(code, EXIT_OK, "{e}");
        }
    }
}
