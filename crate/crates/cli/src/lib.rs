//! Experiment harness around the `renorm` library: argument and config handling,
//! the experiment runners, and the run manifest.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod manifest;

use std::path::Path;
use std::time::Instant;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use args::{
    BakerArgs, CfArgs, Cli, Command, FbetaArgs, GlobalOpts, IntervalArgs, ShiftArgs, TwosidedArgs,
    UniquenessArgs,
};
use manifest::{RunManifest, SCHEMA_VERSION};

/// Exit status for a run whose checks all passed.
pub const EXIT_OK: i32 = 0;
/// Exit status for usage, precondition, I/O and schema errors.
pub const EXIT_USAGE: i32 = 2;
/// Exit status for a completed run with at least one failed check.
pub const EXIT_CHECK_FAILED: i32 = 3;

pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("precondition: {0}")]
    Precondition(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("schema: {0}")]
    Schema(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        EXIT_USAGE
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}

impl From<csv::Error> for HarnessError {
    fn from(e: csv::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for HarnessError {
    fn from(e: serde_json::Error) -> Self {
        HarnessError::Schema(e.to_string())
    }
}

impl From<renorm::Error> for HarnessError {
    fn from(e: renorm::Error) -> Self {
        HarnessError::Precondition(e.to_string())
    }
}

/// One experiment with its fully merged arguments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum CommandSpec {
    Interval(IntervalArgs),
    Shift(ShiftArgs),
    Twosided(TwosidedArgs),
    Baker(BakerArgs),
    Uniqueness(UniquenessArgs),
    Cf(CfArgs),
    Fbeta(FbetaArgs),
    CheckAll,
}

impl CommandSpec {
    pub fn name(&self) -> &'static str {
        match self {
            CommandSpec::Interval(_) => "interval",
            CommandSpec::Shift(_) => "shift",
            CommandSpec::Twosided(_) => "twosided",
            CommandSpec::Baker(_) => "baker",
            CommandSpec::Uniqueness(_) => "uniqueness",
            CommandSpec::Cf(_) => "cf",
            CommandSpec::Fbeta(_) => "fbeta",
            CommandSpec::CheckAll => "check-all",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub global: GlobalOpts,
    pub command: CommandSpec,
}

impl ExperimentSpec {
    pub fn new(command: CommandSpec) -> Self {
        Self {
            global: GlobalOpts::default(),
            command,
        }
    }

    /// Builds the spec from parsed arguments, filling unset values from the
    /// config file named by `--config`. Returns `None` for `compare`.
    pub fn from_cli(cli: &Cli) -> Result<Option<Self>, HarnessError> {
        let config = match &cli.global.config {
            Some(path) => Some(load_config(path)?),
            None => None,
        };
        let section = |name: &str| config.as_ref().and_then(|c| c.get(name));
        let mut global: GlobalOpts = merge(&cli.global, section("global"))?;
        global.config = cli.global.config.clone();
        let command = match &cli.command {
            Command::Interval(a) => CommandSpec::Interval(merge(a, section("interval"))?),
            Command::Shift(a) => CommandSpec::Shift(merge(a, section("shift"))?),
            Command::Twosided(a) => CommandSpec::Twosided(merge(a, section("twosided"))?),
            Command::Baker(a) => CommandSpec::Baker(merge(a, section("baker"))?),
            Command::Uniqueness(a) => CommandSpec::Uniqueness(merge(a, section("uniqueness"))?),
            Command::Cf(a) => CommandSpec::Cf(merge(a, section("cf"))?),
            Command::Fbeta(a) => CommandSpec::Fbeta(merge(a, section("fbeta"))?),
            Command::CheckAll => CommandSpec::CheckAll,
            Command::Compare(_) => return Ok(None),
        };
        Ok(Some(Self { global, command }))
    }
}

pub fn load_config(path: &Path) -> Result<toml::Table, HarnessError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
    text.parse::<toml::Table>()
        .map_err(|e| HarnessError::Usage(format!("{}: {e}", path.display())))
}

/// Overlays the values set on the command line onto a config section.
pub fn merge<T>(cli: &T, section: Option<&toml::Value>) -> Result<T, HarnessError>
where
    T: Serialize + DeserializeOwned,
{
    let base: Value = match section {
        Some(v) => {
            let typed: T = v
                .clone()
                .try_into()
                .map_err(|e| HarnessError::Usage(format!("config: {e}")))?;
            serde_json::to_value(typed)?
        }
        None => serde_json::to_value(cli)?,
    };
    let overlay = serde_json::to_value(cli)?;
    let merged = match (base, overlay) {
        (Value::Object(mut b), Value::Object(o)) => {
            for (k, v) in o {
                if !v.is_null() {
                    b.insert(k, v);
                }
            }
            Value::Object(b)
        }
        (_, o) => o,
    };
    Ok(serde_json::from_value(merged)?)
}

/// Settings shared by the runners.
#[derive(Debug, Clone, Copy)]
pub struct Context {
    pub tol_scale: f64,
    pub seed: u64,
}

/// Runs one experiment and collects its checks and tables.
pub fn run(spec: &ExperimentSpec) -> Result<RunManifest, HarnessError> {
    let started = Instant::now();
    let tol_scale = spec.global.tol_scale.unwrap_or(1.0);
    if !(tol_scale > 0.0 && tol_scale.is_finite()) {
        return Err(HarnessError::Usage(format!(
            "--tol-scale must be positive, got {tol_scale}"
        )));
    }
    let ctx = Context {
        tol_scale,
        seed: spec.global.seed.unwrap_or(DEFAULT_SEED),
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = spec.global.threads {
        if n == 0 {
            return Err(HarnessError::Usage("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| HarnessError::Io(format!("thread pool: {e}")))?;
    let report = pool.install(|| commands::dispatch(&spec.command, &ctx))?;
    Ok(RunManifest {
        schema_version: SCHEMA_VERSION,
        command: spec.command.name().to_string(),
        spec: serde_json::to_value(spec)?,
        software_version: env!("CARGO_PKG_VERSION").to_string(),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        checks: report.checks,
        tables: report.tables,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_prefers_set_flags() {
        let section: toml::Value = "t = 3.0\ngrid = 10\n"
            .parse::<toml::Table>()
            .unwrap()
            .into();
        let cli = IntervalArgs {
            t: Some(0.5),
            ..Default::default()
        };
        let m = merge(&cli, Some(&section)).unwrap();
        assert_eq!(m.t, Some(0.5));
        assert_eq!(m.grid, Some(10));
        assert_eq!(m.n, None);
    }

    #[test]
    fn merge_without_section_is_identity() {
        let cli = ShiftArgs {
            a: Some(2),
            ..Default::default()
        };
        assert_eq!(merge(&cli, None).unwrap(), cli);
    }

    #[test]
    fn spec_round_trips_through_json() {
        let spec = ExperimentSpec::new(CommandSpec::Uniqueness(UniquenessArgs {
            a: Some(2),
            depth: Some(6),
        }));
        let v = serde_json::to_value(&spec).unwrap();
        assert_eq!(v["command"]["command"], "uniqueness");
        let back: ExperimentSpec = serde_json::from_value(v).unwrap();
        assert_eq!(back, spec);
    }
}
