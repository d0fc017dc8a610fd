//! Command-line front end: `eval`, `sweep`, `fit` and `validate`.
//!
//! Exit codes are 0 on success, 1 for usage errors (bad flags, conflicting
//! or out-of-domain inputs, unreadable files) and 2 for numerical failures
//! (solver errors, failed checks, unconverged fits).
//!
//! Accuracy settings come from, in increasing priority: the built-in
//! defaults (or `--quick`), the `[accuracy]` table of a TOML file given with
//! `--config`, and the individual accuracy flags.
//!
//! ```toml
//! [accuracy]
//! quad_order = 120
//! mode_tol = 1e-12
//! series_tol = 1e-16
//! target_rel_err = 1e-9
//! ```

mod eval;
mod fit;
mod output;
mod sweep;
mod validate;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use thiserror::Error;

use crate::analytic::RationalModel;
use crate::error::Error;
use crate::fitting::FitReport;
use crate::scattering::{AccuracySpec, KernelVariant};

pub use output::format_sig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error(transparent)]
    Lib(#[from] Error),
    #[error("{failed} of {total} checks failed")]
    ChecksFailed { failed: usize, total: usize },
    #[error("{0} sweep points failed")]
    PartialSweep(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 1,
            Self::Lib(e) => match e {
                Error::Domain(_) | Error::Config(_) | Error::InvalidModel(_) | Error::Io(_) | Error::Json(_) => 1,
                _ => 2,
            },
            Self::ChecksFailed { .. } | Self::PartialSweep(_) => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "casimir", version, about = "High-temperature Casimir free energy of two spheres in an electrolyte")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the free energy at one configuration.
    Eval(eval::EvalArgs),
    /// Tabulate the free energy over a grid of distances.
    Sweep(sweep::SweepArgs),
    /// Fit (or validate) the rational model for phi_u.
    Fit(fit::FitArgs),
    /// Run the built-in consistency checks.
    Validate(validate::ValidateArgs),
}

/// Accuracy flags shared by the subcommands.
#[derive(Debug, Clone, Default, Args)]
pub struct AccuracyArgs {
    /// TOML file with an [accuracy] table.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Start from the cheaper preset (about five digits).
    #[arg(long)]
    pub quick: bool,
    /// Minimum number of radial quadrature nodes.
    #[arg(long)]
    pub quad_order: Option<usize>,
    /// Relative truncation tolerance of the azimuthal mode sum.
    #[arg(long)]
    pub mode_tol: Option<f64>,
    /// Relative truncation tolerance of the multipole series.
    #[arg(long)]
    pub series_tol: Option<f64>,
    /// Relative accuracy goal of the discretization.
    #[arg(long)]
    pub target_rel_err: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default)]
    accuracy: Option<toml::Table>,
}

impl AccuracyArgs {
    pub fn resolve(&self) -> CliResult<AccuracySpec> {
        let mut acc = if self.quick { AccuracySpec::quick() } else { AccuracySpec::default() };
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(Error::from)?;
            let file: ConfigFile = toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            if let Some(mut table) = file.accuracy {
                // keys absent from the file keep the preset values
                let base = toml::Table::try_from(acc).map_err(|e| Error::Config(e.to_string()))?;
                for (k, v) in base {
                    table.entry(k).or_insert(v);
                }
                acc = table.try_into().map_err(|e: toml::de::Error| Error::Config(format!("{}: {e}", path.display())))?;
            }
        }
        if let Some(v) = self.quad_order {
            acc.quad_order = v;
        }
        if let Some(v) = self.mode_tol {
            acc.mode_tol = v;
        }
        if let Some(v) = self.series_tol {
            acc.series_tol = v;
        }
        if let Some(v) = self.target_rel_err {
            acc.target_rel_err = v;
        }
        acc.validate()?;
        Ok(acc)
    }
}

fn parse_variant(s: &str) -> Result<KernelVariant, String> {
    s.parse::<KernelVariant>().map_err(|e| e.to_string())
}

/// Reads a model from a JSON file holding either a model or a fit report.
fn load_model(path: &Path) -> CliResult<RationalModel> {
    let text = std::fs::read_to_string(path).map_err(Error::from)?;
    let model = match serde_json::from_str::<FitReport>(&text) {
        Ok(report) => report.model,
        Err(_) => serde_json::from_str::<RationalModel>(&text).map_err(Error::from)?,
    };
    model.validate()?;
    Ok(model)
}

fn open_output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p).map_err(Error::from)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Eval(a) => eval::run(a),
        Command::Sweep(a) => sweep::run(a),
        Command::Fit(a) => fit::run(a),
        Command::Validate(a) => validate::run(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config_file() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "[accuracy]\nquad_order = 120\nmode_tol = 1e-10").unwrap();
        let args = AccuracyArgs {
            config: Some(file.path().to_path_buf()),
            mode_tol: Some(1e-11),
            ..Default::default()
        };
        let acc = args.resolve().unwrap();
        assert_eq!(acc.quad_order, 120);
        assert_eq!(acc.mode_tol, 1e-11);
        assert_eq!(acc.target_rel_err, AccuracySpec::default().target_rel_err);
    }

    #[test]
    fn quick_preset_survives_partial_file() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "[accuracy]\nquad_order = 50").unwrap();
        let args = AccuracyArgs { config: Some(file.path().to_path_buf()), quick: true, ..Default::default() };
        let acc = args.resolve().unwrap();
        assert_eq!(acc.quad_order, 50);
        assert_eq!(acc.mode_tol, AccuracySpec::quick().mode_tol);
    }

    #[test]
    fn bad_config_is_a_usage_error() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "[accuracy]\nquad_ordr = 50").unwrap();
        let args = AccuracyArgs { config: Some(file.path().to_path_buf()), ..Default::default() };
        let err = args.resolve().unwrap_err();
        assert_eq!(err.exit_code(), 1);
        let args = AccuracyArgs { mode_tol: Some(2.0), ..Default::default() };
        assert_eq!(args.resolve().unwrap_err().exit_code(), 1);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(["casimir", "--help"]), 0);
        assert_eq!(run(["casimir", "frobnicate"]), 1);
        assert_eq!(CliError::Lib(Error::Accuracy("x".into())).exit_code(), 2);
        assert_eq!(CliError::ChecksFailed { failed: 1, total: 3 }.exit_code(), 2);
    }
}
