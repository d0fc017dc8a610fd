//! `casimir fit`: sample `phi_u`, fit the rational model and validate it.
//!
//! The JSON report has the keys `model` (`nu`, `mu`, `order`,
//! `max_deviation`), `grid` (`y_minus_1_min`, `y_minus_1_max`, `count`),
//! `achieved_eps`, `reference_u` and, unless validation is skipped,
//! `validation` (`u_values`, `grid`, `max_deviation`, `worst`).

use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use super::output::{round_sig, to_json};
use super::{load_model, open_output, AccuracyArgs, CliError, CliResult};
use crate::analytic::{phi_rational, RationalModel};
use crate::error::Error;
use crate::fitting::{fit_rational_model, sample_phi, sample_phi_grid, FitReport, PhiSample, SampleGrid};
use crate::scattering::AccuracySpec;

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Number of root pairs.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// u value of the fitted samples.
    #[arg(long, default_value_t = 0.1)]
    pub u_star: f64,
    /// Smallest y - 1 of the fit grid.
    #[arg(long, default_value_t = 1e-3)]
    pub min: f64,
    /// Largest y - 1 of the fit grid.
    #[arg(long, default_value_t = 1e2)]
    pub max: f64,
    /// Number of log-spaced fit points.
    #[arg(long, default_value_t = 200)]
    pub count: usize,
    /// Comma-separated u values of the validation grid.
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.04, 0.1, 0.25])]
    pub validate_u: Vec<f64>,
    /// Number of log-spaced y - 1 points per u in the validation grid.
    #[arg(long, default_value_t = 40)]
    pub validate_count: usize,
    /// Skip the validation pass.
    #[arg(long, conflicts_with = "validate_only")]
    pub no_validate: bool,
    /// Only validate the model given with --model.
    #[arg(long, requires = "model")]
    pub validate_only: bool,
    /// Model JSON (a model or a fit report).
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
    /// Report file (standard output by default).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub accuracy: AccuracyArgs,
}

#[derive(Debug, Serialize)]
struct Worst {
    y: f64,
    u: f64,
    phi: f64,
    phi_rm: f64,
}

#[derive(Debug, Serialize)]
struct Validation {
    u_values: Vec<f64>,
    grid: SampleGrid,
    max_deviation: f64,
    worst: Worst,
}

#[derive(Debug, Serialize)]
struct FitOutput {
    #[serde(flatten)]
    report: FitReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    validation: Option<Validation>,
}

#[derive(Debug, Serialize)]
struct ValidationOutput {
    model: RationalModel,
    validation: Validation,
}

fn validate(model: &RationalModel, a: &FitArgs, acc: &AccuracySpec) -> CliResult<Validation> {
    let grid = SampleGrid::new(a.min, a.max, a.validate_count)?;
    let samples = sample_phi_grid(&grid.ys(), &a.validate_u, acc)?;
    let mut worst = (0.0, samples[0], 1.0);
    for s in &samples {
        let rm = phi_rational(s.y, model)?;
        let dev = (s.phi / rm - 1.0).abs();
        if dev > worst.0 {
            worst = (dev, *s, rm);
        }
    }
    let (dev, s, rm): (f64, PhiSample, f64) = worst;
    Ok(Validation {
        u_values: a.validate_u.clone(),
        grid,
        max_deviation: round_sig(dev),
        worst: Worst { y: round_sig(s.y), u: s.u, phi: round_sig(s.phi), phi_rm: round_sig(rm) },
    })
}

fn rounded(mut r: FitReport) -> FitReport {
    for v in r.model.nu.iter_mut().chain(r.model.mu.iter_mut()) {
        *v = round_sig(*v);
    }
    r.model.max_deviation = round_sig(r.model.max_deviation);
    r.achieved_eps = round_sig(r.achieved_eps);
    r
}

fn emit(a: &FitArgs, json: &str) -> CliResult<()> {
    let mut out = open_output(a.output.as_deref())?;
    writeln!(out, "{json}").map_err(Error::from)?;
    out.flush().map_err(Error::from)?;
    Ok(())
}

pub fn run(a: &FitArgs) -> CliResult<()> {
    let acc = a.accuracy.resolve()?;
    if a.validate_only {
        let path = a.model.as_ref().ok_or_else(|| CliError::Usage("--validate-only needs --model".into()))?;
        let model = load_model(path)?;
        let validation = validate(&model, a, &acc)?;
        eprintln!("max deviation {:.3e}", validation.max_deviation);
        let json = to_json(&ValidationOutput { model, validation }).map_err(Error::from)?;
        return emit(a, &json);
    }
    let grid = SampleGrid::new(a.min, a.max, a.count)?;
    let samples = sample_phi(a.u_star, &grid.ys(), &acc)?;
    let (report, failure) = match fit_rational_model(&samples, a.n) {
        Ok(r) => (r, None),
        Err(Error::Fit { message, best }) => (*best, Some(message)),
        Err(e) => return Err(e.into()),
    };
    eprintln!("achieved eps {:.4e} (n = {}, u* = {})", report.achieved_eps, a.n, a.u_star);
    let validation = if a.no_validate || failure.is_some() {
        None
    } else {
        let v = validate(&report.model, a, &acc)?;
        eprintln!("validation max deviation {:.4e}", v.max_deviation);
        Some(v)
    };
    let json = to_json(&FitOutput { report: rounded(report.clone()), validation }).map_err(Error::from)?;
    emit(a, &json)?;
    match failure {
        None => Ok(()),
        Some(message) => Err(Error::Fit { message, best: Box::new(report) }.into()),
    }
}
