//! `casimir sweep`: tables of `f_u` over a distance grid.
//!
//! CSV columns, in order: `x, y_minus_1, u, f, phi, method, est_error`.
//! Numbers have ten significant digits in scientific notation; `est_error`
//! is empty when the method has no estimate. Rows are ordered by `u`, then
//! method, then grid point, exactly as requested on the command line. JSON
//! output is an array of objects with the same keys.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use super::eval::parse_method;
use super::output::{format_sig, round_opt, round_sig, to_json};
use super::{load_model, open_output, parse_variant, AccuracyArgs, CliError, CliResult};
use crate::analytic::{self, RationalModel};
use crate::error::{domain, Error, Result};
use crate::evaluate::{evaluate, Method};
use crate::geometry::{distance_from_conformal, ReducedGeometry};
use crate::scattering::{AccuracySpec, KernelVariant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    X,
    #[value(name = "y-minus-1", alias = "y_minus_1")]
    YMinus1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Log,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CsvOrJson {
    Csv,
    Json,
}

/// A sweep: grid in one distance variable, a set of `u` values and methods.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
    pub u_values: Vec<f64>,
    pub methods: Vec<Method>,
    pub variant: KernelVariant,
}

/// One output row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub x: f64,
    pub y_minus_1: f64,
    pub u: f64,
    pub f: f64,
    pub phi: f64,
    pub method: Method,
    pub est_error: Option<f64>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.count < 2 {
            return Err(domain(format!("count must be at least 2, got {}", self.count)));
        }
        if !(self.min > 0.0 && self.max > self.min && self.max.is_finite()) {
            return Err(domain(format!("range needs 0 < min < max, got [{}, {}]", self.min, self.max)));
        }
        if self.u_values.is_empty() || self.methods.is_empty() {
            return Err(domain("at least one u value and one method are required"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let t = |i: usize| i as f64 / (self.count - 1) as f64;
        match self.spacing {
            Spacing::Log => {
                let (a, b) = (self.min.ln(), self.max.ln());
                (0..self.count).map(|i| (a + (b - a) * t(i)).exp()).collect()
            }
            Spacing::Linear => (0..self.count).map(|i| self.min + (self.max - self.min) * t(i)).collect(),
        }
    }

    fn point(&self, v: f64, u: f64) -> Result<ReducedGeometry> {
        let x = match self.variable {
            SweepVariable::X => v,
            SweepVariable::YMinus1 => distance_from_conformal(1.0 + v, u)?,
        };
        ReducedGeometry::from_distance(x, u)
    }

    /// All rows in output order; failed points are returned as errors in place.
    pub fn evaluate(&self, acc: &AccuracySpec, model: &RationalModel) -> Result<Vec<Result<SweepRow>>> {
        self.validate()?;
        let grid = self.grid();
        let mut jobs = Vec::new();
        for &u in &self.u_values {
            for &m in &self.methods {
                for &v in &grid {
                    jobs.push((u, m, v));
                }
            }
        }
        Ok(jobs
            .par_iter()
            .map(|&(u, method, v)| {
                let geom = self.point(v, u)?;
                let r = evaluate(method, &geom, self.variant, acc, model)?;
                let f1 = analytic::single_round_trip(geom.y, geom.u)?;
                Ok(SweepRow {
                    x: geom.x,
                    y_minus_1: geom.y_minus_1(),
                    u,
                    f: r.value,
                    phi: r.value / f1,
                    method,
                    est_error: r.error_estimate,
                })
            })
            .collect())
    }
}

pub const CSV_HEADER: [&str; 7] = ["x", "y_minus_1", "u", "f", "phi", "method", "est_error"];

pub fn write_csv<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            format_sig(r.x),
            format_sig(r.y_minus_1),
            format_sig(r.u),
            format_sig(r.f),
            format_sig(r.phi),
            r.method.name().to_string(),
            r.est_error.map(format_sig).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(Error::from)
}

pub fn write_json<W: Write>(mut out: W, rows: &[SweepRow]) -> Result<()> {
    let rounded: Vec<SweepRow> = rows
        .iter()
        .map(|r| SweepRow {
            x: round_sig(r.x),
            y_minus_1: round_sig(r.y_minus_1),
            u: round_sig(r.u),
            f: round_sig(r.f),
            phi: round_sig(r.phi),
            method: r.method,
            est_error: round_opt(r.est_error),
        })
        .collect();
    writeln!(out, "{}", to_json(&rounded)?)?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Grid variable.
    #[arg(long, value_enum, default_value = "x")]
    pub variable: SweepVariable,
    #[arg(long, default_value_t = 1e-2)]
    pub min: f64,
    #[arg(long, default_value_t = 10.0)]
    pub max: f64,
    /// Number of grid points.
    #[arg(long, default_value_t = 40)]
    pub count: usize,
    #[arg(long, value_enum, default_value = "log")]
    pub spacing: Spacing,
    /// Comma-separated u values.
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.04, 0.1, 0.25])]
    pub u: Vec<f64>,
    /// Comma-separated methods.
    #[arg(long, value_delimiter = ',', value_parser = parse_method, default_value = "exact")]
    pub method: Vec<Method>,
    #[arg(long, default_value = "dielectric", value_parser = parse_variant)]
    pub variant: KernelVariant,
    /// Rational model JSON for eq16.
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: CsvOrJson,
    /// Output file (standard output by default).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub accuracy: AccuracyArgs,
}

pub fn run(a: &SweepArgs) -> CliResult<()> {
    let spec = SweepSpec {
        variable: a.variable,
        min: a.min,
        max: a.max,
        count: a.count,
        spacing: a.spacing,
        u_values: a.u.clone(),
        methods: a.method.clone(),
        variant: a.variant,
    };
    let acc = a.accuracy.resolve()?;
    let model = match &a.model {
        Some(p) => load_model(p)?,
        None => RationalModel::table_i(),
    };
    let results = spec.evaluate(&acc, &model)?;
    let mut rows = Vec::with_capacity(results.len());
    let mut failed = 0;
    let mut first_error = None;
    for r in results {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => {
                eprintln!("warning: sweep point failed: {e}");
                failed += 1;
                first_error.get_or_insert(e);
            }
        }
    }
    let out = open_output(a.output.as_deref())?;
    match a.format {
        CsvOrJson::Csv => write_csv(out, &rows)?,
        CsvOrJson::Json => write_json(out, &rows)?,
    }
    match (failed, first_error) {
        (0, _) => Ok(()),
        (n, Some(e)) if rows.is_empty() => {
            eprintln!("error: all {n} sweep points failed");
            Err(CliError::Lib(e))
        }
        (n, _) => Err(CliError::PartialSweep(n)),
    }
}
