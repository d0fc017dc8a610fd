//! `casimir eval`: one configuration.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::Serialize;

use super::output::{format_sig, round_opt, round_sig, to_json};
use super::{load_model, parse_variant, AccuracyArgs, CliError, CliResult};
use crate::analytic::{self, RationalModel};
use crate::error::{Error, Result};
use crate::evaluate::{evaluate, EnergyResult, Method, SolverStats};
use crate::geometry::{reduce, PhysicalGeometry, ReducedGeometry};
use crate::physical::{
    dimensional_free_energy, force, validity_check_with, FreeEnergyModel, PhysicalConditions, ValidityThresholds,
    ValidityWarning, DEFAULT_ELL_T,
};
use crate::scattering::{AccuracySpec, KernelVariant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TextOrJson {
    Text,
    Json,
}

/// Geometry is given either as `--x`/`--y` with `--u`, or physically as
/// `--L` with `--R1` and either `--R2` or `--plane` (lengths in metres).
#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Reduced distance L / R_eff.
    #[arg(long)]
    pub x: Option<f64>,
    /// Conformal distance y = 1 + x + u x^2 / 2.
    #[arg(long)]
    pub y: Option<f64>,
    /// Radius-ratio parameter R1 R2 / (R1 + R2)^2 in [0, 1/4]; 0 is a plane.
    #[arg(long)]
    pub u: Option<f64>,
    /// Surface-to-surface distance in metres.
    #[arg(long = "L", value_name = "METRES")]
    pub distance: Option<f64>,
    /// Radius of the first sphere in metres.
    #[arg(long = "R1", value_name = "METRES")]
    pub radius1: Option<f64>,
    /// Radius of the second sphere in metres.
    #[arg(long = "R2", value_name = "METRES", conflicts_with = "plane")]
    pub radius2: Option<f64>,
    /// The second body is a plane.
    #[arg(long)]
    pub plane: bool,
    /// exact, eq10, eq16, pfa or dipole.
    #[arg(long, default_value = "exact", value_parser = parse_method)]
    pub method: Method,
    /// dielectric (in electrolyte) or metal (in vacuum).
    #[arg(long, default_value = "dielectric", value_parser = parse_variant)]
    pub variant: KernelVariant,
    /// Rational model JSON for eq16 (defaults to the built-in coefficients).
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
    /// Temperature in kelvin; enables energy and entropy output.
    #[arg(long = "T", value_name = "KELVIN")]
    pub temperature: Option<f64>,
    /// Debye screening length in metres, for the validity warnings.
    #[arg(long, value_name = "METRES")]
    pub debye_length: Option<f64>,
    /// Crossover distance ell_T in metres.
    #[arg(long, value_name = "METRES", default_value_t = DEFAULT_ELL_T)]
    pub ell_t: f64,
    /// Warn when L is below this multiple of the Debye length.
    #[arg(long, default_value_t = 5.0)]
    pub screening_factor: f64,
    /// Warn when L is below this multiple of ell_T.
    #[arg(long, default_value_t = 1.0)]
    pub matsubara_factor: f64,
    #[arg(long, value_enum, default_value = "text")]
    pub format: TextOrJson,
    #[command(flatten)]
    pub accuracy: AccuracyArgs,
}

pub(super) fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse::<Method>().map_err(|e| e.to_string())
}

/// Any evaluation method as a free-energy source for the force.
pub(super) struct MethodModel<'a> {
    pub method: Method,
    pub variant: KernelVariant,
    pub acc: &'a AccuracySpec,
    pub model: &'a RationalModel,
}

impl FreeEnergyModel for MethodModel<'_> {
    fn f_u(&self, geom: &ReducedGeometry) -> Result<f64> {
        Ok(evaluate(self.method, geom, self.variant, self.acc, self.model)?.value)
    }

    fn df_dy(&self, geom: &ReducedGeometry) -> Option<Result<f64>> {
        match self.method {
            Method::Eq10 => Some(analytic::single_round_trip_dy(geom.y, geom.u)),
            Method::Eq16 => Some(analytic::free_energy_approx_dy(geom.y, geom.u, self.model)),
            _ => None,
        }
    }
}

#[derive(Debug, Serialize)]
struct Thermal {
    temperature: f64,
    energy_joules: f64,
    energy_kt: f64,
    entropy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    force_newtons: Option<f64>,
}

#[derive(Debug, Serialize)]
struct EvalRecord {
    x: f64,
    y: f64,
    y_minus_1: f64,
    u: f64,
    f: f64,
    phi: f64,
    method: Method,
    variant: KernelVariant,
    est_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stats: Option<SolverStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    thermal: Option<Thermal>,
    warnings: Vec<String>,
}

fn geometry(a: &EvalArgs) -> CliResult<(ReducedGeometry, Option<PhysicalGeometry>)> {
    let reduced = [a.x.is_some(), a.y.is_some(), a.u.is_some()];
    let physical = [a.distance.is_some(), a.radius1.is_some(), a.radius2.is_some(), a.plane];
    let usage = |m: &str| Err(CliError::Usage(m.into()));
    match (reduced.iter().any(|&b| b), physical.iter().any(|&b| b)) {
        (true, true) => usage("give either --x/--y with --u, or --L/--R1/--R2, not both"),
        (false, false) => usage("no geometry given: use --x or --y with --u, or --L with --R1 and --R2/--plane"),
        (true, false) => {
            let u = match a.u {
                Some(u) => u,
                None => return usage("--u is required with --x or --y"),
            };
            let geom = match (a.x, a.y) {
                (Some(x), None) => ReducedGeometry::from_distance(x, u)?,
                (None, Some(y)) => ReducedGeometry::from_conformal(y, u)?,
                _ => return usage("give exactly one of --x and --y"),
            };
            Ok((geom, None))
        }
        (false, true) => {
            let (Some(l), Some(r1)) = (a.distance, a.radius1) else {
                return usage("--L and --R1 are required for a physical geometry");
            };
            let g = match (a.radius2, a.plane) {
                (Some(r2), false) => PhysicalGeometry::two_spheres(l, r1, r2)?,
                (None, true) => PhysicalGeometry::plane_sphere(l, r1)?,
                _ => return usage("give --R2 or --plane"),
            };
            Ok((reduce(&g)?, Some(g)))
        }
    }
}

pub fn run(a: &EvalArgs) -> CliResult<()> {
    let (geom, physical) = geometry(a)?;
    let acc = a.accuracy.resolve()?;
    let model = match &a.model {
        Some(p) => load_model(p)?,
        None => RationalModel::table_i(),
    };
    let res: EnergyResult = evaluate(a.method, &geom, a.variant, &acc, &model)?;
    let f1 = analytic::single_round_trip(geom.y, geom.u)?;
    let mut warnings = Vec::new();
    let thermal = match a.temperature {
        None => None,
        Some(t) => {
            let debye = a.debye_length.unwrap_or(f64::MIN_POSITIVE);
            let cond = PhysicalConditions::with_ell_t(t, debye, a.ell_t)?;
            let energy = dimensional_free_energy(&cond, res.value)?;
            let force_newtons = match &physical {
                Some(g) => {
                    let source = MethodModel { method: a.method, variant: a.variant, acc: &acc, model: &model };
                    Some(force(g, &cond, &source)?)
                }
                None => None,
            };
            Some(Thermal {
                temperature: t,
                energy_joules: energy.joules,
                energy_kt: energy.thermal_units,
                entropy: energy.entropy,
                force_newtons,
            })
        }
    };
    if let Some(g) = &physical {
        let debye = a.debye_length.unwrap_or(f64::MIN_POSITIVE);
        let cond = PhysicalConditions::with_ell_t(a.temperature.unwrap_or(300.0), debye, a.ell_t)?;
        let thresholds = ValidityThresholds {
            screening_factor: if a.debye_length.is_some() { a.screening_factor } else { 0.0 },
            matsubara_factor: a.matsubara_factor,
        };
        warnings.extend(validity_check_with(g, &cond, &thresholds).iter().map(ValidityWarning::to_string));
    }
    let record = EvalRecord {
        x: geom.x,
        y: geom.y,
        y_minus_1: geom.y_minus_1(),
        u: geom.u,
        f: res.value,
        phi: res.value / f1,
        method: res.method,
        variant: a.variant,
        est_error: res.error_estimate,
        stats: res.stats,
        thermal,
        warnings,
    };
    match a.format {
        TextOrJson::Json => println!("{}", to_json(&rounded(record)).map_err(Error::from)?),
        TextOrJson::Text => print_text(&record),
    }
    Ok(())
}

fn rounded(mut r: EvalRecord) -> EvalRecord {
    for v in [&mut r.x, &mut r.y, &mut r.y_minus_1, &mut r.u, &mut r.f, &mut r.phi] {
        *v = round_sig(*v);
    }
    r.est_error = round_opt(r.est_error);
    if let Some(t) = &mut r.thermal {
        for v in [&mut t.energy_joules, &mut t.energy_kt, &mut t.entropy] {
            *v = round_sig(*v);
        }
        t.force_newtons = round_opt(t.force_newtons);
    }
    r
}

fn print_text(r: &EvalRecord) {
    let line = |k: &str, v: String| println!("{k:<14} {v}");
    line("method", format!("{} ({})", r.method, r.variant.name()));
    line("x", format_sig(r.x));
    line("y - 1", format_sig(r.y_minus_1));
    line("u", format_sig(r.u));
    line("f_u", format_sig(r.f));
    line("phi_u", format_sig(r.phi));
    line("est. error", r.est_error.map_or_else(|| "n/a".into(), format_sig));
    if let Some(s) = &r.stats {
        line("modes", s.modes.to_string());
        line("nodes", format!("{} coarse, {} fine", s.coarse_nodes, s.fine_nodes));
    }
    if let Some(t) = &r.thermal {
        line("energy [J]", format_sig(t.energy_joules));
        line("energy [kT]", format_sig(t.energy_kt));
        line("entropy [J/K]", format_sig(t.entropy));
        if let Some(f) = t.force_newtons {
            line("force [N]", format_sig(f));
        }
    }
    for w in &r.warnings {
        println!("warning: {w}");
    }
}
