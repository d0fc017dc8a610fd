//! `casimir validate`: consistency checks of the solver against the closed
//! forms, the asymptotic limits and the rational model.

use std::f64::consts::PI;

use clap::Args;

use super::{parse_variant, AccuracyArgs, CliError, CliResult};
use crate::analytic::{self, RationalModel, U_SWITCH, ZETA3};
use crate::bessel::scaled_bessel_i;
use crate::error::Result;
use crate::geometry::ReducedGeometry;
use crate::scattering::{
    free_energy_exact, reflection_kernel_mode, round_trip_contribution, AccuracySpec, KernelVariant,
};

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// dielectric (in electrolyte) or metal (in vacuum).
    #[arg(long, default_value = "dielectric", value_parser = parse_variant)]
    pub variant: KernelVariant,
    #[command(flatten)]
    pub accuracy: AccuracyArgs,
}

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn from(name: &'static str, r: Result<(bool, String)>) -> Self {
        match r {
            Ok((pass, detail)) => Self { name, pass, detail },
            Err(e) => Self { name, pass: false, detail: format!("error: {e}") },
        }
    }
}

struct Plan {
    acc: AccuracySpec,
    trace_points: Vec<(f64, f64)>,
    y_minus_1: Vec<f64>,
    u_values: Vec<f64>,
}

impl Plan {
    fn new(quick: bool, acc: AccuracySpec) -> Self {
        let log_grid = |a: f64, b: f64, n: usize| -> Vec<f64> {
            (0..n).map(|i| a * (b / a).powf(i as f64 / (n - 1) as f64)).collect()
        };
        if quick {
            Self {
                acc,
                trace_points: vec![(0.1, 0.25), (1.0, 0.1), (1.0, 0.0)],
                y_minus_1: log_grid(1e-2, 1e2, 5),
                u_values: vec![0.0, 0.25],
            }
        } else {
            let mut trace_points = Vec::new();
            for em1 in [1e-2, 1e-1, 1.0, 10.0] {
                for u in [0.0, 0.04, 0.1, 0.25] {
                    trace_points.push((em1, u));
                }
            }
            Self {
                acc,
                trace_points,
                y_minus_1: log_grid(1e-3, 1e2, 11),
                u_values: vec![0.0, 0.04, 0.1, 0.25],
            }
        }
    }
}

fn exact(y: f64, u: f64, variant: KernelVariant, acc: &AccuracySpec) -> Result<f64> {
    Ok(free_energy_exact(&ReducedGeometry::from_conformal(y, u)?, variant, acc)?.value)
}

fn trace_check(plan: &Plan) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for &(em1, u) in &plan.trace_points {
        let geom = ReducedGeometry::from_conformal(1.0 + em1, u)?;
        let t = round_trip_contribution(1, &geom, KernelVariant::DielectricInElectrolyte, &plan.acc)?.value;
        worst = worst.max((t / analytic::single_round_trip(1.0 + em1, u)? - 1.0).abs());
    }
    let tol = 1e-6;
    Ok((worst <= tol, format!("max relative deviation {worst:.2e} over {} points (tol {tol:.0e})", plan.trace_points.len())))
}

fn large_distance_check(plan: &Plan) -> Result<(bool, String)> {
    let y = 50.0;
    let mut parts = Vec::new();
    let mut pass = true;
    for u in [0.0, 0.25] {
        let f = exact(y, u, KernelVariant::DielectricInElectrolyte, &plan.acc)?;
        let ratio = f / analytic::large_distance_limit(y, u)?;
        pass &= (ratio - 1.0).abs() <= 0.01;
        parts.push(format!("u={u}: {ratio:.5}"));
    }
    Ok((pass, format!("f / dipole limit at y=50: {} (tol 1%)", parts.join(", "))))
}

fn pfa_check(plan: &Plan) -> Result<(bool, String)> {
    let em1 = 1e-3;
    let f = exact(1.0 + em1, 0.0, KernelVariant::DielectricInElectrolyte, &plan.acc)?;
    let ratio = f / analytic::pfa_limit(1.0 + em1)?;
    Ok(((ratio - 1.0).abs() <= 0.03, format!("f / PFA at y-1=1e-3, u=0: {ratio:.5} (tol 3%)")))
}

/// Exact `phi_u` on the plan's grid, one row per `u`.
fn phi_table(plan: &Plan, variant: KernelVariant) -> Result<Vec<Vec<(f64, f64, f64)>>> {
    plan.u_values
        .iter()
        .map(|&u| {
            plan.y_minus_1
                .iter()
                .map(|&em1| {
                    let y = 1.0 + em1;
                    let f = exact(y, u, variant, &plan.acc)?;
                    Ok((y, f, f / analytic::single_round_trip(y, u)?))
                })
                .collect()
        })
        .collect()
}

fn phi_bounds_check(table: &[Vec<(f64, f64, f64)>]) -> (bool, String) {
    let (lo, hi) = table
        .iter()
        .flatten()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &(_, _, p)| (lo.min(p), hi.max(p)));
    let pass = lo >= 1.0 && hi <= ZETA3 * (1.0 + 1e-6);
    (pass, format!("phi in [{lo:.6}, {hi:.6}], required within [1, zeta(3)]"))
}

/// `f` strictly decreasing along each row, and `phi` too when `with_phi`.
fn monotonic_check(table: &[Vec<(f64, f64, f64)>], with_phi: bool) -> (bool, String) {
    let mut bad = 0;
    for row in table {
        for w in row.windows(2) {
            if !(w[1].1 < w[0].1 && (!with_phi || w[1].2 <= w[0].2)) {
                bad += 1;
            }
        }
    }
    let what = if with_phi { "f or phi" } else { "f" };
    (bad == 0, format!("{bad} non-decreasing steps in {what}"))
}

fn model_check(table: &[Vec<(f64, f64, f64)>]) -> Result<(bool, String)> {
    let model = RationalModel::table_i();
    let mut worst = 0.0f64;
    for &(y, _, phi) in table.iter().flatten() {
        worst = worst.max((phi / analytic::phi_rational(y, &model)? - 1.0).abs());
    }
    Ok((worst <= 1.3e-3, format!("max |phi / phi_rm - 1| = {worst:.3e} (tol 1.3e-3)")))
}

fn continuity_check() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for y in [1.01, 2.0, 10.0] {
        let below = analytic::single_round_trip(y, U_SWITCH * (1.0 - 1e-12))?;
        let above = analytic::single_round_trip(y, U_SWITCH * (1.0 + 1e-12))?;
        worst = worst.max((above - below).abs() / above);
    }
    Ok((worst <= 1e-8, format!("relative jump at the small-u switch {worst:.2e} (tol 1e-8)")))
}

fn ordering_check(plan: &Plan, metal: &[Vec<(f64, f64, f64)>]) -> Result<(bool, String)> {
    let mut bad = 0;
    for (row, &u) in metal.iter().zip(&plan.u_values) {
        for &(y, fm, _) in row {
            if fm <= exact(y, u, KernelVariant::DielectricInElectrolyte, &plan.acc)? {
                bad += 1;
            }
        }
    }
    Ok((bad == 0, format!("{bad} grid points with metal f <= dielectric f")))
}

fn bessel_check() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for (k, kp, r) in [(0.3, 0.5, 1.0), (2.0, 1.5, 3.0), (40.0, 60.0, 2.0), (0.01, 0.02, 0.5)] {
        let a = 2.0 * r * f64::sqrt(k * kp);
        let gap = f64::sqrt(k) - f64::sqrt(kp);
        let reference = -2.0 * PI * r / kp * (-r * gap * gap).exp() * (scaled_bessel_i(0, a) - (-a).exp());
        let got = reflection_kernel_mode(0, k, kp, r, KernelVariant::MetalInVacuum, 1e-16)?;
        worst = worst.max((got / reference - 1.0).abs());
    }
    Ok((worst <= 1e-8, format!("m=0 metal kernel vs scaled Bessel: {worst:.2e} (tol 1e-8)")))
}

/// Runs the suite for `variant`; `quick` uses a reduced grid.
pub fn run_checks(variant: KernelVariant, acc: &AccuracySpec, quick: bool) -> Vec<Check> {
    let plan = Plan::new(quick, *acc);
    let mut out = Vec::new();
    match variant {
        KernelVariant::DielectricInElectrolyte => {
            out.push(Check::from("trace-vs-closed-form", trace_check(&plan)));
            out.push(Check::from("large-distance-limit", large_distance_check(&plan)));
            out.push(Check::from("proximity-force-limit", pfa_check(&plan)));
            out.push(Check::from("small-u-continuity", continuity_check()));
            match phi_table(&plan, variant) {
                Ok(t) => {
                    let (pass, detail) = phi_bounds_check(&t);
                    out.push(Check { name: "phi-bounds", pass, detail });
                    let (pass, detail) = monotonic_check(&t, true);
                    out.push(Check { name: "monotonicity", pass, detail });
                    out.push(Check::from("rational-model", model_check(&t)));
                }
                Err(e) => out.push(Check { name: "phi-table", pass: false, detail: format!("error: {e}") }),
            }
        }
        KernelVariant::MetalInVacuum => {
            out.push(Check::from("bessel-cross-check", bessel_check()));
            match phi_table(&plan, variant) {
                Ok(t) => {
                    let (pass, detail) = monotonic_check(&t, false);
                    out.push(Check { name: "monotonicity", pass, detail });
                    out.push(Check::from("variant-ordering", ordering_check(&plan, &t)));
                }
                Err(e) => out.push(Check { name: "phi-table", pass: false, detail: format!("error: {e}") }),
            }
        }
    }
    out
}

pub fn run(a: &ValidateArgs) -> CliResult<()> {
    let acc = a.accuracy.resolve()?;
    let checks = run_checks(a.variant, &acc, a.accuracy.quick);
    for c in &checks {
        println!("{} {:<24} {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    if failed > 0 {
        return Err(CliError::ChecksFailed { failed, total: checks.len() });
    }
    Ok(())
}
