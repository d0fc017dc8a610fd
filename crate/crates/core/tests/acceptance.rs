//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits with
//! a nonzero status if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use casimir_core::analytic::{
    large_distance_limit, pfa_limit, phi_rational, single_round_trip, RationalModel, U_SWITCH,
};
use casimir_core::bessel::scaled_bessel_i;
use casimir_core::fitting::{fit_rational_model, sample_phi, PhiSample, SampleGrid};
use casimir_core::geometry::ReducedGeometry;
use casimir_core::scattering::{
    free_energy_exact, reflection_kernel_mode, round_trip_contribution, round_trip_contributions, AccuracySpec,
    KernelVariant,
};
use casimir_core::Result;

const DIEL: KernelVariant = KernelVariant::DielectricInElectrolyte;
const METAL: KernelVariant = KernelVariant::MetalInVacuum;
const U_GRID: [f64; 4] = [0.0, 0.04, 0.1, 0.25];
const VALIDATION_POINTS: usize = 40;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

/// Exact `phi_u` over the validation grid, one row per entry of `U_GRID`.
struct Table {
    rows: Vec<Vec<PhiSample>>,
    f: Vec<Vec<f64>>,
}

fn validation_ys() -> Vec<f64> {
    SampleGrid::new(1e-3, 1e2, VALIDATION_POINTS).unwrap().ys()
}

fn table(variant: KernelVariant, acc: &AccuracySpec) -> Result<Table> {
    let ys = validation_ys();
    let mut rows = Vec::new();
    let mut fs = Vec::new();
    for u in U_GRID {
        let mut row = Vec::new();
        let mut frow = Vec::new();
        for &y in &ys {
            let r = free_energy_exact(&ReducedGeometry::from_conformal(y, u)?, variant, acc)?;
            let f1 = single_round_trip(y, u)?;
            row.push(PhiSample { y, u, phi: r.value / f1, err: r.relative_error().unwrap_or(0.0) });
            frow.push(r.value);
        }
        rows.push(row);
        fs.push(frow);
    }
    Ok(Table { rows, f: fs })
}

fn exact(y: f64, u: f64, acc: &AccuracySpec) -> Result<f64> {
    Ok(free_energy_exact(&ReducedGeometry::from_conformal(y, u)?, DIEL, acc)?.value)
}

fn c01_single_round_trip(acc: &AccuracySpec) -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut slowest = 0.0f64;
    for em1 in [1e-2, 1e-1, 1.0, 10.0] {
        for u in [0.04, 0.1, 0.25] {
            let t0 = Instant::now();
            let geom = ReducedGeometry::from_conformal(1.0 + em1, u)?;
            let tr = round_trip_contribution(1, &geom, DIEL, acc)?.value;
            slowest = slowest.max(t0.elapsed().as_secs_f64());
            worst = worst.max((tr / single_round_trip(1.0 + em1, u)? - 1.0).abs());
        }
    }
    outcome(
        worst <= 1e-6 && slowest < 10.0 && acc.quad_order >= 80,
        format!("max |TrM/2 / f1 - 1| = {worst:.2e} (tol 1e-6), slowest point {slowest:.2} s (limit 10 s)"),
    )
}

fn c02_pfa(acc: &AccuracySpec) -> Result<Outcome> {
    let y = 1.0 + 1e-3;
    let ratio = exact(y, 0.25, acc)? / pfa_limit(y)?;
    outcome(
        (0.99..=1.01).contains(&ratio),
        format!("f * 8(y-1)/zeta(3) at y-1=1e-3, u=0.25: {ratio:.5} (required [0.99, 1.01])"),
    )
}

fn c03_large_distance(acc: &AccuracySpec) -> Result<Outcome> {
    let y = 50.0;
    let mut pass = true;
    let mut parts = Vec::new();
    for u in [0.04, 0.25, 0.0] {
        let ratio = exact(y, u, acc)? / large_distance_limit(y, u)?;
        pass &= (0.99..=1.01).contains(&ratio);
        parts.push(format!("u={u}: {ratio:.5}"));
    }
    outcome(pass, format!("f * (32/3 or 8) y^3 at y=50: {} (required [0.99, 1.01])", parts.join(", ")))
}

fn c04_three_quarters() -> Result<Outcome> {
    let y = 100.0;
    let f0 = single_round_trip(y, 0.0)?;
    let mut pass = true;
    let mut parts = Vec::new();
    for u in [0.04, 0.1, 0.25] {
        let ratio = single_round_trip(y, u)? / f0;
        pass &= (ratio / 0.75 - 1.0).abs() <= 0.01;
        parts.push(format!("u={u}: {ratio:.5}"));
    }
    outcome(pass, format!("f1_u / f1_0 at y=100: {} (required 0.75 within 1%)", parts.join(", ")))
}

fn c05_conformal_spread(t: &Table) -> Result<Outcome> {
    let reference = &t.rows[2];
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst = (0.0, 0.0, 0.0);
    for row in &t.rows {
        for (s, r) in row.iter().zip(reference) {
            let dev = (s.phi / r.phi - 1.0).abs();
            let allowed = 4e-4 + 2.0 * (s.err + r.err);
            if dev - allowed > worst_excess {
                worst_excess = dev - allowed;
                worst = (dev, s.y - 1.0, s.u);
            }
        }
    }
    let max_dev = t
        .rows
        .iter()
        .flat_map(|row| row.iter().zip(reference).map(|(s, r)| (s.phi / r.phi - 1.0).abs()))
        .fold(0.0, f64::max);
    outcome(
        worst_excess <= 0.0,
        format!(
            "max |phi_u / phi_0.1 - 1| = {max_dev:.3e}; tightest point y-1={:.3e}, u={} with {:.3e} (tol 4e-4 + 2 err)",
            worst.1, worst.2, worst.0
        ),
    )
}

fn c06_table_model(t: &Table) -> Result<Outcome> {
    let model = RationalModel::table_i();
    let mut worst = 0.0f64;
    for s in t.rows.iter().flatten() {
        worst = worst.max((s.phi / phi_rational(s.y, &model)? - 1.0).abs());
    }
    outcome(worst <= 1.3e-3, format!("max |phi_u / phi_rm - 1| = {worst:.4e} (tol 1.3e-3)"))
}

fn c07_refit(samples: &[PhiSample]) -> Result<Outcome> {
    let e2 = fit_rational_model(samples, 2)?.achieved_eps;
    let e4 = fit_rational_model(samples, 4)?.achieved_eps;
    outcome(
        e2 <= 1.3e-3 && e4 < e2,
        format!("eps(n=2) = {e2:.4e} (tol 1.3e-3), eps(n=4) = {e4:.4e} (must be below n=2)"),
    )
}

fn c08_round_trip_scaling(acc: &AccuracySpec) -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for u in [0.0, 0.25] {
        let geom = ReducedGeometry::from_conformal(1.0 + 1e-3, u)?;
        let terms = round_trip_contributions(&[1, 2, 3], &geom, DIEL, acc)?;
        for (r, t) in [(2.0f64, &terms[1]), (3.0, &terms[2])] {
            let ratio = t.value * r.powi(3) / terms[0].value;
            pass &= (0.98..=1.02).contains(&ratio);
            parts.push(format!("u={u} r={r}: {ratio:.4}"));
        }
    }
    outcome(pass, format!("f^(r) r^3 / f^(1) at y-1=1e-3: {} (required [0.98, 1.02])", parts.join(", ")))
}

fn c09_endpoints(t: &Table) -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for row in &t.rows {
        let (first, last) = (row[0], row[row.len() - 1]);
        pass &= (1.19..=1.21).contains(&first.phi) && (1.0..=1.001).contains(&last.phi);
        parts.push(format!("u={}: {:.6} / {:.9}", first.u, first.phi, last.phi));
    }
    outcome(
        pass,
        format!("phi at y-1=1e-3 / 1e2: {} (required [1.19, 1.21] / [1, 1.001])", parts.join(", ")),
    )
}

fn c10_monotonicity(t: &Table, acc: &AccuracySpec) -> Result<Outcome> {
    let mut f_bad = 0;
    let mut phi_bad = 0;
    for (row, frow) in t.rows.iter().zip(&t.f) {
        f_bad += frow.windows(2).filter(|w| w[1] >= w[0]).count();
        phi_bad += row.windows(2).filter(|w| w[1].phi > w[0].phi).count();
    }
    // curves at fixed x ordered top to bottom by increasing u
    let xs = validation_ys().iter().map(|y| y - 1.0).collect::<Vec<_>>();
    let mut order_bad = 0;
    for &x in &xs {
        let mut prev = f64::INFINITY;
        for u in U_GRID {
            let f = free_energy_exact(&ReducedGeometry::from_distance(x, u)?, DIEL, acc)?.value;
            if f >= prev {
                order_bad += 1;
            }
            prev = f;
        }
    }
    outcome(
        f_bad + phi_bad + order_bad == 0,
        format!(
            "violations: f increasing in y {f_bad}, phi increasing in y {phi_bad}, u-ordering at fixed x {order_bad} ({} x values)",
            xs.len()
        ),
    )
}

fn c11_switch_continuity() -> Result<Outcome> {
    let below = f64::from_bits(U_SWITCH.to_bits() - 1);
    let above = f64::from_bits(U_SWITCH.to_bits() + 1);
    let mut worst = 0.0f64;
    for y in [1.01, 2.0, 10.0] {
        let (a, b) = (single_round_trip(y, above)?, single_round_trip(y, below)?);
        worst = worst.max((a - b).abs() / a);
    }
    outcome(worst <= 1e-8, format!("max relative jump across the small-u switch {worst:.2e} (tol 1e-8)"))
}

fn c12_metal(t: &Table, acc: &AccuracySpec) -> Result<Outcome> {
    let metal = table(METAL, acc)?;
    let mut bad = 0;
    for (m, d) in metal.f.iter().flatten().zip(t.f.iter().flatten()) {
        if m <= d {
            bad += 1;
        }
    }
    let mut worst = 0.0f64;
    for (k, kp, r) in [(0.3, 0.5, 1.0), (2.0, 1.5, 3.0), (40.0, 60.0, 2.0), (0.01, 0.02, 0.5), (5.0, 5.0, 10.0)] {
        let a = 2.0 * r * f64::sqrt(k * kp);
        let gap = f64::sqrt(k) - f64::sqrt(kp);
        let reference = -2.0 * PI * r / kp * (-r * gap * gap).exp() * (scaled_bessel_i(0, a) - (-a).exp());
        let got = reflection_kernel_mode(0, k, kp, r, METAL, 1e-16)?;
        worst = worst.max((got / reference - 1.0).abs());
    }
    outcome(
        bad == 0 && worst <= 1e-8,
        format!(
            "{bad} of {} grid points with metal f <= dielectric f; m=0 metal kernel vs scaled Bessel {worst:.2e} (tol 1e-8)",
            metal.f.iter().flatten().count()
        ),
    )
}

fn main() -> ExitCode {
    let acc = AccuracySpec::default();
    let start = Instant::now();
    let mut results: Vec<(usize, &str, Result<Outcome>)> = Vec::new();
    let mut report = |n: usize, name: &'static str, r: Result<Outcome>| {
        match &r {
            Ok(o) => println!("criterion {n:>2} {} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail),
            Err(e) => println!("criterion {n:>2} FAIL {name}: error: {e}"),
        }
        results.push((n, name, r));
    };

    report(1, "single-round-trip oracle", c01_single_round_trip(&acc));
    report(2, "proximity-force limit", c02_pfa(&acc));
    report(3, "large-distance limit", c03_large_distance(&acc));
    report(4, "factor 3/4", c04_three_quarters());

    let dielectric = table(DIEL, &acc);
    match &dielectric {
        Ok(t) => {
            report(5, "conformal-invariance bound", c05_conformal_spread(t));
            report(6, "shipped rational model", c06_table_model(t));
        }
        Err(e) => {
            for (n, name) in [(5, "conformal-invariance bound"), (6, "shipped rational model")] {
                println!("criterion {n:>2} FAIL {name}: error: {e}");
            }
        }
    }
    let samples = sample_phi(0.1, &SampleGrid::default().ys(), &acc);
    match &samples {
        Ok(s) => report(7, "refit", c07_refit(s)),
        Err(e) => println!("criterion  7 FAIL refit: error: {e}"),
    }
    report(8, "round-trip scaling", c08_round_trip_scaling(&acc));
    match &dielectric {
        Ok(t) => {
            report(9, "phi endpoints", c09_endpoints(t));
            report(10, "monotonicity", c10_monotonicity(t, &acc));
        }
        Err(e) => {
            for (n, name) in [(9, "phi endpoints"), (10, "monotonicity")] {
                println!("criterion {n:>2} FAIL {name}: error: {e}");
            }
        }
    }
    report(11, "small-u branch continuity", c11_switch_continuity());
    match &dielectric {
        Ok(t) => report(12, "metal variant", c12_metal(t, &acc)),
        Err(e) => println!("criterion 12 FAIL metal variant: error: {e}"),
    }

    let passed = results.iter().filter(|(_, _, r)| matches!(r, Ok(o) if o.pass)).count();
    let failed = 12 - passed;
    println!(
        "acceptance: {passed} passed, {failed} failed ({:.0} s)",
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
