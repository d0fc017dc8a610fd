//! Fitting the product-form rational model to sampled ratios
//! `phi_u = f_u / f_u^(1)`.
//!
//! Roots are parameterized by their logarithms, so positivity holds by
//! construction. The fit minimizes the maximal relative deviation
//! `|phi / phi_rm - 1|`: a weighted least-squares fit in `log phi` is
//! reweighted toward the largest residuals (Lawson's iteration) and the
//! result is polished by Nelder-Mead on the maximal deviation itself.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{single_round_trip, RationalModel};
use crate::error::{domain, Error, Result};
use crate::geometry::{ReducedGeometry, U_MAX};
use crate::scattering::{free_energy_exact, AccuracySpec, KernelVariant};

/// One sampled value of `phi_u(y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiSample {
    pub y: f64,
    pub u: f64,
    pub phi: f64,
    /// Estimated relative error of `phi`.
    pub err: f64,
}

/// Log-spaced grid in `y - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleGrid {
    pub y_minus_1_min: f64,
    pub y_minus_1_max: f64,
    pub count: usize,
}

impl Default for SampleGrid {
    fn default() -> Self {
        Self {
            y_minus_1_min: 1e-3,
            y_minus_1_max: 1e2,
            count: 200,
        }
    }
}

impl SampleGrid {
    pub fn new(y_minus_1_min: f64, y_minus_1_max: f64, count: usize) -> Result<Self> {
        let grid = Self {
            y_minus_1_min,
            y_minus_1_max,
            count,
        };
        if !(y_minus_1_min > 0.0 && y_minus_1_max > y_minus_1_min && y_minus_1_max.is_finite()) {
            return Err(domain(format!(
                "grid needs 0 < min < max, got [{y_minus_1_min}, {y_minus_1_max}]"
            )));
        }
        if count < 2 {
            return Err(domain(format!("grid needs at least 2 points, got {count}")));
        }
        Ok(grid)
    }

    /// The `y` values, ascending.
    pub fn ys(&self) -> Vec<f64> {
        let (a, b) = (self.y_minus_1_min.ln(), self.y_minus_1_max.ln());
        (0..self.count)
            .map(|i| 1.0 + (a + (b - a) * i as f64 / (self.count - 1) as f64).exp())
            .collect()
    }

    fn of_samples(samples: &[PhiSample]) -> Self {
        let em1 = samples.iter().map(|s| s.y - 1.0);
        Self {
            y_minus_1_min: em1.clone().fold(f64::INFINITY, f64::min),
            y_minus_1_max: em1.fold(0.0, f64::max),
            count: samples.len(),
        }
    }
}

/// Outcome of a fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub model: RationalModel,
    pub grid: SampleGrid,
    /// Maximal relative deviation `|phi / phi_rm - 1|` over the samples.
    pub achieved_eps: f64,
    pub reference_u: f64,
}

/// Optimizer budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub lawson_iterations: usize,
    pub simplex_iterations: usize,
    pub simplex_restarts: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            lawson_iterations: 80,
            simplex_iterations: 20_000,
            simplex_restarts: 4,
        }
    }
}

/// `phi_u` at `(y, u)` from the exact solver.
pub fn phi_sample(y: f64, u: f64, variant: KernelVariant, acc: &AccuracySpec) -> Result<PhiSample> {
    let geom = ReducedGeometry::from_conformal(y, u)?;
    let f = free_energy_exact(&geom, variant, acc)?;
    let f1 = single_round_trip(y, u)?;
    Ok(PhiSample {
        y,
        u,
        phi: f.value / f1,
        err: f.relative_error().unwrap_or(0.0),
    })
}

/// Samples `phi_{u_star}` on the given `y` values.
pub fn sample_phi(u_star: f64, grid: &[f64], acc: &AccuracySpec) -> Result<Vec<PhiSample>> {
    if !(0.0..=U_MAX).contains(&u_star) {
        return Err(domain(format!("u_star must lie in [0, {U_MAX}], got {u_star}")));
    }
    if let Some(&y) = grid.iter().find(|&&y| !(y > 1.0 && y.is_finite())) {
        return Err(domain(format!("grid values must exceed 1, got {y}")));
    }
    grid.par_iter()
        .map(|&y| phi_sample(y, u_star, KernelVariant::DielectricInElectrolyte, acc))
        .collect()
}

/// Exact `phi_u` over the product of `y_grid` and `u_grid`, `u` outermost.
pub fn sample_phi_grid(y_grid: &[f64], u_grid: &[f64], acc: &AccuracySpec) -> Result<Vec<PhiSample>> {
    let mut out = Vec::with_capacity(y_grid.len() * u_grid.len());
    for &u in u_grid {
        out.extend(sample_phi(u, y_grid, acc)?);
    }
    Ok(out)
}

/// Maximal `|phi / phi_rm - 1|` over samples.
pub fn max_deviation(model: &RationalModel, samples: &[PhiSample]) -> Result<f64> {
    model.validate()?;
    Ok(samples
        .iter()
        .map(|s| (s.phi / model.eval_unchecked((s.y - 1.0).exp_m1()) - 1.0).abs())
        .fold(0.0, f64::max))
}

/// Maximal deviation of the exact `phi_u` from the model over a grid.
pub fn validate_model(
    model: &RationalModel,
    y_grid: &[f64],
    u_grid: &[f64],
    acc: &AccuracySpec,
) -> Result<f64> {
    if y_grid.is_empty() || u_grid.is_empty() {
        return Err(domain("validation grids must be nonempty"));
    }
    model.validate()?;
    max_deviation(model, &sample_phi_grid(y_grid, u_grid, acc)?)
}

/// Fits an order-`n` model with the default optimizer budget.
pub fn fit_rational_model(samples: &[PhiSample], n: usize) -> Result<FitReport> {
    fit_rational_model_with(samples, n, &FitOptions::default())
}

pub fn fit_rational_model_with(samples: &[PhiSample], n: usize, opts: &FitOptions) -> Result<FitReport> {
    if n == 0 {
        return Err(domain("model order must be at least 1"));
    }
    if samples.len() < 2 * n {
        return Err(domain(format!(
            "{} samples cannot determine {} roots",
            samples.len(),
            2 * n
        )));
    }
    let grid = SampleGrid::of_samples(samples);
    if grid.y_minus_1_min > 1e-2 || grid.y_minus_1_max < 10.0 {
        return Err(domain(format!(
            "samples must reach y-1 <= 1e-2 and y-1 >= 10, got [{}, {}]",
            grid.y_minus_1_min, grid.y_minus_1_max
        )));
    }
    if let Some(s) = samples.iter().find(|s| !(s.phi > 0.0 && s.phi.is_finite() && s.y > 1.0)) {
        return Err(domain(format!("invalid sample {s:?}")));
    }
    let problem = Problem::new(samples);
    let mut best: Option<(Vec<f64>, f64)> = None;
    for seed in seeds(n) {
        let theta = problem.lawson(seed, opts.lawson_iterations);
        let eps = problem.max_rel(&theta);
        if best.as_ref().is_none_or(|(_, e)| eps < *e) {
            best = Some((theta, eps));
        }
    }
    let (theta, _) = best.expect("at least one seed");
    let (theta, eps, converged) = problem.polish(theta, opts);
    let u_ref = samples[0].u;
    let report = FitReport {
        model: problem.model(&theta, eps),
        grid,
        achieved_eps: eps,
        reference_u: u_ref,
    };
    if !eps.is_finite() || !converged {
        return Err(Error::Fit {
            message: format!("minimax polish did not converge (best eps {eps:.3e})"),
            best: Box::new(report),
        });
    }
    Ok(report)
}

/// Starting roots `(ln nu, ln mu)`, interleaved per pair.
fn seeds(n: usize) -> Vec<Vec<f64>> {
    let table = RationalModel::table_i();
    let pairs: Vec<(f64, f64)> = table.nu.iter().copied().zip(table.mu.iter().copied()).collect();
    let mut out = Vec::new();
    match n {
        2 => out.push(pairs.clone()),
        4 => {
            for spread in [2.0, 4.0] {
                let mut split = Vec::new();
                for &(nu, mu) in &pairs {
                    let g = (nu * mu).sqrt();
                    let half = (nu / mu).sqrt().sqrt();
                    split.push((g * spread * half, g * spread / half));
                    split.push((g / spread * half, g / spread / half));
                }
                out.push(split);
            }
        }
        _ => {}
    }
    // generic: log-spaced centers, equal share of the contact ratio
    let share = crate::analytic::ZETA3.powf(1.0 / n as f64).sqrt();
    out.push(
        (0..n)
            .map(|k| {
                let c = if n == 1 { 0.02 } else { 1e-3 * 300f64.powf(k as f64 / (n - 1) as f64) };
                (c * share, c / share)
            })
            .collect(),
    );
    out.into_iter()
        .map(|p| p.into_iter().flat_map(|(nu, mu)| [nu.ln(), mu.ln()]).collect())
        .collect()
}

struct Problem {
    em1: Vec<f64>,
    log_phi: Vec<f64>,
}

impl Problem {
    fn new(samples: &[PhiSample]) -> Self {
        Self {
            em1: samples.iter().map(|s| (s.y - 1.0).exp_m1()).collect(),
            log_phi: samples.iter().map(|s| s.phi.ln()).collect(),
        }
    }

    fn model(&self, theta: &[f64], eps: f64) -> RationalModel {
        let (nu, mu): (Vec<f64>, Vec<f64>) = theta.chunks(2).map(|p| (p[0].exp(), p[1].exp())).unzip();
        RationalModel {
            order: nu.len(),
            nu,
            mu,
            max_deviation: eps,
        }
    }

    /// `log phi_rm - log phi` per sample.
    fn residuals(&self, theta: &[f64]) -> Vec<f64> {
        self.em1
            .iter()
            .zip(&self.log_phi)
            .map(|(&e, &lp)| {
                theta
                    .chunks(2)
                    .map(|p| ((e + p[0].exp()) / (e + p[1].exp())).ln())
                    .sum::<f64>()
                    - lp
            })
            .collect()
    }

    fn max_rel(&self, theta: &[f64]) -> f64 {
        let r = self.residuals(theta);
        if r.iter().any(|v| !v.is_finite()) {
            return f64::INFINITY;
        }
        // |phi / phi_rm - 1| = |exp(-r) - 1|
        r.iter().map(|v| (-v).exp_m1().abs()).fold(0.0, f64::max)
    }

    fn jacobian(&self, theta: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.em1.len(), theta.len(), |i, j| {
            let root = theta[j].exp();
            let d = root / (self.em1[i] + root);
            if j % 2 == 0 {
                d
            } else {
                -d
            }
        })
    }

    /// Weighted Levenberg-Marquardt on the log residuals.
    fn least_squares(&self, mut theta: Vec<f64>, weights: &[f64], iterations: usize) -> Vec<f64> {
        let cost = |r: &[f64]| r.iter().zip(weights).map(|(v, w)| w * v * v).sum::<f64>();
        let mut r = self.residuals(&theta);
        let mut c = cost(&r);
        let mut lambda = 1e-3;
        for _ in 0..iterations {
            let j = self.jacobian(&theta);
            let w = DVector::from_column_slice(weights);
            let jw = DMatrix::from_fn(j.nrows(), j.ncols(), |i, k| j[(i, k)] * w[i]);
            let jtj = jw.transpose() * &j;
            let g = jw.transpose() * DVector::from_column_slice(&r);
            let mut improved = false;
            for _ in 0..12 {
                let mut a = jtj.clone();
                for k in 0..a.nrows() {
                    a[(k, k)] += lambda * (1.0 + jtj[(k, k)]);
                }
                let Some(chol) = a.cholesky() else {
                    lambda *= 10.0;
                    continue;
                };
                let step = chol.solve(&(-&g));
                let trial: Vec<f64> = theta.iter().zip(step.iter()).map(|(t, s)| t + s.clamp(-2.0, 2.0)).collect();
                let rt = self.residuals(&trial);
                let ct = cost(&rt);
                if ct.is_finite() && ct < c {
                    let small = c - ct <= 1e-15 * c;
                    theta = trial;
                    r = rt;
                    c = ct;
                    lambda = (lambda * 0.3).max(1e-12);
                    improved = !small;
                    break;
                }
                lambda *= 10.0;
            }
            if !improved {
                break;
            }
        }
        theta
    }

    /// Lawson reweighting toward the minimax solution; returns the best iterate.
    fn lawson(&self, theta: Vec<f64>, iterations: usize) -> Vec<f64> {
        let n = self.em1.len();
        let mut weights = vec![1.0 / n as f64; n];
        let mut theta = self.least_squares(theta, &weights, 200);
        let mut best = (theta.clone(), self.max_rel(&theta));
        for _ in 0..iterations {
            let r = self.residuals(&theta);
            let total: f64 = weights.iter().zip(&r).map(|(w, v)| w * v.abs()).sum();
            if !(total > 0.0) {
                break;
            }
            for (w, v) in weights.iter_mut().zip(&r) {
                *w *= v.abs() / total;
            }
            theta = self.least_squares(theta, &weights, 50);
            let eps = self.max_rel(&theta);
            if eps < best.1 {
                best = (theta.clone(), eps);
            }
        }
        best.0
    }

    /// Nelder-Mead on the maximal deviation, restarted around the best point.
    fn polish(&self, theta: Vec<f64>, opts: &FitOptions) -> (Vec<f64>, f64, bool) {
        let f = |t: &[f64]| self.max_rel(t);
        let mut x = theta;
        let mut fx = f(&x);
        let mut converged = false;
        for restart in 0..opts.simplex_restarts {
            let scale = 0.05 / (1 << restart) as f64;
            let (nx, nf, ok) = nelder_mead(&f, &x, scale, opts.simplex_iterations);
            converged = ok;
            let gain = fx - nf;
            if nf < fx {
                x = nx;
                fx = nf;
            }
            if ok && gain <= 1e-12 * fx {
                break;
            }
        }
        (x, fx, converged)
    }
}

/// Minimizes `f` from `x0`; returns the best point, its value, and whether
/// the simplex collapsed before the iteration cap.
fn nelder_mead(f: &impl Fn(&[f64]) -> f64, x0: &[f64], scale: f64, max_iter: usize) -> (Vec<f64>, f64, bool) {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += scale;
        let fx = f(&x);
        simplex.push((x, fx));
    }
    let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> { a.iter().zip(b).map(|(p, q)| p + t * (q - p)).collect() };
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (lo, hi) = (simplex[0].1, simplex[n].1);
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if (hi - lo) <= 1e-13 * lo.abs() + 1e-300 || diameter < 1e-11 {
            let (x, fx) = simplex.swap_remove(0);
            return (x, fx, true);
        }
        let centroid: Vec<f64> = (0..n).map(|k| simplex[..n].iter().map(|(x, _)| x[k]).sum::<f64>() / n as f64).collect();
        let worst = simplex[n].0.clone();
        let reflected = lerp(&centroid, &worst, -1.0);
        let fr = f(&reflected);
        if fr < simplex[0].1 {
            let expanded = lerp(&centroid, &worst, -2.0);
            let fe = f(&expanded);
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
        } else {
            let (contracted, fc) = if fr < simplex[n].1 {
                let c = lerp(&centroid, &reflected, 0.5);
                let fc = f(&c);
                (c, fc)
            } else {
                let c = lerp(&centroid, &worst, 0.5);
                let fc = f(&c);
                (c, fc)
            };
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (contracted, fc);
            } else {
                let best = simplex[0].0.clone();
                for (x, fx) in simplex.iter_mut().skip(1) {
                    *x = lerp(&best, x, 0.5);
                    *fx = f(x);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, fx) = simplex.swap_remove(0);
    (x, fx, false)
}
