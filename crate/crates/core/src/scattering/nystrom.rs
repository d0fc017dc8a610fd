//! Nyström discretization of the round-trip operator, mode by mode.
//!
//! Lengths are measured in units of `R_eff`. Radial nodes live in
//! `s = sqrt(k L)`, where the reflection kernels have Gaussian envelopes
//! `exp(-R (s - s')^2 / L)` of fixed width. For two spheres the operator is
//! discretized as `M = G F` with `G` (sphere 1) mapping a fine grid onto a
//! coarse one and `F` (sphere 2) mapping back; the fine grid resolves the
//! narrower kernel of the larger sphere, the coarse grid the width of `M`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::{mode_kernel_values, KernelVariant};
use crate::banded::ProfileMatrix;
use crate::error::{domain, Error, Result};
use crate::geometry::ReducedGeometry;
use crate::quadrature::RadialGrid;

/// Smallest upper end of the radial variable `s`.
const S_MAX_MIN: f64 = 4.6;
/// Couplings whose envelope exponent exceeds this are dropped.
const CUT: f64 = 46.0;
/// Matrix entries below this magnitude are not stored.
const ENTRY_FLOOR: f64 = 1e-22;
/// Modes evaluated per parallel batch.
const MODE_BATCH: usize = 8;
/// Below this trace `log det(1 - M)` is summed as `-sum tr(M^r) / r`.
const SERIES_TRACE: f64 = 1e-3;
/// Largest number of stored coupling values (about 1.6 GB).
const MAX_STORED: usize = 200_000_000;

/// Discretization and truncation controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AccuracySpec {
    /// Minimum number of radial nodes per grid; grids are refined beyond it
    /// as the kernels narrow near contact.
    pub quad_order: usize,
    /// Relative truncation tolerance of the azimuthal mode sum.
    pub mode_tol: f64,
    /// Relative truncation tolerance of the multipole series.
    pub series_tol: f64,
    /// Relative accuracy goal; sets the node density per kernel width.
    pub target_rel_err: f64,
}

impl Default for AccuracySpec {
    fn default() -> Self {
        Self {
            quad_order: 80,
            mode_tol: 1e-12,
            series_tol: 1e-16,
            target_rel_err: 1e-8,
        }
    }
}

impl AccuracySpec {
    /// Cheaper settings, good to roughly five digits.
    pub fn quick() -> Self {
        Self {
            quad_order: 40,
            mode_tol: 1e-9,
            series_tol: 1e-16,
            target_rel_err: 1e-5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64, name: &str| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(domain(format!("{name} must lie in (0, 1), got {v}")))
            }
        };
        unit(self.mode_tol, "mode_tol")?;
        unit(self.series_tol, "series_tol")?;
        unit(self.target_rel_err, "target_rel_err")?;
        if self.quad_order < 4 {
            return Err(domain(format!("quad_order must be at least 4, got {}", self.quad_order)));
        }
        Ok(())
    }

    /// Upper end of the radial variable `s`.
    ///
    /// Far from contact the round-trip integrand behaves like
    /// `s^5 exp(-s^2)`; its tail beyond `s_max` is kept below a hundredth of
    /// the target.
    fn s_max(&self) -> f64 {
        let goal = 0.01 * self.target_rel_err;
        let tail = |s: f64| {
            let s2 = s * s;
            (-s2).exp() * (1.0 + s2 + 0.5 * s2 * s2)
        };
        let mut s = S_MAX_MIN;
        while tail(s) > goal {
            s += 0.05;
        }
        s
    }

    /// Quadrature nodes per kernel standard deviation.
    fn nodes_per_width(&self) -> f64 {
        (0.08 * (1.0 / self.target_rel_err).ln()).clamp(1.0, 6.0)
    }
}

/// One azimuthal block of the discretized round-trip operator.
///
/// `entries` is symmetric only for the plane-sphere geometry. For two
/// spheres it is the product `G F` of two differently scaled reflections; it
/// is similar to a symmetric positive semidefinite matrix, so its spectrum is
/// real and the log-determinant is unchanged, but the entries themselves are
/// not symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeMatrix {
    pub m: usize,
    pub entries: ProfileMatrix,
    /// Radial wavevector nodes `k_i` (units of `1/R_eff`).
    pub nodes: Vec<f64>,
    /// Quadrature weights in `k`.
    pub weights: Vec<f64>,
    pub symmetric: bool,
}

/// Discretized scaled reflection between two radial grids, all modes.
struct Coupling {
    ncols: usize,
    ranges: Vec<(usize, usize)>,
    row_ptr: Vec<usize>,
    mode_ptr: Vec<usize>,
    values: Vec<f64>,
}

impl Coupling {
    /// Entries `r sqrt(w_i w_p) exp(-t (k_i + q_p) L) exp(-r(k_i + q_p)) S_m(2 r sqrt(k_i q_p))`.
    #[allow(clippy::too_many_arguments)]
    fn build(
        r: f64,
        length: f64,
        trans: f64,
        out: &RadialGrid,
        inp: &RadialGrid,
        variant: KernelVariant,
        mmax: usize,
        series_tol: f64,
    ) -> Result<Self> {
        let c = r / length;
        let rows: Vec<Result<(usize, Vec<usize>, Vec<f64>)>> = (0..out.len())
            .into_par_iter()
            .map(|i| {
                let s = out.s[i];
                let (lo, hi) = band(c, trans, s, inp);
                let mut lens = Vec::with_capacity(hi - lo);
                let mut vals = Vec::new();
                for p in lo..hi {
                    let q = inp.s[p];
                    let g = c * (s - q) * (s - q) + trans * (s * s + q * q);
                    let pref = r * (out.weights[i] * inp.weights[p]).sqrt() * (-g).exp();
                    if pref < ENTRY_FLOOR {
                        lens.push(0);
                        continue;
                    }
                    let a = 2.0 * r * s * q / length;
                    let m_pair = pair_modes(pref, a, mmax);
                    let modes = mode_kernel_values(a, m_pair, variant, series_tol)?;
                    let keep = modes
                        .iter()
                        .rposition(|v| (v * pref).abs() >= ENTRY_FLOOR)
                        .map_or(0, |j| j + 1);
                    lens.push(keep);
                    vals.extend(modes[..keep].iter().map(|v| v * pref));
                }
                Ok((lo, lens, vals))
            })
            .collect();
        let mut ranges = Vec::with_capacity(rows.len());
        let mut row_ptr = vec![0];
        let mut mode_ptr = vec![0];
        let mut values = Vec::new();
        for row in rows {
            let (lo, lens, vals) = row?;
            ranges.push((lo, lo + lens.len()));
            row_ptr.push(row_ptr.last().unwrap() + lens.len());
            for l in lens {
                mode_ptr.push(mode_ptr.last().unwrap() + l);
            }
            values.extend(vals);
        }
        Ok(Self {
            ncols: inp.len(),
            ranges,
            row_ptr,
            mode_ptr,
            values,
        })
    }

    /// Upper bound on the number of values `build` would store.
    fn stored_estimate(r: f64, length: f64, trans: f64, out: &RadialGrid, inp: &RadialGrid, mmax: usize) -> usize {
        let c = r / length;
        (0..out.len())
            .into_par_iter()
            .map(|i| {
                let s = out.s[i];
                let (lo, hi) = band(c, trans, s, inp);
                (lo..hi)
                    .map(|p| {
                        let q = inp.s[p];
                        let g = c * (s - q) * (s - q) + trans * (s * s + q * q);
                        let pref = r * (out.weights[i] * inp.weights[p]).sqrt() * (-g).exp();
                        if pref < ENTRY_FLOOR {
                            0
                        } else {
                            pair_modes(pref, 2.0 * r * s * q / length, mmax) + 1
                        }
                    })
                    .sum::<usize>()
            })
            .sum()
    }

    fn mode(&self, m: usize) -> ProfileMatrix {
        let present = |e: usize| self.mode_ptr[e + 1] - self.mode_ptr[e] > m;
        let ranges: Vec<(usize, usize)> = self
            .ranges
            .iter()
            .enumerate()
            .map(|(i, &(lo, _))| {
                let (e0, e1) = (self.row_ptr[i], self.row_ptr[i + 1]);
                match (e0..e1).position(present) {
                    None => (0, 0),
                    Some(first) => {
                        let last = (e0..e1).rposition(present).unwrap();
                        (lo + first, lo + last + 1)
                    }
                }
            })
            .collect();
        let mut mat = ProfileMatrix::zeros(self.ncols, &ranges);
        for (i, &(a, b)) in ranges.iter().enumerate() {
            if a == b {
                continue;
            }
            let e_start = self.row_ptr[i] + (a - self.ranges[i].0);
            let row = mat.row_mut(i);
            for (off, slot) in row.iter_mut().enumerate().take(b - a) {
                let e = e_start + off;
                if present(e) {
                    *slot = self.values[self.mode_ptr[e] + m];
                }
            }
        }
        mat
    }
}

/// `-sum_r tr(M^r) / r` for a matrix with spectrum in `[0, t]`, `t < 1`.
fn log_det_series(mat: &ProfileMatrix, t: f64) -> f64 {
    let mut sum = t;
    let mut power = mat.clone();
    let mut r = 1;
    while t.powi(r) > 1e-17 * sum && r < 64 {
        r += 1;
        sum += power.trace_of_product(mat) / r as f64;
        if t.powi(r) > 1e-17 * sum {
            power = power.matmul(mat);
        }
    }
    -sum
}

/// Input nodes with `c (s - q)^2 + trans (s^2 + q^2) <= CUT`.
fn band(c: f64, trans: f64, s: f64, inp: &RadialGrid) -> (usize, usize) {
    let a2 = c + trans;
    let disc = (c * c - a2 * a2) * s * s + a2 * CUT;
    if disc <= 0.0 {
        return (0, 0);
    }
    let root = disc.sqrt();
    inp.range((c * s - root) / a2, (c * s + root) / a2)
}

/// Highest mode of a pair whose entry can exceed the floor, capped at `mmax`.
fn pair_modes(pref: f64, a: f64, mmax: usize) -> usize {
    let budget = (pref / ENTRY_FLOOR).ln();
    let nmax = budget + (budget * budget + 2.0 * budget * a).sqrt();
    ((nmax / 2.0) as usize + 2).min(mmax)
}

fn check_size(stored: usize) -> Result<()> {
    if stored > MAX_STORED {
        return Err(Error::Accuracy(format!(
            "discretization would store {stored} values (limit {MAX_STORED}); \
             the geometry is too close to contact or too asymmetric for the requested accuracy"
        )));
    }
    Ok(())
}

enum Operator {
    Plane(Coupling),
    Spheres { g: Coupling, f: Coupling },
}

/// The discretized operator for one geometry and resolution.
pub(crate) struct Discretization {
    grid: RadialGrid,
    op: Operator,
    pub(crate) mmax: usize,
    pub(crate) nodes: (usize, usize),
}

/// Conservative mode count for the requested tolerance.
fn mode_estimate(geom: &ReducedGeometry, mode_tol: f64) -> usize {
    let mu = geom.y.acosh();
    ((1.0 / mode_tol).ln() / (2.0 * mu)).ceil() as usize + 10
}

impl Discretization {
    pub(crate) fn new(
        geom: &ReducedGeometry,
        variant: KernelVariant,
        acc: &AccuracySpec,
        refine: usize,
        mmax: usize,
    ) -> Result<Self> {
        acc.validate()?;
        let (r1, r2, length) = geom.scaled_lengths();
        let kappa = acc.nodes_per_width();
        let s_max = acc.s_max();
        let count = |sigma: f64| {
            let n = ((kappa * s_max / sigma).ceil() as usize).max(acc.quad_order);
            n * refine
        };
        let sigma_c = (0.5 * length).sqrt();
        let n_c = count(sigma_c);
        let grid = RadialGrid::new(n_c, s_max, length);
        match r2 {
            None => {
                check_size(Coupling::stored_estimate(1.0, length, 1.0, &grid, &grid, mmax))?;
                let b = Coupling::build(1.0, length, 1.0, &grid, &grid, variant, mmax, acc.series_tol)?;
                Ok(Self {
                    grid,
                    op: Operator::Plane(b),
                    mmax,
                    nodes: (n_c, 0),
                })
            }
            Some(r2) => {
                let n_f = count((0.5 * length / r1).sqrt());
                let fine = RadialGrid::new(n_f, s_max, length);
                check_size(
                    Coupling::stored_estimate(r1, length, 0.5, &grid, &fine, mmax)
                        + Coupling::stored_estimate(r2, length, 0.5, &fine, &grid, mmax),
                )?;
                let g = Coupling::build(r1, length, 0.5, &grid, &fine, variant, mmax, acc.series_tol)?;
                let f = Coupling::build(r2, length, 0.5, &fine, &grid, variant, mmax, acc.series_tol)?;
                Ok(Self {
                    grid,
                    op: Operator::Spheres { g, f },
                    mmax,
                    nodes: (n_c, n_f),
                })
            }
        }
    }

    pub(crate) fn symmetric(&self) -> bool {
        matches!(self.op, Operator::Plane(_))
    }

    pub(crate) fn matrix(&self, m: usize) -> ProfileMatrix {
        match &self.op {
            Operator::Plane(b) => b.mode(m),
            Operator::Spheres { g, f } => g.mode(m).matmul(&f.mode(m)),
        }
    }

    fn log_det(&self, m: usize) -> Result<f64> {
        let mat = self.matrix(m);
        let t = mat.trace();
        if t < 0.0 {
            return Err(Error::Factorization { mode: m, reason: format!("negative trace {t:e}") });
        }
        // pivots 1 - eps lose the small eigenvalues to rounding; the
        // eigenvalues lie in [0, 1) and sum to t, so the log series is fast
        if t < SERIES_TRACE {
            return Ok(log_det_series(&mat, t));
        }
        let res = if self.symmetric() {
            mat.log_det_one_minus_symmetric()
        } else {
            mat.log_det_one_minus()
        };
        res.map_err(|reason| Error::Factorization { mode: m, reason })
    }

    fn trace_power(&self, m: usize, r: usize) -> f64 {
        if r == 1 {
            return match &self.op {
                Operator::Plane(b) => b.mode(m).trace(),
                Operator::Spheres { g, f } => g.mode(m).trace_of_product(&f.mode(m)),
            };
        }
        let mat = self.matrix(m);
        let mut p = mat.clone();
        for _ in 2..r {
            p = p.matmul(&mat);
        }
        p.trace_of_product(&mat)
    }

    /// Per-mode quantities: `-log det(1 - M_m) / 2` when `with_log_det`, then
    /// `tr(M_m^r) / (2r)` for each `r` in `powers`.
    fn mode_terms(&self, m: usize, with_log_det: bool, powers: &[usize]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(powers.len() + 1);
        if with_log_det {
            out.push(-0.5 * self.log_det(m)?);
        }
        for &r in powers {
            out.push(self.trace_power(m, r) / (2.0 * r as f64));
        }
        Ok(out)
    }

    /// Sum over `m` with multiplicity `2 - delta_{m0}`, stopped once two
    /// consecutive modes fall below `mode_tol` relative in every component.
    pub(crate) fn mode_sum(
        &self,
        mode_tol: f64,
        with_log_det: bool,
        powers: &[usize],
    ) -> Result<(Vec<f64>, usize)> {
        let width = powers.len() + usize::from(with_log_det);
        let mut total = vec![0.0; width];
        let mut quiet = 0;
        let mut m0 = 0;
        while m0 <= self.mmax {
            let m1 = (m0 + MODE_BATCH).min(self.mmax + 1);
            let batch: Vec<Result<Vec<f64>>> = (m0..m1)
                .into_par_iter()
                .map(|m| self.mode_terms(m, with_log_det, powers))
                .collect();
            for (m, terms) in (m0..m1).zip(batch) {
                let terms = terms?;
                let mult = if m == 0 { 1.0 } else { 2.0 };
                let mut small = true;
                for (t, v) in total.iter_mut().zip(&terms) {
                    let c = mult * v;
                    *t += c;
                    if c.abs() > mode_tol * t.abs() {
                        small = false;
                    }
                }
                quiet = if small { quiet + 1 } else { 0 };
                if quiet >= 2 {
                    return Ok((total, m + 1));
                }
            }
            m0 = m1;
        }
        Err(Error::Accuracy(format!(
            "mode sum not converged after {} modes",
            self.mmax + 1
        )))
    }
}

/// Run `f` on a discretization, enlarging the mode cap when the sum has not
/// converged.
pub(crate) fn with_mode_retry<T>(
    geom: &ReducedGeometry,
    variant: KernelVariant,
    acc: &AccuracySpec,
    refine: usize,
    f: impl Fn(&Discretization) -> Result<T>,
) -> Result<T> {
    let mut mmax = mode_estimate(geom, acc.mode_tol);
    for attempt in 0..3 {
        let disc = Discretization::new(geom, variant, acc, refine, mmax)?;
        match f(&disc) {
            Err(Error::Accuracy(_)) if attempt < 2 => mmax *= 2,
            other => return other,
        }
    }
    unreachable!()
}

/// Discretized round-trip operator for azimuthal mode `m`.
pub fn build_mode_matrix(
    m: usize,
    geom: &ReducedGeometry,
    variant: KernelVariant,
    acc: &AccuracySpec,
) -> Result<ModeMatrix> {
    let disc = Discretization::new(geom, variant, acc, 1, m)?;
    Ok(ModeMatrix {
        m,
        entries: disc.matrix(m),
        nodes: disc.grid.k.clone(),
        weights: disc.grid.weights.clone(),
        symmetric: disc.symmetric(),
    })
}
