//! Zero-frequency reflection kernel of a sphere in the plane-wave basis.
//!
//! With `X^2 = 2 R^2 k k' (1 + cos phi)` the kernel is
//! `-(2 pi R / k') sum_{l>=1} w_l X^{2l} / (2l)!`, where `w_l = l/(l+1)` for a
//! dielectric sphere in an electrolyte and `w_l = 1` for a metal sphere in
//! vacuum. Every value returned here carries the factor `exp(-R (k + k'))`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Hard cap on the number of multipole terms in a direct series.
pub const SERIES_CAP: usize = 10_000;

/// Below this Bessel argument the mode kernel is summed as a power series.
const SERIES_ARGUMENT: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelVariant {
    #[default]
    #[serde(alias = "dielectric")]
    DielectricInElectrolyte,
    #[serde(alias = "metal")]
    MetalInVacuum,
}

impl KernelVariant {
    /// Multipole weight `w_l`.
    pub fn weight(self, l: usize) -> f64 {
        match self {
            Self::DielectricInElectrolyte => l as f64 / (l as f64 + 1.0),
            Self::MetalInVacuum => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::DielectricInElectrolyte => "dielectric",
            Self::MetalInVacuum => "metal",
        }
    }
}

impl std::str::FromStr for KernelVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dielectric" | "dielectric-in-electrolyte" => Ok(Self::DielectricInElectrolyte),
            "metal" | "metal-in-vacuum" => Ok(Self::MetalInVacuum),
            other => Err(domain(format!("unknown kernel variant '{other}'"))),
        }
    }
}

fn check_args(k: f64, kp: f64, r: f64, series_tol: f64) -> Result<()> {
    if !(k > 0.0 && kp > 0.0 && k.is_finite() && kp.is_finite()) {
        return Err(domain(format!("wavevectors must be positive, got {k}, {kp}")));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(domain(format!("radius must be positive, got {r}")));
    }
    if !(series_tol > 0.0 && series_tol < 1.0) {
        return Err(domain(format!("series tolerance must lie in (0, 1), got {series_tol}")));
    }
    Ok(())
}

/// Scaled kernel `exp(-R(k + k')) <k'|R|k>` at relative angle `phi`.
pub fn reflection_kernel_angular(
    k: f64,
    kp: f64,
    phi: f64,
    r: f64,
    variant: KernelVariant,
    series_tol: f64,
) -> Result<f64> {
    check_args(k, kp, r, series_tol)?;
    let x2 = 2.0 * r * r * k * kp * (1.0 + phi.cos());
    if x2 <= 0.0 {
        return Ok(0.0);
    }
    let ln_x2 = x2.ln();
    let shift = r * (k + kp);
    // log of X^{2l} / (2l)! accumulated term by term
    let mut log_term = 0.0;
    let mut sum = 0.0;
    for l in 1..=SERIES_CAP {
        let lf = l as f64;
        log_term += ln_x2 - ((2.0 * lf) * (2.0 * lf - 1.0)).ln();
        let term = variant.weight(l) * (log_term - shift).exp();
        sum += term;
        if lf * lf > x2 && term <= series_tol * sum {
            return Ok(-2.0 * PI * r / kp * sum);
        }
    }
    Err(Error::Accuracy(format!(
        "reflection series did not converge within {SERIES_CAP} terms (X^2 = {x2:e})"
    )))
}

/// Scaled azimuthal Fourier coefficient of the kernel for mode `m`.
pub fn reflection_kernel_mode(
    m: usize,
    k: f64,
    kp: f64,
    r: f64,
    variant: KernelVariant,
    series_tol: f64,
) -> Result<f64> {
    check_args(k, kp, r, series_tol)?;
    let a = 2.0 * r * (k * kp).sqrt();
    let values = mode_kernel_values(a, m, variant, series_tol)?;
    let gap = k.sqrt() - kp.sqrt();
    Ok(-2.0 * PI * r / kp * (-r * gap * gap).exp() * values[m])
}

/// `exp(-a) S_m(a)` for `m = 0 ..= mmax`, where
/// `S_m(a) = sum_{l >= max(1, m)} w_l (a/2)^{2l} / ((l+m)! (l-m)!)`.
///
/// For `a >= 2` the sums are expressed through modified Bessel functions:
/// `S_m = I_{2m} - delta_{m0}` for the metal weight, and
/// `S_m = I_{2m} - (2/a) I_{2m+1} - (8m/a^2) sum_j (-1)^j I_{2m+2+2j}` for the
/// dielectric weight.
pub fn mode_kernel_values(
    a: f64,
    mmax: usize,
    variant: KernelVariant,
    series_tol: f64,
) -> Result<Vec<f64>> {
    if !(a.is_finite() && a >= 0.0) {
        return Err(domain(format!("Bessel argument must be finite and nonnegative, got {a}")));
    }
    if a < SERIES_ARGUMENT {
        return Ok(power_series(a, mmax, variant, series_tol));
    }
    if (90.0 * a).sqrt() > 1e6 {
        return Err(Error::Accuracy(format!("mode kernel argument {a:e} is too large")));
    }
    let (i, alt) = miller_with_alternating_sums(a, 2 * mmax + 2);
    let mut out = vec![0.0; mmax + 1];
    match variant {
        KernelVariant::MetalInVacuum => {
            for (m, o) in out.iter_mut().enumerate() {
                *o = i[2 * m];
            }
            out[0] -= (-a).exp();
        }
        KernelVariant::DielectricInElectrolyte => {
            for (m, o) in out.iter_mut().enumerate() {
                let mf = m as f64;
                *o = i[2 * m] - 2.0 / a * i[2 * m + 1] - 8.0 * mf / (a * a) * alt[2 * m + 2];
            }
        }
    }
    Ok(out)
}

/// Miller recurrence returning `exp(-a) I_n(a)` and
/// `B_n = sum_j (-1)^j exp(-a) I_{n+2j}` for `n <= nmax`; the tail is folded
/// into both sums on the way down and never stored.
fn miller_with_alternating_sums(a: f64, nmax: usize) -> (Vec<f64>, Vec<f64>) {
    const BIG: f64 = 1e250;
    let base = (nmax as f64).max((90.0 * a).sqrt() + 10.0);
    let start = (base + (200.0 * base).sqrt() + 10.0) as usize;
    let mut i = vec![0.0; nmax + 1];
    let mut alt = vec![0.0; nmax + 1];
    let two_over_a = 2.0 / a;
    // f_{n+1}, f_n and B_{n+1}, B_n while walking down
    let (mut f_up, mut f) = (0.0, 1e-30);
    let (mut b_up, mut b) = (0.0, 1e-30);
    let mut tail = 0.0;
    let mut n = start;
    loop {
        if n <= nmax {
            i[n] = f;
            alt[n] = b;
        }
        if n == 0 {
            break;
        }
        tail += f;
        let f_down = f_up + two_over_a * n as f64 * f;
        let b_down = f_down - b_up;
        f_up = f;
        f = f_down;
        b_up = b;
        b = b_down;
        n -= 1;
        if f > BIG {
            f /= BIG;
            f_up /= BIG;
            b /= BIG;
            b_up /= BIG;
            tail /= BIG;
            let lo = (n + 1).min(nmax + 1);
            for v in &mut i[lo..] {
                *v /= BIG;
            }
            for v in &mut alt[lo..] {
                *v /= BIG;
            }
        }
    }
    let norm = i[0] + 2.0 * tail;
    for v in i.iter_mut().chain(alt.iter_mut()) {
        *v /= norm;
    }
    (i, alt)
}

fn power_series(a: f64, mmax: usize, variant: KernelVariant, tol: f64) -> Vec<f64> {
    let t = 0.25 * a * a;
    let scale = (-a).exp();
    let mut out = vec![0.0; mmax + 1];
    // lead = t^m / (2m)!
    let mut lead = 1.0;
    for (m, o) in out.iter_mut().enumerate() {
        if m > 0 {
            lead *= t / ((2 * m - 1) as f64 * (2 * m) as f64);
        }
        if lead == 0.0 {
            break;
        }
        let l0 = m.max(1);
        let mut term = if m == 0 { t } else { lead };
        let mut sum = 0.0;
        let mut l = l0;
        loop {
            let c = variant.weight(l) * term;
            sum += c;
            if c <= tol * sum || l > l0 + 200 {
                break;
            }
            term *= t / (((l + m + 1) * (l - m + 1)) as f64);
            l += 1;
        }
        *o = scale * sum;
    }
    out
}
