//! Closed forms: the single round trip `f1(y, u)`, its asymptotic limits, the
//! rational model for `phi = f / f1` and the combined approximation `f1 * phi`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::aspect_parameters;

/// Apéry's constant.
pub const ZETA3: f64 = 1.202_056_903_159_594_2;

/// Below this `u` the single round trip uses the rearranged small-`u` form.
pub const U_SWITCH: f64 = 1e-4;

fn check_y(y: f64) -> Result<()> {
    if y.is_finite() && y > 1.0 {
        Ok(())
    } else {
        Err(domain(format!("y must exceed 1 (contact or overlap otherwise), got {y}")))
    }
}

fn check_u(u: f64) -> Result<()> {
    if (0.0..=0.25).contains(&u) {
        Ok(())
    } else {
        Err(domain(format!("u must lie in [0, 1/4], got {u}")))
    }
}

const SERIES_RATIO_MAX: f64 = 0.5;

/// `1 / (1 + 2u(y-1))`, the geometric ratio of the double series.
fn series_ratio(y: f64, u: f64) -> f64 {
    1.0 / (1.0 + 2.0 * u * (y - 1.0))
}

/// Single round-trip contribution `f1(y, u) = Tr M / 2`.
pub fn single_round_trip(y: f64, u: f64) -> Result<f64> {
    check_y(y)?;
    check_u(u)?;
    if u == 0.0 {
        return Ok(plane_sphere(y));
    }
    if u < U_SWITCH {
        let (_, am) = aspect_parameters(u)?;
        return Ok(small_u(y, am));
    }
    let (ap, am) = aspect_parameters(u)?;
    let z = 2.0 * y + ap + am;
    if series_ratio(y, u) <= SERIES_RATIO_MAX {
        Ok(double_series(ap, am, z).0)
    } else {
        Ok(closed_form(y, ap, am, z))
    }
}

/// `d f1 / d y` at fixed `u`.
pub fn single_round_trip_dy(y: f64, u: f64) -> Result<f64> {
    check_y(y)?;
    check_u(u)?;
    if u == 0.0 {
        return Ok(plane_sphere_dy(y));
    }
    if u < U_SWITCH {
        let (_, am) = aspect_parameters(u)?;
        return Ok(fd_derivative(|t| small_u(t, am), y));
    }
    let (ap, am) = aspect_parameters(u)?;
    let z = 2.0 * y + ap + am;
    if series_ratio(y, u) <= SERIES_RATIO_MAX {
        Ok(double_series(ap, am, z).1)
    } else {
        Ok(closed_form_dy(y, ap, am, z))
    }
}

/// u = 0: `y / (4(y^2-1)) + (y/4) ln(1 - 1/y^2)`.
fn plane_sphere(y: f64) -> f64 {
    if y > 2.0 {
        // (1/4y) sum l/(l+1) y^{-2l}
        let w = 1.0 / (y * y);
        let mut term = 1.0;
        let mut sum = 0.0;
        for l in 1..200 {
            term *= w;
            let t = term * l as f64 / (l as f64 + 1.0);
            sum += t;
            if t < 1e-18 * sum {
                break;
            }
        }
        sum / (4.0 * y)
    } else {
        y / (4.0 * (y - 1.0) * (y + 1.0)) + 0.25 * y * (-1.0 / (y * y)).ln_1p()
    }
}

fn plane_sphere_dy(y: f64) -> f64 {
    if y > 2.0 {
        let w = 1.0 / (y * y);
        let mut term = w;
        let mut sum = 0.0;
        for l in 1..200 {
            term *= w;
            let lf = l as f64;
            let t = term * lf / (lf + 1.0) * (2.0 * lf + 1.0) / 4.0;
            sum += t;
            if t < 1e-18 * sum {
                break;
            }
        }
        -sum
    } else {
        let d = (y - 1.0) * (y + 1.0);
        -(y * y + 1.0) / (4.0 * d * d) + 0.25 * (-1.0 / (y * y)).ln_1p() + 0.5 / d
    }
}

/// Direct three-term expression.
fn closed_form(y: f64, ap: f64, am: f64, z: f64) -> f64 {
    let y2m1 = (y - 1.0) * (y + 1.0);
    let t1 = y / (4.0 * y2m1);
    let q = y * z + 0.5;
    let t2 = z / 12.0 * (-(z * z + y * z + 0.25) / (q * q)).ln_1p();
    let t3: f64 = [ap, am]
        .iter()
        .map(|&a| {
            let big_a = 2.0 * y * y + a * y - 1.0;
            let big_b = (a * z).sqrt();
            2.0 * (big_b / big_a).atanh() / (12.0 * z.sqrt() * a.powf(1.5))
        })
        .sum();
    t1 + t2 + t3
}

fn closed_form_dy(y: f64, ap: f64, am: f64, z: f64) -> f64 {
    let y2m1 = (y - 1.0) * (y + 1.0);
    let t1 = -(y * y + 1.0) / (4.0 * y2m1 * y2m1);
    let q = y * z + 0.5;
    let t2 = (-(z * z + y * z + 0.25) / (q * q)).ln_1p() / 6.0
        + z / 12.0 * (2.0 * y / y2m1 + 4.0 / z - 2.0 * (z + 2.0 * y) / q);
    let t3: f64 = [ap, am]
        .iter()
        .map(|&a| {
            let big_a = 2.0 * y * y + a * y - 1.0;
            let big_b = (a * z).sqrt();
            let da = 4.0 * y + a;
            let db = a / big_b;
            let p = 1.0 / (12.0 * z.sqrt() * a.powf(1.5));
            let lam = 2.0 * (big_b / big_a).atanh();
            let dlam = 2.0 * (db * big_a - da * big_b) / ((big_a - big_b) * (big_a + big_b));
            p * dlam - p / z * lam
        })
        .sum();
    t1 + t2 + t3
}

/// `(1/2z) sum w_{l1} w_{l2} (2n)!/((2l1)!(2l2)!) (ap/z)^l1 (am/z)^l2` and
/// its `y` derivative. Converges geometrically with ratio `(sqrt(ap) + sqrt(am))^2 / z`.
fn double_series(ap: f64, am: f64, z: f64) -> (f64, f64) {
    const NMAX: usize = 400;
    let r1 = ap / z;
    let r2 = am / z;
    let mut value = 0.0;
    let mut deriv = 0.0;
    // c(l1, l2) = (2n)!/((2l1)!(2l2)!) r1^l1 r2^l2, built up along each diagonal n
    for n in 2..NMAX {
        // start at l1 = n-1, l2 = 1
        let mut c = binom_ratio_start(n) * r1.powi(n as i32 - 1) * r2;
        let mut diag = 0.0;
        for l1 in (1..n).rev() {
            let l2 = n - l1;
            let w1 = l1 as f64 / (l1 as f64 + 1.0);
            let w2 = l2 as f64 / (l2 as f64 + 1.0);
            diag += w1 * w2 * c;
            if l1 > 1 {
                // (2l1)(2l1-1) / ((2l2+2)(2l2+1)) * r2/r1
                let a = (2 * l1) as f64 * (2 * l1 - 1) as f64;
                let b = (2 * l2 + 2) as f64 * (2 * l2 + 1) as f64;
                c *= a / b * r2 / r1;
            }
        }
        value += diag;
        deriv -= (n + 1) as f64 * diag;
        if diag < 1e-18 * value {
            break;
        }
    }
    (value / (2.0 * z), deriv / (z * z))
}

/// `(2n)! / ((2n-2)! 2!)`.
fn binom_ratio_start(n: usize) -> f64 {
    let m = (2 * n) as f64;
    m * (m - 1.0) / 2.0
}

/// Rearranged form for small `u`, with `a = alpha_minus`; cancellations
/// between the divergent pieces are carried out analytically.
fn small_u(y: f64, a: f64) -> f64 {
    let y2 = y * y;
    let s2 = 2.0 * y * a + a * a + 1.0;
    let s = s2.sqrt();
    let t1 = y / (4.0 * (y - 1.0) * (y + 1.0));
    let l0 = (-1.0 / y2).ln_1p();
    let term_a = l0 * (2.0 * y + a) * (s2 + s + 1.0) / ((s + 1.0) * s);
    let term_b = -2.0 * s2 * (a / (2.0 * y * s2)).ln_1p() / a;
    let g = (2.0 * y + a) * (2.0 * y2 - 1.0) / (s + 1.0) - y;
    let am = 2.0 * y2 + a * y - 1.0;
    let p = s / am;
    let q0 = 1.0 / (2.0 * y2 - 1.0);
    let r = a * g / (am * (2.0 * y2 - 1.0) * (1.0 - p * q0));
    let term_c = 2.0 / s * r.atanh() / a;
    let t3p = a * a / (6.0 * s) * (s / (y + a * (2.0 * y2 - 1.0))).atanh();
    t1 + (term_a + term_b + term_c) / 12.0 + t3p
}

/// Sixth-order central difference with a step scaled to `y - 1`.
fn fd_derivative(f: impl Fn(f64) -> f64, y: f64) -> f64 {
    let h = 2e-3 * (y - 1.0).min(1.0) * y.max(1.0).min(1.0 + (y - 1.0));
    let d = |k: f64| f(y + k * h) - f(y - k * h);
    (45.0 * d(1.0) - 9.0 * d(2.0) + d(3.0)) / (60.0 * h)
}

/// `1/(8y^3)` for `u = 0`, else `3/(32 y^3)`.
pub fn large_distance_limit(y: f64, u: f64) -> Result<f64> {
    check_y(y)?;
    check_u(u)?;
    let y3 = y * y * y;
    Ok(if u == 0.0 { 1.0 / (8.0 * y3) } else { 3.0 / (32.0 * y3) })
}

/// Proximity-force limit `zeta(3) / (8(y-1))`. Only meaningful for `y - 1 << 1`.
pub fn pfa_limit(y: f64) -> Result<f64> {
    check_y(y)?;
    Ok(ZETA3 / (8.0 * (y - 1.0)))
}

/// Product-form rational model in `E = exp(y-1)`:
/// `phi = prod (E - 1 + nu_k) / (E - 1 + mu_k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalModel {
    pub nu: Vec<f64>,
    pub mu: Vec<f64>,
    pub order: usize,
    pub max_deviation: f64,
}

impl RationalModel {
    pub fn new(nu: Vec<f64>, mu: Vec<f64>, max_deviation: f64) -> Result<Self> {
        let model = Self {
            order: nu.len(),
            nu,
            mu,
            max_deviation,
        };
        model.validate()?;
        Ok(model)
    }

    /// Canonical second-order model.
    pub fn table_i() -> Self {
        Self {
            nu: vec![0.004618, 0.09639],
            mu: vec![0.004415, 0.08397],
            order: 2,
            max_deviation: 1.2e-3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nu.len() != self.order || self.mu.len() != self.order {
            return Err(Error::InvalidModel(format!(
                "order {} but {} numerator and {} denominator roots",
                self.order,
                self.nu.len(),
                self.mu.len()
            )));
        }
        if self.order == 0 {
            return Err(Error::InvalidModel("order must be at least 1".into()));
        }
        for &r in self.nu.iter().chain(&self.mu) {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::InvalidModel(format!("roots must be positive, got {r}")));
            }
        }
        Ok(())
    }

    /// `prod nu_k / mu_k`, the value at contact.
    pub fn contact_value(&self) -> f64 {
        self.nu.iter().zip(&self.mu).map(|(n, m)| n / m).product()
    }

    pub(crate) fn eval_unchecked(&self, em1: f64) -> f64 {
        self.nu
            .iter()
            .zip(&self.mu)
            .map(|(n, m)| (em1 + n) / (em1 + m))
            .product()
    }
}

impl Default for RationalModel {
    fn default() -> Self {
        Self::table_i()
    }
}

/// `phi_rm(y)`.
pub fn phi_rational(y: f64, model: &RationalModel) -> Result<f64> {
    if !(y.is_finite() && y >= 1.0) {
        return Err(domain(format!("y must be at least 1, got {y}")));
    }
    model.validate()?;
    Ok(model.eval_unchecked((y - 1.0).exp_m1()))
}

/// `d phi_rm / d y`.
pub fn phi_rational_dy(y: f64, model: &RationalModel) -> Result<f64> {
    let phi = phi_rational(y, model)?;
    let em1 = (y - 1.0).exp_m1();
    let e = em1 + 1.0;
    let dlog: f64 = model
        .nu
        .iter()
        .zip(&model.mu)
        .map(|(n, m)| e * (1.0 / (em1 + n) - 1.0 / (em1 + m)))
        .sum();
    Ok(phi * dlog)
}

/// `f1(y, u) * phi_rm(y)`.
pub fn free_energy_approx(y: f64, u: f64, model: &RationalModel) -> Result<f64> {
    Ok(single_round_trip(y, u)? * phi_rational(y, model)?)
}

/// `d/dy [f1 phi_rm]`.
pub fn free_energy_approx_dy(y: f64, u: f64, model: &RationalModel) -> Result<f64> {
    let f = single_round_trip(y, u)?;
    let df = single_round_trip_dy(y, u)?;
    Ok(df * phi_rational(y, model)? + f * phi_rational_dy(y, model)?)
}

/// `phi_u = f_exact / f1(y, u)`.
pub fn phi_u(y: f64, u: f64, f_exact: f64) -> Result<f64> {
    Ok(f_exact / single_round_trip(y, u)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    // (y, u, f1, df1/dy) at 50 digits
    const ORACLE: &[(f64, f64, f64, f64)] = &[
        (2.0, 0.25, 0.019998094305527101, -0.040108975535105091),
        (3.0, 0.1, 0.0048985767967106156, -0.0055789575087908988),
        (11.0, 0.04, 8.3451335138683456e-5, -2.3480408093785553e-5),
        (1.5, 0.25, 0.073041612170141777, -0.25382424922834369),
        (1.01, 0.25, 11.542632124813699, -1225.9414979666015),
        (1.001, 0.1, 123.49465649104708, -124751.57779977252),
        (101.0, 0.25, 9.1305228579913691e-8, -2.7152497279643499e-9),
        (101.0, 0.1, 9.216334978236528e-8, -2.7488281396579667e-9),
        (101.0, 0.04, 9.4108425486890372e-8, -2.8231594646284294e-9),
        (50.0, 0.04, 7.9725810765291012e-7, -4.8616104924971259e-8),
        (2.0, 1.0e-6, 0.022825613321588552, -0.044142721494136166),
        (1.01, 1.0e-6, 11.570637567872889, -1226.1370512250539),
        (10.0, 1.0e-6, 0.0001266849916891311, -3.8346514814568359e-5),
        (2.0, 9.9e-5, 0.022823935982441467, -0.044140875121034331),
        (2.0, 0.000101, 0.022823901758063323, -0.044140837440940566),
        (1.01, 9.9e-5, 11.570626284910965, -1226.1369783088623),
        (10.0, 9.9e-5, 0.00012662364698603846, -3.8334192462208623e-5),
        (1.0001, 1.0e-5, 1247.9329468980405, -12497502.285557625),
        (1000.0, 0.01, 9.5209881860699546e-11, -2.8702150070347627e-13),
        (20.0, 0.05, 1.2981275096755894e-5, -1.9940595663684251e-6),
        (2.0, 1.0e-12, 0.022825630440759096, -0.044142740335148613),
    ];

    // (y, f0, df0/dy)
    const PLANE: &[(f64, f64, f64)] = &[
        (1.001, 123.5068879327995, -124751.71018311067),
        (1.5, 0.079580000661705372, -0.26694666622552975),
        (2.0, 0.022825630440776203, -0.044142740335167454),
        (3.0, 0.0054127232577124091, -0.0060082589140958636),
        (10.0, 0.00012668561877164957, -3.8346640653189089e-5),
        (100.0, 1.2501666854186669e-7, -3.7508334646013356e-9),
        (1000.0, 1.2500016666685417e-10, -3.7500083333464584e-13),
    ];

    #[test]
    fn matches_high_precision_values() {
        for &(y, u, f, _) in ORACLE {
            let got = single_round_trip(y, u).unwrap();
            assert_relative_eq!(got, f, max_relative = 5e-12);
        }
        for &(y, f, _) in PLANE {
            assert_relative_eq!(single_round_trip(y, 0.0).unwrap(), f, max_relative = 5e-13);
        }
    }

    #[test]
    fn derivatives() {
        for &(y, u, _, d) in ORACLE {
            let got = single_round_trip_dy(y, u).unwrap();
            assert_relative_eq!(got, d, max_relative = 1e-8);
        }
        for &(y, _, d) in PLANE {
            assert_relative_eq!(single_round_trip_dy(y, 0.0).unwrap(), d, max_relative = 1e-12);
        }
    }

    #[test]
    fn equal_spheres_y2_closed_value() {
        let expect = 1.0 / 6.0
            + 0.5 * (108.0f64 / 156.25).ln()
            + 1.0 / (6.0 * 6f64.sqrt()) * ((9.0 + 6f64.sqrt()) / (9.0 - 6f64.sqrt())).ln();
        assert_relative_eq!(single_round_trip(2.0, 0.25).unwrap(), expect, max_relative = 1e-12);
    }

    #[test]
    fn switch_continuity() {
        for y in [1.01, 2.0, 10.0] {
            let below = single_round_trip(y, U_SWITCH * (1.0 - 1e-12)).unwrap();
            let above = single_round_trip(y, U_SWITCH).unwrap();
            assert!(((below - above) / above).abs() < 1e-8, "y = {y}");
        }
    }

    #[test]
    fn branch_boundary_continuity() {
        // double series vs closed form at q = 1/2
        let u: f64 = 0.1;
        let y = 1.0 + 0.5 / u;
        let a = single_round_trip(y * (1.0 - 1e-13), u).unwrap();
        let b = single_round_trip(y * (1.0 + 1e-13), u).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-10);
        let (ap, am) = aspect_parameters(u).unwrap();
        let z = 2.0 * y + ap + am;
        assert_relative_eq!(closed_form(y, ap, am, z), double_series(ap, am, z).0, max_relative = 1e-10);
    }

    #[test]
    fn limits() {
        assert_relative_eq!(large_distance_limit(100.0, 0.0).unwrap(), 1.25e-7, max_relative = 1e-15);
        assert_relative_eq!(large_distance_limit(100.0, 0.1).unwrap(), 9.375e-8, max_relative = 1e-15);
        assert_relative_eq!(pfa_limit(1.001).unwrap(), 150.2571, max_relative = 1e-6);
        assert_relative_eq!(pfa_limit(2.0).unwrap(), ZETA3 / 8.0, max_relative = 1e-15);
        let y = 1e4;
        assert_relative_eq!(single_round_trip(y, 0.0).unwrap() * 8.0 * y * y * y, 1.0, max_relative = 1e-6);
        assert_relative_eq!(
            single_round_trip(y, 0.25).unwrap() * 32.0 / 3.0 * y * y * y,
            1.0,
            max_relative = 1e-3
        );
        let y = 1.0 + 1e-6;
        assert_relative_eq!(single_round_trip(y, 0.1).unwrap() * 8.0 * (y - 1.0), 1.0, max_relative = 1e-4);
    }

    #[test]
    fn domain_errors() {
        assert!(single_round_trip(1.0, 0.1).is_err());
        assert!(single_round_trip(0.5, 0.1).is_err());
        assert!(single_round_trip(2.0, 0.3).is_err());
        assert!(pfa_limit(1.0).is_err());
    }

    #[test]
    fn table_i_model() {
        let m = RationalModel::table_i();
        let c = phi_rational(1.0, &m).unwrap();
        assert_relative_eq!(c, 0.004618 / 0.004415 * 0.09639 / 0.08397, max_relative = 1e-15);
        assert!((c / ZETA3 - 1.0).abs() < 1.2e-3);
        assert_relative_eq!(phi_rational(60.0, &m).unwrap(), 1.0, max_relative = 1e-15);
        let mut prev = c;
        for i in 1..240 {
            let y = 1.0 + 1e-4 * 1.05f64.powi(i);
            let v = phi_rational(y, &m).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn invalid_models() {
        assert!(RationalModel::new(vec![1.0, -1.0], vec![1.0, 1.0], 0.0).is_err());
        assert!(RationalModel::new(vec![1.0], vec![1.0, 1.0], 0.0).is_err());
        let bad = RationalModel {
            nu: vec![0.0],
            mu: vec![1.0],
            order: 1,
            max_deviation: 0.0,
        };
        assert!(phi_rational(2.0, &bad).is_err());
    }

    #[test]
    fn degenerate_model_is_one() {
        let m = RationalModel::new(vec![0.3, 2.0], vec![0.3, 2.0], 0.0).unwrap();
        assert_eq!(phi_rational(1.7, &m).unwrap(), 1.0);
    }

    #[test]
    fn approx_product_and_derivative() {
        let m = RationalModel::table_i();
        let f = free_energy_approx(2.0, 0.25, &m).unwrap();
        assert_relative_eq!(
            f,
            0.019998094305527101 * phi_rational(2.0, &m).unwrap(),
            max_relative = 1e-12
        );
        for (y, u) in [(1.3, 0.1), (2.0, 0.25), (5.0, 0.0), (3.0, 5e-5)] {
            let h = 1e-5;
            let fd = (free_energy_approx(y + h, u, &m).unwrap() - free_energy_approx(y - h, u, &m).unwrap())
                / (2.0 * h);
            assert_relative_eq!(free_energy_approx_dy(y, u, &m).unwrap(), fd, max_relative = 1e-7);
        }
        assert!((free_energy_approx(1.0 + 1e-7, 0.1, &m).unwrap() / pfa_limit(1.0 + 1e-7).unwrap() - 1.0).abs() < 1.2e-3);
    }

    proptest! {
        #[test]
        fn positive_and_decreasing(t in -3.0f64..2.5, u in 0.0f64..0.25) {
            let y = 1.0 + 10f64.powf(t);
            let f = single_round_trip(y, u).unwrap();
            let g = single_round_trip(y * 1.001, u).unwrap();
            prop_assert!(f > 0.0 && g < f);
            prop_assert!(single_round_trip_dy(y, u).unwrap() < 0.0);
        }

        #[test]
        fn ratio_between_three_quarters_and_one(t in -3.0f64..2.5, u in 1e-3f64..0.25) {
            let y = 1.0 + 10f64.powf(t);
            let r = single_round_trip(y, u).unwrap() / single_round_trip(y, 0.0).unwrap();
            prop_assert!(r > 0.75 && r < 1.0);
        }
    }
}
