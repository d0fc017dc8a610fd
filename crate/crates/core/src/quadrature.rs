//! Gauss-Legendre rules and the radial grids used by the Nyström solver.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, ascending.
///
/// Newton iteration on the three-term recurrence, `O(n^2)` overall, so large
/// orders stay cheap.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Legendre order must be positive");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut t = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, t);
            dp = d;
            let dt = p / d;
            t -= dt;
            if dt.abs() < 1e-16 {
                let (_, d) = legendre_with_derivative(n, t);
                dp = d;
                break;
            }
        }
        let wi = 2.0 / ((1.0 - t * t) * dp * dp);
        x[n - 1 - i] = t;
        x[i] = -t;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, t: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = t;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { p0 } else { p1 };
    let d = n as f64 * (t * p - p0) / (t * t - 1.0);
    (p, d)
}

/// Radial wavevector grid.
///
/// Nodes are Gauss-Legendre points in `s = sqrt(k L)` on `[0, s_max]`, so
/// `k = s^2 / L` and `dk = 2 s ds / L`. Kernel widths are uniform in `s`,
/// which keeps the discretized operators banded.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    pub s: Vec<f64>,
    pub k: Vec<f64>,
    pub weights: Vec<f64>,
}

impl RadialGrid {
    pub fn new(n: usize, s_max: f64, length: f64) -> Self {
        let (t, w) = gauss_legendre(n);
        let half = 0.5 * s_max;
        let s: Vec<f64> = t.iter().map(|ti| half * (ti + 1.0)).collect();
        let k = s.iter().map(|si| si * si / length).collect();
        let weights = s
            .iter()
            .zip(&w)
            .map(|(si, wi)| 2.0 * si * wi * half / length)
            .collect();
        Self { s, k, weights }
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    /// Indices `[lo, hi)` of nodes with `s` in `[a, b]`.
    pub fn range(&self, a: f64, b: f64) -> (usize, usize) {
        let lo = self.s.partition_point(|&v| v < a);
        let hi = self.s.partition_point(|&v| v <= b);
        (lo, hi.max(lo))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn small_orders() {
        let (x, w) = gauss_legendre(2);
        assert_relative_eq!(x[1], 1.0 / 3f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(w[0], 1.0, max_relative = 1e-15);
        let (x, w) = gauss_legendre(3);
        assert_eq!(x[1], 0.0);
        assert_relative_eq!(w[1], 8.0 / 9.0, max_relative = 1e-15);
        assert_relative_eq!(x[2], 0.6f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn exact_for_polynomials() {
        for n in [5, 40, 333, 2000] {
            let (x, w) = gauss_legendre(n);
            assert_relative_eq!(w.iter().sum::<f64>(), 2.0, max_relative = 1e-13);
            let deg = (2 * n - 2).min(40);
            let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg as i32)).sum();
            assert_relative_eq!(q, 2.0 / (deg as f64 + 1.0), max_relative = 1e-12);
            assert!(x.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn radial_grid_integrates_exponential() {
        // int_0^inf k e^{-2kL} dk = 1/(4 L^2)
        let length = 0.3;
        let g = RadialGrid::new(60, 6.0, length);
        let q: f64 = g
            .k
            .iter()
            .zip(&g.weights)
            .map(|(k, w)| w * k * (-2.0 * k * length).exp())
            .sum();
        assert_relative_eq!(q, 1.0 / (4.0 * length * length), max_relative = 1e-12);
    }

    #[test]
    fn range_lookup() {
        let g = RadialGrid::new(10, 1.0, 1.0);
        let (lo, hi) = g.range(0.2, 0.8);
        assert!(g.s[lo] >= 0.2 && g.s[hi - 1] <= 0.8);
        assert!(lo == 0 || g.s[lo - 1] < 0.2);
        assert_eq!(g.range(2.0, 3.0), (10, 10));
    }
}
