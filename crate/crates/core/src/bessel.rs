//! Exponentially scaled modified Bessel functions `exp(-x) I_n(x)`.
//!
//! Values for all orders are produced at once by Miller's backward
//! recurrence, normalized with `exp(-x) (I_0 + 2 sum_{n>=1} I_n) = 1`. The
//! recurrence is rescaled on the fly so nothing overflows for any `x`.

const BIG: f64 = 1e250;

/// `exp(-x) I_n(x)` for `n = 0, 1, ...` up to at least `nmin`, and further
/// until the values are negligible next to `I_0`.
///
/// # Panics
///
/// If `x` is negative or not finite.
pub fn scaled_bessel_i_seq(x: f64, nmin: usize) -> Vec<f64> {
    assert!(x.is_finite() && x >= 0.0, "argument must be finite and nonnegative");
    if x == 0.0 {
        let mut v = vec![0.0; nmin + 1];
        v[0] = 1.0;
        return v;
    }
    let base = (nmin as f64).max((90.0 * x).sqrt() + 10.0);
    let start = (base + (200.0 * base).sqrt() + 10.0) as usize;
    let mut f = vec![0.0; start + 2];
    f[start] = 1e-30;
    let two_over_x = 2.0 / x;
    for n in (1..=start).rev() {
        let next = f[n + 1] + two_over_x * n as f64 * f[n];
        f[n - 1] = next;
        if next > BIG {
            for v in &mut f[n - 1..=start] {
                *v /= BIG;
            }
        }
    }
    let norm = f[0] + 2.0 * f[1..=start].iter().rev().sum::<f64>();
    for v in &mut f {
        *v /= norm;
    }
    let keep = f
        .iter()
        .rposition(|&v| v > 1e-300)
        .map_or(0, |p| p + 1)
        .max(nmin + 1);
    f.truncate(keep.min(start + 2).max(nmin + 1));
    f.resize(f.len().max(nmin + 1), 0.0);
    f
}

/// `exp(-x) I_n(x)` for a single order.
pub fn scaled_bessel_i(n: usize, x: f64) -> f64 {
    scaled_bessel_i_seq(x, n)[n]
}
