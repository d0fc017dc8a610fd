//! Number formatting shared by the writers: ten significant digits.

use serde::Serialize;

/// `v` in scientific notation with ten significant digits.
pub fn format_sig(v: f64) -> String {
    format!("{v:.9e}")
}

/// `v` rounded to ten significant digits, for JSON output.
pub fn round_sig(v: f64) -> f64 {
    if v.is_finite() {
        format_sig(v).parse().unwrap_or(v)
    } else {
        v
    }
}

pub fn round_opt(v: Option<f64>) -> Option<f64> {
    v.map(round_sig)
}

pub fn to_json<T: Serialize>(v: &T) -> Result<String, serde_json::Error> {
    serde_json::to_string_pretty(v)
}
