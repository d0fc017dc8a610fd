//! Exact evaluation of `f_u = -Tr log(1 - M) / 2` and of the individual
//! round-trip terms `Tr M^r / (2r)`.

mod kernel;
mod nystrom;

pub use kernel::{
    mode_kernel_values, reflection_kernel_angular, reflection_kernel_mode, KernelVariant, SERIES_CAP,
};
pub use nystrom::{build_mode_matrix, AccuracySpec, ModeMatrix};

use nystrom::with_mode_retry;

use crate::error::{domain, Result};
use crate::evaluate::{EnergyResult, Method, SolverStats};
use crate::geometry::ReducedGeometry;

/// Evaluates the mode sum at the base resolution and with twice as many
/// nodes; the refined value is reported and the difference is the error
/// estimate.
fn two_resolutions(
    geom: &ReducedGeometry,
    variant: KernelVariant,
    acc: &AccuracySpec,
    with_log_det: bool,
    powers: &[usize],
) -> Result<Vec<EnergyResult>> {
    let run = |refine| {
        with_mode_retry(geom, variant, acc, refine, |d| {
            let (v, modes) = d.mode_sum(acc.mode_tol, with_log_det, powers)?;
            Ok((v, modes, d.nodes))
        })
    };
    let (base, _, _) = run(1)?;
    let (fine, modes, nodes) = run(2)?;
    Ok(fine
        .iter()
        .zip(&base)
        .map(|(&v, &b)| EnergyResult {
            value: v,
            error_estimate: Some((v - b).abs()),
            method: Method::Exact,
            stats: Some(SolverStats {
                modes,
                coarse_nodes: nodes.0,
                fine_nodes: nodes.1,
            }),
        })
        .collect())
}

/// `f_u = -Tr log(1 - M) / 2`.
pub fn free_energy_exact(
    geom: &ReducedGeometry,
    variant: KernelVariant,
    acc: &AccuracySpec,
) -> Result<EnergyResult> {
    Ok(two_resolutions(geom, variant, acc, true, &[])?.remove(0))
}

/// `f_u^{(r)} = Tr M^r / (2r)`.
pub fn round_trip_contribution(
    r: usize,
    geom: &ReducedGeometry,
    variant: KernelVariant,
    acc: &AccuracySpec,
) -> Result<EnergyResult> {
    Ok(round_trip_contributions(&[r], geom, variant, acc)?.remove(0))
}

/// Several round-trip terms from one discretization.
pub fn round_trip_contributions(
    rs: &[usize],
    geom: &ReducedGeometry,
    variant: KernelVariant,
    acc: &AccuracySpec,
) -> Result<Vec<EnergyResult>> {
    if rs.contains(&0) {
        return Err(domain("round-trip order must be at least 1"));
    }
    let mut results = two_resolutions(geom, variant, acc, false, rs)?;
    for r in &mut results {
        r.method = Method::RoundTrip;
    }
    Ok(results)
}
