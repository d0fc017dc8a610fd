//! Uniform front end over the exact solver, the closed forms and the
//! asymptotic limits.

use serde::{Deserialize, Serialize};

use crate::analytic::{self, RationalModel};
use crate::error::{domain, Error, Result};
use crate::geometry::ReducedGeometry;
use crate::scattering::{self, AccuracySpec, KernelVariant};

/// How a free-energy value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Full scattering computation.
    Exact,
    /// Single round trip in closed form.
    Eq10,
    /// Single round trip times the rational model.
    Eq16,
    /// Proximity-force limit.
    Pfa,
    /// Large-distance limit.
    Dipole,
    /// A single round-trip term `Tr M^r / 2r` from the scattering solver.
    RoundTrip,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::Eq10 => "eq10",
            Self::Eq16 => "eq16",
            Self::Pfa => "pfa",
            Self::Dipole => "dipole",
            Self::RoundTrip => "roundtrip",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Self::Exact),
            "eq10" => Ok(Self::Eq10),
            "eq16" => Ok(Self::Eq16),
            "pfa" => Ok(Self::Pfa),
            "dipole" => Ok(Self::Dipole),
            "roundtrip" => Ok(Self::RoundTrip),
            other => Err(domain(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub modes: usize,
    pub coarse_nodes: usize,
    pub fine_nodes: usize,
}

/// Dimensionless free energy `f_u` with its provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyResult {
    pub value: f64,
    /// Absolute error estimate: the change under grid doubling for the exact
    /// solver, the model's maximal deviation for `eq16`, rounding level for
    /// `eq10`, and `None` for the asymptotic limits.
    pub error_estimate: Option<f64>,
    pub method: Method,
    pub stats: Option<SolverStats>,
}

impl EnergyResult {
    fn closed(value: f64, method: Method, error_estimate: Option<f64>) -> Self {
        Self {
            value,
            error_estimate,
            method,
            stats: None,
        }
    }

    pub fn relative_error(&self) -> Option<f64> {
        self.error_estimate.map(|e| e / self.value.abs())
    }
}

/// Evaluate `f_u` with the chosen method.
///
/// The kernel variant only affects the exact solver; the closed forms are
/// those of the dielectric-in-electrolyte case.
pub fn evaluate(
    method: Method,
    geom: &ReducedGeometry,
    variant: KernelVariant,
    acc: &AccuracySpec,
    model: &RationalModel,
) -> Result<EnergyResult> {
    let (y, u) = (geom.y, geom.u);
    match method {
        Method::Exact => scattering::free_energy_exact(geom, variant, acc),
        Method::RoundTrip => scattering::round_trip_contribution(1, geom, variant, acc),
        Method::Eq10 => {
            let v = analytic::single_round_trip(y, u)?;
            Ok(EnergyResult::closed(v, method, Some(1e-12 * v)))
        }
        Method::Eq16 => {
            let v = analytic::free_energy_approx(y, u, model)?;
            Ok(EnergyResult::closed(v, method, Some(model.max_deviation * v)))
        }
        Method::Pfa => Ok(EnergyResult::closed(analytic::pfa_limit(y)?, method, None)),
        Method::Dipole => Ok(EnergyResult::closed(
            analytic::large_distance_limit(y, u)?,
            method,
            None,
        )),
    }
}
