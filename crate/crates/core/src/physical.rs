//! Physical units: free energy, entropy and force at temperature `T`, and
//! warnings when the screened zero-frequency description becomes marginal.
//!
//! Lengths are in metres, temperatures in kelvin, energies in joules and
//! forces in newtons. The free energy is `F = -k_B T f_u` and the entropy
//! `S = k_B f_u`, so `F = -T S`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::analytic::{self, RationalModel};
use crate::error::{domain, Result};
use crate::geometry::{reduce, PhysicalGeometry, ReducedGeometry};
use crate::scattering::{free_energy_exact, AccuracySpec, KernelVariant};

/// Boltzmann constant in J/K.
pub const BOLTZMANN: f64 = 1.380649e-23;

/// Default crossover distance below which nonzero Matsubara terms matter.
pub const DEFAULT_ELL_T: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConditions {
    /// Temperature in kelvin.
    pub temperature: f64,
    /// Debye screening length in metres.
    pub debye_length: f64,
    /// Crossover distance `ell_T` in metres.
    pub ell_t: f64,
}

impl PhysicalConditions {
    pub fn new(temperature: f64, debye_length: f64) -> Result<Self> {
        Self::with_ell_t(temperature, debye_length, DEFAULT_ELL_T)
    }

    pub fn with_ell_t(temperature: f64, debye_length: f64, ell_t: f64) -> Result<Self> {
        let c = Self {
            temperature,
            debye_length,
            ell_t,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        for (v, name) in [
            (self.temperature, "temperature"),
            (self.debye_length, "Debye length"),
            (self.ell_t, "ell_T"),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(domain(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }

    /// `k_B T` in joules.
    pub fn thermal_energy(&self) -> f64 {
        BOLTZMANN * self.temperature
    }
}

/// Free energy and entropy of the configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Energy {
    /// Free energy in joules (negative: attraction).
    pub joules: f64,
    /// Free energy in units of `k_B T`, that is `-f_u`.
    pub thermal_units: f64,
    /// Entropy in J/K.
    pub entropy: f64,
}

pub fn dimensional_free_energy(c: &PhysicalConditions, f_u: f64) -> Result<Energy> {
    c.validate()?;
    if !(f_u.is_finite() && f_u >= 0.0) {
        return Err(domain(format!("f_u must be finite and nonnegative, got {f_u}")));
    }
    let entropy = BOLTZMANN * f_u;
    Ok(Energy {
        joules: -c.temperature * entropy,
        thermal_units: -f_u,
        entropy,
    })
}

/// Source of `f_u` and, when available in closed form, `d f_u / d y`.
pub trait FreeEnergyModel {
    fn f_u(&self, geom: &ReducedGeometry) -> Result<f64>;

    fn df_dy(&self, _geom: &ReducedGeometry) -> Option<Result<f64>> {
        None
    }
}

/// Single round trip times the rational model, with an analytic derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalApprox(pub RationalModel);

impl FreeEnergyModel for RationalApprox {
    fn f_u(&self, geom: &ReducedGeometry) -> Result<f64> {
        analytic::free_energy_approx(geom.y, geom.u, &self.0)
    }

    fn df_dy(&self, geom: &ReducedGeometry) -> Option<Result<f64>> {
        Some(analytic::free_energy_approx_dy(geom.y, geom.u, &self.0))
    }
}

/// Single round trip only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SingleRoundTrip;

impl FreeEnergyModel for SingleRoundTrip {
    fn f_u(&self, geom: &ReducedGeometry) -> Result<f64> {
        analytic::single_round_trip(geom.y, geom.u)
    }

    fn df_dy(&self, geom: &ReducedGeometry) -> Option<Result<f64>> {
        Some(analytic::single_round_trip_dy(geom.y, geom.u))
    }
}

/// Full scattering solution; differentiated numerically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactSolver {
    pub variant: KernelVariant,
    pub accuracy: AccuracySpec,
}

impl FreeEnergyModel for ExactSolver {
    fn f_u(&self, geom: &ReducedGeometry) -> Result<f64> {
        Ok(free_energy_exact(geom, self.variant, &self.accuracy)?.value)
    }
}

/// `dy/dL = (1 + u x) / R_eff`.
fn dy_dl(g: &PhysicalGeometry, geom: &ReducedGeometry) -> f64 {
    (1.0 + geom.u * geom.x) / g.effective_radius()
}

/// Force `-dF/dL` in newtons; negative values are attractive.
///
/// Uses the model's analytic derivative when it has one, a central finite
/// difference otherwise.
pub fn force(g: &PhysicalGeometry, c: &PhysicalConditions, model: &impl FreeEnergyModel) -> Result<f64> {
    c.validate()?;
    let geom = reduce(g)?;
    match model.df_dy(&geom) {
        Some(d) => Ok(c.thermal_energy() * d? * dy_dl(g, &geom)),
        None => force_finite_difference(g, c, model),
    }
}

/// Central difference with step `max(1e-4 L, 1e-6 R_eff)`.
pub fn force_finite_difference(
    g: &PhysicalGeometry,
    c: &PhysicalConditions,
    model: &impl FreeEnergyModel,
) -> Result<f64> {
    c.validate()?;
    g.validate()?;
    let h = (1e-4 * g.distance).max(1e-6 * g.effective_radius());
    if g.distance - h <= 0.0 {
        return Err(domain(format!(
            "finite-difference step {h:e} does not fit below the distance {:e}",
            g.distance
        )));
    }
    let at = |l: f64| model.f_u(&reduce(&g.with_distance(l)?)?);
    let df_dl = (at(g.distance + h)? - at(g.distance - h)?) / (2.0 * h);
    Ok(c.thermal_energy() * df_dl)
}

/// Thresholds of [`validity_check_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidityThresholds {
    /// Warn when `L < screening_factor * lambda_D`.
    pub screening_factor: f64,
    /// Warn when `L < matsubara_factor * ell_T`.
    pub matsubara_factor: f64,
}

impl Default for ValidityThresholds {
    fn default() -> Self {
        Self {
            screening_factor: 5.0,
            matsubara_factor: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ValidityWarning {
    /// The distance is not large compared with the Debye length.
    Screening { distance: f64, debye_length: f64 },
    /// The distance is below the crossover `ell_T`.
    Matsubara { distance: f64, ell_t: f64 },
}

impl fmt::Display for ValidityWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Screening { distance, debye_length } => write!(
                f,
                "distance {distance:e} m is not large compared with the Debye length {debye_length:e} m; \
                 screening of the longitudinal channel is incomplete"
            ),
            Self::Matsubara { distance, ell_t } => write!(
                f,
                "distance {distance:e} m is below ell_T = {ell_t:e} m; \
                 nonzero Matsubara frequencies contribute"
            ),
        }
    }
}

pub fn validity_check(g: &PhysicalGeometry, c: &PhysicalConditions) -> Vec<ValidityWarning> {
    validity_check_with(g, c, &ValidityThresholds::default())
}

pub fn validity_check_with(
    g: &PhysicalGeometry,
    c: &PhysicalConditions,
    t: &ValidityThresholds,
) -> Vec<ValidityWarning> {
    let mut out = Vec::new();
    let l = g.distance;
    if l < t.screening_factor * c.debye_length {
        out.push(ValidityWarning::Screening {
            distance: l,
            debye_length: c.debye_length,
        });
    }
    if l < t.matsubara_factor * c.ell_t {
        out.push(ValidityWarning::Matsubara { distance: l, ell_t: c.ell_t });
    }
    out
}
