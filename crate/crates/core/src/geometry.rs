//! Geometric parameters of the two-sphere (or plane-sphere) configuration.
//!
//! The interaction depends on lengths only through two ratios. We use
//!
//! * `u = R1 R2 / (R1 + R2)^2`, the radius-ratio parameter in `[0, 1/4]`,
//! * `x = L / R_eff` with `R_eff = R1 R2 / (R1 + R2)`,
//! * `y = 1 + x + u x^2 / 2`, the conformally invariant distance.
//!
//! A plane is represented by an explicit flag together with `u = 0`, never by
//! a large finite radius.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Largest admissible value of the radius-ratio parameter (equal spheres).
pub const U_MAX: f64 = 0.25;

/// Second body facing sphere 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecondBody {
    Sphere(f64),
    Plane,
}

/// Physical description: surface-to-surface distance and radii, in any
/// common length unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalGeometry {
    pub distance: f64,
    pub radius1: f64,
    pub second: SecondBody,
}

impl PhysicalGeometry {
    pub fn two_spheres(distance: f64, radius1: f64, radius2: f64) -> Result<Self> {
        let g = Self {
            distance,
            radius1,
            second: SecondBody::Sphere(radius2),
        };
        g.validate()?;
        Ok(g)
    }

    pub fn plane_sphere(distance: f64, radius: f64) -> Result<Self> {
        let g = Self {
            distance,
            radius1: radius,
            second: SecondBody::Plane,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, name: &str| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(domain(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive(self.distance, "distance L")?;
        positive(self.radius1, "radius R1")?;
        if let SecondBody::Sphere(r2) = self.second {
            positive(r2, "radius R2")?;
        }
        Ok(())
    }

    pub fn is_plane_sphere(&self) -> bool {
        matches!(self.second, SecondBody::Plane)
    }

    /// `R1 R2 / (R1 + R2)`, or the sphere radius facing a plane.
    pub fn effective_radius(&self) -> f64 {
        match self.second {
            SecondBody::Sphere(r2) => self.radius1 * r2 / (self.radius1 + r2),
            SecondBody::Plane => self.radius1,
        }
    }

    /// Same geometry at another surface-to-surface distance.
    pub fn with_distance(&self, distance: f64) -> Result<Self> {
        let g = Self { distance, ..*self };
        g.validate()?;
        Ok(g)
    }
}

/// Dimensionless parameters derived from a geometry.
///
/// For the plane-sphere case `alpha_plus` and `z` are infinite and
/// `alpha_minus` is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedGeometry {
    pub u: f64,
    pub x: f64,
    pub y: f64,
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    pub z: f64,
    pub plane: bool,
}

impl ReducedGeometry {
    /// Build from the reduced distance `x = L/R_eff` and `u`.
    ///
    /// `u = 0` is interpreted as the plane-sphere configuration.
    pub fn from_distance(x: f64, u: f64) -> Result<Self> {
        check_u(u)?;
        if !(x.is_finite() && x > 0.0) {
            return Err(domain(format!("x must be positive and finite, got {x}")));
        }
        let y = conformal_parameter(x, u)?;
        Ok(Self::assemble(u, x, y))
    }

    /// Build from the conformal distance `y > 1` and `u`.
    pub fn from_conformal(y: f64, u: f64) -> Result<Self> {
        check_u(u)?;
        let x = distance_from_conformal(y, u)?;
        Ok(Self::assemble(u, x, y))
    }

    fn assemble(u: f64, x: f64, y: f64) -> Self {
        if u == 0.0 {
            return Self {
                u,
                x,
                y,
                alpha_plus: f64::INFINITY,
                alpha_minus: 0.0,
                z: f64::INFINITY,
                plane: true,
            };
        }
        let (alpha_plus, alpha_minus) = alphas(u);
        Self {
            u,
            x,
            y,
            alpha_plus,
            alpha_minus,
            z: 2.0 * y + alpha_plus + alpha_minus,
            plane: false,
        }
    }

    /// `y - 1` computed without cancellation.
    pub fn y_minus_1(&self) -> f64 {
        self.x * (1.0 + 0.5 * self.u * self.x)
    }

    /// Sphere radii and surface distance in units of `R_eff`.
    ///
    /// Returns `(R1, Some(R2), L)` with `R1 >= R2`, or `(1, None, L)` for a
    /// sphere facing a plane.
    pub fn scaled_lengths(&self) -> (f64, Option<f64>, f64) {
        if self.plane {
            (1.0, None, self.x)
        } else {
            (1.0 + self.alpha_plus, Some(1.0 + self.alpha_minus), self.x)
        }
    }
}

fn check_u(u: f64) -> Result<()> {
    if (0.0..=U_MAX).contains(&u) {
        Ok(())
    } else {
        Err(domain(format!("u must lie in [0, 1/4], got {u}")))
    }
}

fn alphas(u: f64) -> (f64, f64) {
    let root = (1.0 - 4.0 * u).max(0.0).sqrt();
    let big = 1.0 - 2.0 * u + root;
    (big / (2.0 * u), 2.0 * u / big)
}

/// Reduce a physical geometry to its dimensionless parameters.
pub fn reduce(g: &PhysicalGeometry) -> Result<ReducedGeometry> {
    g.validate()?;
    let r_eff = g.effective_radius();
    let x = g.distance / r_eff;
    match g.second {
        SecondBody::Plane => Ok(ReducedGeometry::assemble(0.0, x, 1.0 + x)),
        SecondBody::Sphere(r2) => {
            let r1 = g.radius1;
            let sum = r1 + r2;
            let u = (r_eff / sum).min(U_MAX);
            let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
            let alpha_plus = hi / lo;
            let alpha_minus = lo / hi;
            let y = conformal_parameter(x, u)?;
            Ok(ReducedGeometry {
                u,
                x,
                y,
                alpha_plus,
                alpha_minus,
                z: 2.0 * y + alpha_plus + alpha_minus,
                plane: false,
            })
        }
    }
}

/// `y = 1 + x + u x^2 / 2`.
pub fn conformal_parameter(x: f64, u: f64) -> Result<f64> {
    check_u(u)?;
    if !(x.is_finite() && x > 0.0) {
        return Err(domain(format!("x must be positive and finite, got {x}")));
    }
    Ok(1.0 + x + 0.5 * u * x * x)
}

/// Positive root `x(y, u)` of `y = 1 + x + u x^2 / 2`.
pub fn distance_from_conformal(y: f64, u: f64) -> Result<f64> {
    check_u(u)?;
    if !(y.is_finite() && y > 1.0) {
        return Err(domain(format!("y must exceed 1, got {y}")));
    }
    let t = y - 1.0;
    Ok(2.0 * t / (1.0 + (1.0 + 2.0 * u * t).sqrt()))
}

/// Radius ratios `(alpha_plus, alpha_minus)` with `alpha_plus >= alpha_minus`
/// and `alpha_plus * alpha_minus = 1`.
///
/// `u = 0` is the plane-sphere limit and has no finite ratios; callers must
/// branch on it.
pub fn aspect_parameters(u: f64) -> Result<(f64, f64)> {
    check_u(u)?;
    if u == 0.0 {
        return Err(domain(
            "u = 0 is the plane-sphere configuration; use the dedicated plane branch",
        ));
    }
    Ok(alphas(u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn equal_spheres() {
        let r = reduce(&PhysicalGeometry::two_spheres(1.0, 2.0, 2.0).unwrap()).unwrap();
        assert_eq!(r.u, 0.25);
        assert_relative_eq!(r.x, 1.0, max_relative = 1e-15);
        assert_relative_eq!(r.y, 2.125, max_relative = 1e-15);
        assert_eq!(r.alpha_plus, 1.0);
        assert_relative_eq!(r.z, 6.25, max_relative = 1e-15);
    }

    #[test]
    fn plane_sphere() {
        let r = reduce(&PhysicalGeometry::plane_sphere(0.5, 1.0).unwrap()).unwrap();
        assert!(r.plane);
        assert_eq!(r.u, 0.0);
        assert_eq!(r.x, 0.5);
        assert_eq!(r.y, 1.5);
    }

    #[test]
    fn conformal_examples() {
        assert_eq!(conformal_parameter(1.0, 0.0).unwrap(), 2.0);
        assert_eq!(conformal_parameter(2.0, 0.25).unwrap(), 3.5);
        assert_relative_eq!(
            distance_from_conformal(2.125, 0.25).unwrap(),
            1.0,
            max_relative = 1e-15
        );
        assert!(conformal_parameter(1.0, 0.3).is_err());
        assert!(distance_from_conformal(1.0, 0.1).is_err());
    }

    #[test]
    fn aspect_examples() {
        assert_eq!(aspect_parameters(0.25).unwrap(), (1.0, 1.0));
        let (p, m) = aspect_parameters(0.1).unwrap();
        assert_relative_eq!(p + m, 8.0, max_relative = 1e-15);
        assert_relative_eq!(p * m, 1.0, max_relative = 1e-15);
        assert_relative_eq!(p, 4.0 + 15f64.sqrt(), max_relative = 1e-15);
        assert!(aspect_parameters(0.0).is_err());
    }

    #[test]
    fn small_u_alpha_minus() {
        // alpha_minus = u + 2u^2 + O(u^3)
        let u = 1e-6;
        let (p, m) = aspect_parameters(u).unwrap();
        assert_relative_eq!(m, u + 2.0 * u * u, max_relative = 1e-11);
        assert_relative_eq!(p * m, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn nonpositive_inputs_rejected() {
        assert!(PhysicalGeometry::two_spheres(0.0, 1.0, 1.0).is_err());
        assert!(PhysicalGeometry::two_spheres(1.0, -1.0, 1.0).is_err());
        assert!(PhysicalGeometry::two_spheres(1.0, 1.0, f64::NAN).is_err());
        assert!(PhysicalGeometry::plane_sphere(1.0, 0.0).is_err());
    }
}
