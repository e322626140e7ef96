//! Baffled circular piston.

use crate::error::{Error, Result};
use crate::medium::Medium;
use crate::special::{bessel_j1, integrate, J1_FIRST_ZERO};
use std::f64::consts::{FRAC_PI_2, PI};

/// Circular disk of diameter `d` vibrating in a rigid plane.
#[derive(Debug, Clone, PartialEq)]
pub struct DiskRadiator {
    pub diameter: f64,
    pub frequency: f64,
    pub medium: Medium,
}

impl DiskRadiator {
    pub fn new(diameter: f64, frequency: f64, medium: Medium) -> Result<Self> {
        if !(diameter > 0.0 && diameter.is_finite()) {
            return Err(Error::validation(format!("disk diameter must be positive, got {diameter}")));
        }
        medium.wave_vector(frequency)?;
        Ok(Self { diameter, frequency, medium })
    }

    pub fn wavelength(&self) -> f64 {
        self.medium.speed / self.frequency
    }

    pub fn null_angle(&self) -> Option<f64> {
        disk_null_angle(self.diameter, self.wavelength())
    }

    pub fn gain(&self) -> f64 {
        disk_gain(self.diameter, self.wavelength())
    }
}

fn check(d: f64, lambda: f64) {
    assert!(d > 0.0 && lambda > 0.0, "disk diameter and wavelength must be positive");
}

/// Angle of the first pattern zero, or `None` when the disk is too small
/// relative to the wavelength to form a fully developed beam.
pub fn disk_null_angle(d: f64, lambda: f64) -> Option<f64> {
    check(d, lambda);
    let s = J1_FIRST_ZERO / PI * lambda / d;
    if s > 1.0 + 1e-12 {
        None
    } else {
        Some(s.min(1.0).asin())
    }
}

/// Relative intensity `[2 J₁(x)/x]²`, `x = (πd/λ) sin θ`, on the baffled side.
pub fn disk_pattern(d: f64, lambda: f64, theta: f64) -> Result<f64> {
    check(d, lambda);
    if !(0.0..=FRAC_PI_2 + 1e-12).contains(&theta) {
        return Err(Error::domain(format!("disk pattern angle {theta} outside [0, π/2]")));
    }
    Ok(pattern(PI * d / lambda * theta.sin()))
}

fn pattern(x: f64) -> f64 {
    if x.abs() < 1e-6 {
        1.0 - x * x / 4.0
    } else {
        let j = 2.0 * bessel_j1(x) / x;
        j * j
    }
}

/// On-axis flux relative to the flux averaged over the radiating half-space.
pub fn disk_gain(d: f64, lambda: f64) -> f64 {
    check(d, lambda);
    let ka = PI * d / lambda;
    let panels = 16 + (4.0 * ka) as usize;
    let avg = integrate(|t| pattern(ka * t.sin()) * t.sin(), 0.0, FRAC_PI_2, panels);
    1.0 / avg
}

/// Short-wavelength limit `½(πd/λ)²`.
pub fn disk_gain_asymptote(d: f64, lambda: f64) -> f64 {
    0.5 * (PI * d / lambda).powi(2)
}
