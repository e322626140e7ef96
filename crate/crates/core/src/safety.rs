//! Safety envelope: flux and pressure limits, heating, bubble and robot
//! resonances.

use crate::error::{Error, Result};
use crate::medium::Medium;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Power density of an active neutrophil, W/m³.
pub const NEUTROPHIL_POWER_DENSITY: f64 = 2e4;
/// Range of working skeletal muscle, W/m³.
pub const MUSCLE_POWER_DENSITY: (f64, f64) = (1e6, 2e6);
/// Upper frequency for the `3/r` bubble resonance estimate.
pub const BUBBLE_FORMULA_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SafetyLimits {
    /// W/m² (numerically equal to pW/μm²).
    pub max_flux: f64,
    /// Pa.
    pub membranolytic: f64,
    pub red_cell_rupture: f64,
    pub repeated_overpressure: f64,
    /// Low-frequency measurements, reported for information only.
    pub endothelial_static: f64,
    pub osmotic: f64,
    /// Source of any overridden value. Required when limits differ from the
    /// defaults.
    #[serde(default)]
    pub provenance: Option<String>,
}

impl Default for SafetyLimits {
    fn default() -> Self {
        Self {
            max_flux: 1e4,
            membranolytic: 3e6,
            red_cell_rupture: 1e6,
            repeated_overpressure: 1e5,
            endothelial_static: 42.0,
            osmotic: 300.0,
            provenance: None,
        }
    }
}

impl SafetyLimits {
    pub fn validate(&self) -> Result<()> {
        let values = [
            self.max_flux,
            self.membranolytic,
            self.red_cell_rupture,
            self.repeated_overpressure,
            self.endothelial_static,
            self.osmotic,
        ];
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::validation("safety limits must be positive"));
        }
        if !(self.membranolytic > self.red_cell_rupture && self.red_cell_rupture > self.repeated_overpressure) {
            return Err(Error::validation(
                "pressure limits must satisfy membranolytic > red-cell rupture > repeated overpressure",
            ));
        }
        let mut defaults = Self::default();
        defaults.provenance = self.provenance.clone();
        if *self != defaults && self.provenance.as_deref().is_none_or(|p| p.trim().is_empty()) {
            return Err(Error::validation("overridden safety limits need a provenance note"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Informational,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub quantity: String,
    pub value: f64,
    pub limit: f64,
    /// `limit / value`; above one is within the limit.
    pub margin: f64,
    pub status: CheckStatus,
}

impl Check {
    fn new(quantity: &str, value: f64, limit: f64, informational: bool) -> Self {
        let status = if informational {
            CheckStatus::Informational
        } else if value <= limit {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        let margin = if value > 0.0 { limit / value } else { f64::INFINITY };
        Self { quantity: quantity.into(), value, limit, margin, status }
    }

    /// For an informational check, whether the value would be within the limit.
    pub fn within(&self) -> bool {
        self.value <= self.limit
    }
}

/// Field quantities a scenario offers for checking.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SafetyInputs {
    /// Largest surface flux, W/m².
    pub max_surface_flux: Option<f64>,
    /// Largest pressure amplitude, Pa.
    pub max_pressure: Option<f64>,
    /// Input power (W) and radiator radius (m) for the steady heating estimate.
    pub input_power: Option<f64>,
    pub radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SafetyReport {
    pub checks: Vec<Check>,
    /// Inputs needed for the flux or pressure checks were missing.
    pub incomplete: bool,
    pub pass: bool,
}

impl SafetyReport {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }
}

pub fn check_scenario(inputs: &SafetyInputs, limits: &SafetyLimits, medium: &Medium) -> Result<SafetyReport> {
    limits.validate()?;
    let mut checks = Vec::new();
    if let Some(flux) = inputs.max_surface_flux {
        checks.push(Check::new("surface flux (W/m^2)", flux, limits.max_flux, false));
    }
    if let Some(p) = inputs.max_pressure {
        checks.push(Check::new("pressure vs membranolytic (Pa)", p, limits.membranolytic, false));
        checks.push(Check::new("pressure vs red-cell rupture (Pa)", p, limits.red_cell_rupture, false));
        checks.push(Check::new("pressure vs repeated overpressure (Pa)", p, limits.repeated_overpressure, false));
        checks.push(Check::new("pressure vs endothelial static (Pa)", p, limits.endothelial_static, true));
        checks.push(Check::new("pressure vs osmotic (Pa)", p, limits.osmotic, true));
    }
    if let (Some(power), Some(r)) = (inputs.input_power, inputs.radius) {
        let dt = steady_heating(power, r, medium)?;
        checks.push(Check::new("steady surface heating (K)", dt, 1e-3, true));
    }
    let incomplete = inputs.max_surface_flux.is_none() || inputs.max_pressure.is_none();
    if incomplete {
        log::info!("safety report is incomplete: surface flux or pressure was not provided");
    }
    let pass = checks.iter().all(|c| c.status != CheckStatus::Fail);
    Ok(SafetyReport { checks, incomplete, pass })
}

/// Steady temperature rise at distance `r` from a point source of `power`, K.
pub fn steady_heating(power: f64, r: f64, medium: &Medium) -> Result<f64> {
    if !(power >= 0.0 && r > 0.0) {
        return Err(Error::domain("heating needs nonnegative power and positive distance"));
    }
    Ok(power / (4.0 * PI * r * medium.thermal_conductivity))
}

/// Power per unit volume of a sphere of radius `a` dissipating `power`.
pub fn power_density(power: f64, a: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::domain("radius must be positive"));
    }
    Ok(power / (4.0 / 3.0 * PI * a.powi(3)))
}

/// Initial heating rate in K/min from plane-wave absorption, `2αI/(ρ c_p)`.
/// An order-of-magnitude estimate: conduction and perfusion are ignored.
pub fn heating_rate(intensity: f64, f: f64, medium: &Medium) -> Result<f64> {
    if !(intensity >= 0.0) {
        return Err(Error::domain("intensity must be nonnegative"));
    }
    let alpha = medium.alpha(f)?;
    Ok(2.0 * alpha * intensity / (medium.density * medium.heat_capacity) * 60.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Resonance {
    /// Hz.
    pub frequency: f64,
    /// True when the estimate is used outside its range of validity.
    pub out_of_range: bool,
}

/// `f ≈ 3/r` with `r` in metres. Flagged above 1 MHz.
pub fn bubble_resonance(r: f64) -> Result<Resonance> {
    if !(r > 0.0) {
        return Err(Error::domain("bubble radius must be positive"));
    }
    let frequency = 3.0 / r;
    Ok(Resonance { frequency, out_of_range: frequency > BUBBLE_FORMULA_LIMIT })
}

/// Lowest mechanical resonance `(1/2π)√(k/m)` of a robot with stiffness `k`
/// (N/m) and mass `m` (kg).
pub fn robot_resonance(stiffness: f64, mass: f64) -> Result<f64> {
    if !(stiffness > 0.0 && mass > 0.0) {
        return Err(Error::domain("stiffness and mass must be positive"));
    }
    Ok((stiffness / mass).sqrt() / (2.0 * PI))
}
