//! Acoustic media: power-law attenuation, the complex wave vector and the
//! viscosity implied by the attenuation.

use crate::error::{Error, Result};
use crate::units::MHZ;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// One term `a · f_MHz^p` of an attenuation law (result in m⁻¹).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawTerm {
    pub coefficient: f64,
    pub exponent: f64,
}

/// Attenuation `α(f) = Σ aᵢ f_MHz^pᵢ` in m⁻¹.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<PowerLawTerm>", into = "Vec<PowerLawTerm>")]
pub struct AttenuationModel {
    terms: Vec<PowerLawTerm>,
}

impl TryFrom<Vec<PowerLawTerm>> for AttenuationModel {
    type Error = Error;
    fn try_from(terms: Vec<PowerLawTerm>) -> Result<Self> {
        Self::new(terms)
    }
}

impl From<AttenuationModel> for Vec<PowerLawTerm> {
    fn from(m: AttenuationModel) -> Self {
        m.terms
    }
}

impl AttenuationModel {
    pub fn new(terms: Vec<PowerLawTerm>) -> Result<Self> {
        for t in &terms {
            if !(t.coefficient.is_finite() && t.coefficient >= 0.0) {
                return Err(Error::validation(format!(
                    "attenuation coefficient must be finite and nonnegative, got {}",
                    t.coefficient
                )));
            }
            if !(t.exponent.is_finite() && t.exponent > 0.0) {
                return Err(Error::validation(format!(
                    "attenuation exponent must be finite and positive, got {}",
                    t.exponent
                )));
            }
        }
        Ok(Self { terms })
    }

    fn from_pairs(pairs: &[(f64, f64)]) -> Self {
        Self {
            terms: pairs
                .iter()
                .map(|&(coefficient, exponent)| PowerLawTerm { coefficient, exponent })
                .collect(),
        }
    }

    /// Pure water: `0.025 f²`.
    pub fn water() -> Self {
        Self::from_pairs(&[(0.025, 2.0)])
    }

    /// Low-attenuation tissue: `0.5 f^1.36 + 0.025 f²`.
    pub fn low() -> Self {
        Self::from_pairs(&[(0.5, 1.36), (0.025, 2.0)])
    }

    /// High-attenuation tissue: `5.2 f^1.28 + 0.137 f²`.
    pub fn high() -> Self {
        Self::from_pairs(&[(5.2, 1.28), (0.137, 2.0)])
    }

    /// No attenuation at all; useful as a lossless reference.
    pub fn lossless() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn terms(&self) -> &[PowerLawTerm] {
        &self.terms
    }

    /// Attenuation in m⁻¹ at frequency `f` (Hz).
    pub fn alpha(&self, f: f64) -> Result<f64> {
        if !(f >= 0.0) {
            return Err(Error::domain(format!("frequency must be nonnegative, got {f} Hz")));
        }
        let fm = f / MHZ;
        Ok(self
            .terms
            .iter()
            .map(|t| t.coefficient * fm.powf(t.exponent))
            .sum())
    }

    /// Characteristic attenuation distance `1/α` (m); infinite when α = 0.
    pub fn attenuation_distance(&self, f: f64) -> Result<f64> {
        Ok(1.0 / self.alpha(f)?)
    }
}

/// How the effective viscosity `(4/3)η + ξ` is divided into shear and bulk parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ViscositySplit {
    /// `η = ξ`, i.e. `η = (3/7) · effective`.
    EqualShearBulk,
    /// Shear viscosity fixed (Pa·s); bulk takes the remainder, clamped at zero
    /// with `η` reduced so the total is preserved.
    FixedShear { shear: f64 },
}

impl Default for ViscositySplit {
    fn default() -> Self {
        ViscositySplit::EqualShearBulk
    }
}

/// Shear water viscosity near body temperature (Pa·s).
pub const WATER_SHEAR_VISCOSITY_310K: f64 = 6.9e-4;

/// Viscosities implied by the attenuation at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Viscosity {
    /// `(4/3)η + ξ`, Pa·s.
    pub effective: f64,
    pub shear: f64,
    pub bulk: f64,
}

/// Complex wave vector at one frequency: `k = ω/c + iα`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveVector {
    pub k: Complex64,
    pub frequency: f64,
    pub omega: f64,
    pub wavelength: f64,
}

impl WaveVector {
    pub fn alpha(&self) -> f64 {
        self.k.im
    }
}

/// A homogeneous acoustic medium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Medium {
    /// Speed of sound, m/s.
    pub speed: f64,
    /// Density, kg/m³.
    pub density: f64,
    /// Ambient temperature, K.
    pub temperature: f64,
    /// Thermal conductivity, W/m/K.
    pub thermal_conductivity: f64,
    /// Specific heat capacity, J/kg/K.
    pub heat_capacity: f64,
    pub attenuation: AttenuationModel,
    #[serde(default)]
    pub viscosity_split: ViscositySplit,
}

impl Medium {
    /// A medium with the tissue/water bulk constants and the given attenuation.
    pub fn with_attenuation(attenuation: AttenuationModel) -> Self {
        Self {
            speed: 1500.0,
            density: 1000.0,
            temperature: 310.0,
            thermal_conductivity: 0.6,
            heat_capacity: 4200.0,
            attenuation,
            viscosity_split: ViscositySplit::default(),
        }
    }

    pub fn water() -> Self {
        Self::with_attenuation(AttenuationModel::water())
    }

    pub fn low() -> Self {
        Self::with_attenuation(AttenuationModel::low())
    }

    pub fn high() -> Self {
        Self::with_attenuation(AttenuationModel::high())
    }

    pub fn lossless() -> Self {
        Self::with_attenuation(AttenuationModel::lossless())
    }

    /// Look up `"water"`, `"low"`, `"high"` or `"lossless"`.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "water" => Ok(Self::water()),
            "low" => Ok(Self::low()),
            "high" => Ok(Self::high()),
            "lossless" => Ok(Self::lossless()),
            other => Err(Error::validation(format!(
                "unknown medium preset `{other}` (expected water, low, high or lossless)"
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("speed of sound", self.speed),
            ("density", self.density),
            ("temperature", self.temperature),
            ("thermal conductivity", self.thermal_conductivity),
            ("heat capacity", self.heat_capacity),
        ];
        for (name, v) in checks {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation(format!("{name} must be positive, got {v}")));
            }
        }
        if let ViscositySplit::FixedShear { shear } = self.viscosity_split {
            if !(shear.is_finite() && shear >= 0.0) {
                return Err(Error::validation(format!(
                    "shear viscosity must be nonnegative, got {shear}"
                )));
            }
        }
        AttenuationModel::new(self.attenuation.terms.clone()).map(|_| ())
    }

    pub fn alpha(&self, f: f64) -> Result<f64> {
        self.attenuation.alpha(f)
    }

    pub fn wave_vector(&self, f: f64) -> Result<WaveVector> {
        if !(f > 0.0 && f.is_finite()) {
            return Err(Error::domain(format!("frequency must be positive, got {f} Hz")));
        }
        let omega = 2.0 * PI * f;
        Ok(WaveVector {
            k: Complex64::new(omega / self.speed, self.alpha(f)?),
            frequency: f,
            omega,
            wavelength: self.speed / f,
        })
    }

    /// Inverts `α = ((4/3)η + ξ) ω² / (2c³ρ)` and splits the result.
    pub fn viscosity(&self, f: f64) -> Result<Viscosity> {
        let wv = self.wave_vector(f)?;
        let effective =
            2.0 * self.speed.powi(3) * self.density * wv.alpha() / (wv.omega * wv.omega);
        let (shear, bulk) = match self.viscosity_split {
            ViscositySplit::EqualShearBulk => {
                let eta = 3.0 / 7.0 * effective;
                (eta, eta)
            }
            ViscositySplit::FixedShear { shear } => {
                let xi = effective - 4.0 / 3.0 * shear;
                if xi >= 0.0 {
                    (shear, xi)
                } else {
                    (0.75 * effective, 0.0)
                }
            }
        };
        Ok(Viscosity { effective, shear, bulk })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn presets_evaluate_their_power_laws() {
        for &f in &[1.0, 10.0, 100.0, 300.0] {
            let hz = f * MHZ;
            assert_relative_eq!(AttenuationModel::water().alpha(hz).unwrap(), 0.025 * f * f, max_relative = 1e-15);
            assert_relative_eq!(
                AttenuationModel::low().alpha(hz).unwrap(),
                0.5 * f.powf(1.36) + 0.025 * f * f,
                max_relative = 1e-15
            );
            assert_relative_eq!(
                AttenuationModel::high().alpha(hz).unwrap(),
                5.2 * f.powf(1.28) + 0.137 * f * f,
                max_relative = 1e-15
            );
        }
    }

    #[test]
    fn attenuation_examples() {
        let water = AttenuationModel::water();
        assert_relative_eq!(water.alpha(100.0 * MHZ).unwrap(), 250.0, max_relative = 1e-12);
        let high = AttenuationModel::high().alpha(100.0 * MHZ).unwrap();
        assert_relative_eq!(high, 3.26e3, max_relative = 2e-3);
        assert_eq!(AttenuationModel::low().alpha(0.0).unwrap(), 0.0);
        assert!(matches!(water.alpha(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn custom_models_are_validated() {
        let bad = AttenuationModel::new(vec![PowerLawTerm { coefficient: -1.0, exponent: 1.0 }]);
        assert!(bad.is_err());
        let bad = AttenuationModel::new(vec![PowerLawTerm { coefficient: 1.0, exponent: 0.0 }]);
        assert!(bad.is_err());
        let parsed: std::result::Result<AttenuationModel, _> =
            serde_json::from_str(r#"[{"coefficient": 1.0, "exponent": -2.0}]"#);
        assert!(parsed.is_err());
    }

    #[test]
    fn wave_vector_examples() {
        let wv = Medium::water().wave_vector(100.0 * MHZ).unwrap();
        assert_relative_eq!(wv.k.re, 2.0 * PI * 1e8 / 1500.0, max_relative = 1e-15);
        assert_relative_eq!(wv.k.re, 4.189e5, max_relative = 1e-3);
        assert_relative_eq!(wv.k.im, 250.0, max_relative = 1e-12);
        let wv = Medium::water().wave_vector(10.0 * MHZ).unwrap();
        assert_relative_eq!(wv.wavelength, 150e-6, max_relative = 1e-12);
        assert_eq!(Medium::lossless().wave_vector(5e6).unwrap().k.im, 0.0);
        assert!(Medium::water().wave_vector(0.0).is_err());
    }

    #[test]
    fn effective_viscosity_inverts_attenuation() {
        let m = Medium::water();
        let v = m.viscosity(100.0 * MHZ).unwrap();
        assert_relative_eq!(v.effective, 4.27e-3, max_relative = 2e-3);
        assert_relative_eq!(4.0 / 3.0 * v.shear + v.bulk, v.effective, max_relative = 1e-14);

        let low = Medium::low();
        let f = 10.0 * MHZ;
        let omega = 2.0 * PI * f;
        let expected = 2.0 * 1500f64.powi(3) * 1000.0 * low.alpha(f).unwrap() / (omega * omega);
        assert_relative_eq!(low.viscosity(f).unwrap().effective, expected, max_relative = 1e-14);

        let mut doubled = Medium::with_attenuation(
            AttenuationModel::new(vec![PowerLawTerm { coefficient: 0.05, exponent: 2.0 }]).unwrap(),
        );
        doubled.viscosity_split = ViscositySplit::EqualShearBulk;
        assert_relative_eq!(
            doubled.viscosity(f).unwrap().effective,
            2.0 * m.viscosity(f).unwrap().effective,
            max_relative = 1e-14
        );
    }

    #[test]
    fn fixed_shear_split_clamps() {
        let mut m = Medium::water();
        m.viscosity_split = ViscositySplit::FixedShear { shear: WATER_SHEAR_VISCOSITY_310K };
        let v = m.viscosity(100.0 * MHZ).unwrap();
        assert_eq!(v.shear, WATER_SHEAR_VISCOSITY_310K);
        assert!(v.bulk > 0.0);
        // water's effective viscosity is frequency independent (α ∝ f²)
        m.viscosity_split = ViscositySplit::FixedShear { shear: 1e-2 };
        let v = m.viscosity(1.0 * MHZ).unwrap();
        assert_eq!(v.bulk, 0.0);
        assert_relative_eq!(4.0 / 3.0 * v.shear, v.effective, max_relative = 1e-14);
    }

    #[test]
    fn wave_vector_round_trip() {
        for name in ["water", "low", "high"] {
            let m = Medium::preset(name).unwrap();
            for &f in &[1e6, 1e7, 1e8, 3e8] {
                let wv = m.wave_vector(f).unwrap();
                assert_eq!(wv.k.im, m.alpha(f).unwrap());
                assert_relative_eq!(wv.wavelength * f, m.speed, max_relative = 1e-15);
            }
        }
        assert!(Medium::preset("jelly").is_err());
    }
}
