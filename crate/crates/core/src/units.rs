//! Physical conventions and unit handling.
//!
//! Every quantity inside the crate is SI (m, s, kg, Pa, W, K). A complex
//! amplitude `A` stands for the physical signal `Re(A e^{-iωt})`; nothing in
//! the crate flips that sign. Conversions to the micro-scale units used on
//! the command line and in reports happen only at those boundaries, through
//! the helpers below.

use std::fmt;

/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380649e-23;

pub const MICRON: f64 = 1e-6;
pub const MHZ: f64 = 1e6;
pub const PICOWATT: f64 = 1e-12;
/// pW/μm² expressed in W/m² (the two are numerically equal).
pub const PW_PER_UM2: f64 = 1.0;
pub const ZEPTOJOULE: f64 = 1e-21;

/// Dimension of a parsed quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    Frequency,
    Power,
    Flux,
    Time,
    Energy,
    Area,
    Pressure,
    Temperature,
    Speed,
    Density,
    Angle,
    /// Attenuation coefficient, Np/m.
    Attenuation,
    Conductivity,
    SpecificHeat,
    Stiffness,
    Mass,
    Viscosity,
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Dimension::Length => "length",
            Dimension::Frequency => "frequency",
            Dimension::Power => "power",
            Dimension::Flux => "power flux",
            Dimension::Time => "time",
            Dimension::Energy => "energy",
            Dimension::Area => "area",
            Dimension::Pressure => "pressure",
            Dimension::Temperature => "temperature",
            Dimension::Speed => "speed",
            Dimension::Density => "density",
            Dimension::Angle => "angle",
            Dimension::Attenuation => "attenuation coefficient",
            Dimension::Conductivity => "thermal conductivity",
            Dimension::SpecificHeat => "specific heat capacity",
            Dimension::Stiffness => "stiffness",
            Dimension::Mass => "mass",
            Dimension::Viscosity => "viscosity",
        };
        f.write_str(s)
    }
}

const UNITS: &[(&str, Dimension, f64)] = &[
    ("nm", Dimension::Length, 1e-9),
    ("um", Dimension::Length, 1e-6),
    ("μm", Dimension::Length, 1e-6),
    ("mm", Dimension::Length, 1e-3),
    ("m", Dimension::Length, 1.0),
    ("Hz", Dimension::Frequency, 1.0),
    ("kHz", Dimension::Frequency, 1e3),
    ("MHz", Dimension::Frequency, 1e6),
    ("GHz", Dimension::Frequency, 1e9),
    ("pW", Dimension::Power, 1e-12),
    ("nW", Dimension::Power, 1e-9),
    ("uW", Dimension::Power, 1e-6),
    ("W", Dimension::Power, 1.0),
    ("pW/um2", Dimension::Flux, 1.0),
    ("pW/μm²", Dimension::Flux, 1.0),
    ("W/m2", Dimension::Flux, 1.0),
    ("W/m²", Dimension::Flux, 1.0),
    ("s", Dimension::Time, 1.0),
    ("ms", Dimension::Time, 1e-3),
    ("us", Dimension::Time, 1e-6),
    ("μs", Dimension::Time, 1e-6),
    ("ns", Dimension::Time, 1e-9),
    ("J", Dimension::Energy, 1.0),
    ("zJ", Dimension::Energy, 1e-21),
    ("um2", Dimension::Area, 1e-12),
    ("μm²", Dimension::Area, 1e-12),
    ("m2", Dimension::Area, 1.0),
    ("Pa", Dimension::Pressure, 1.0),
    ("kPa", Dimension::Pressure, 1e3),
    ("MPa", Dimension::Pressure, 1e6),
    ("K", Dimension::Temperature, 1.0),
    ("m/s", Dimension::Speed, 1.0),
    ("mm/s", Dimension::Speed, 1e-3),
    ("um/s", Dimension::Speed, 1e-6),
    ("kg/m3", Dimension::Density, 1.0),
    ("rad", Dimension::Angle, 1.0),
    ("deg", Dimension::Angle, std::f64::consts::PI / 180.0),
    ("Np/m", Dimension::Attenuation, 1.0),
    ("W/m/K", Dimension::Conductivity, 1.0),
    ("J/kg/K", Dimension::SpecificHeat, 1.0),
    ("N/m", Dimension::Stiffness, 1.0),
    ("kg", Dimension::Mass, 1.0),
    ("g", Dimension::Mass, 1e-3),
    ("pg", Dimension::Mass, 1e-15),
    ("Pa s", Dimension::Viscosity, 1.0),
    ("Pa*s", Dimension::Viscosity, 1.0),
    ("mPa s", Dimension::Viscosity, 1e-3),
];

/// Error from [`parse_quantity`].
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum UnitError {
    #[error("`{0}` has no unit suffix; physical values must carry one (e.g. `{0}{1}`)")]
    Unitless(String, &'static str),
    #[error("unknown unit `{unit}` in `{text}`")]
    UnknownUnit { text: String, unit: String },
    #[error("`{text}` is a {found}, expected a {expected}")]
    WrongDimension {
        text: String,
        found: Dimension,
        expected: Dimension,
    },
    #[error("`{0}` is not a number")]
    BadNumber(String),
}

pub fn example_unit(dim: Dimension) -> &'static str {
    match dim {
        Dimension::Length => "um",
        Dimension::Frequency => "MHz",
        Dimension::Power => "pW",
        Dimension::Flux => "pW/um2",
        Dimension::Time => "ms",
        Dimension::Energy => "zJ",
        Dimension::Area => "um2",
        Dimension::Pressure => "Pa",
        Dimension::Temperature => "K",
        Dimension::Speed => "mm/s",
        Dimension::Density => "kg/m3",
        Dimension::Angle => "deg",
        Dimension::Attenuation => "Np/m",
        Dimension::Conductivity => "W/m/K",
        Dimension::SpecificHeat => "J/kg/K",
        Dimension::Stiffness => "N/m",
        Dimension::Mass => "kg",
        Dimension::Viscosity => "Pa s",
    }
}

/// Parse a unit-suffixed value such as `5um`, `100 MHz` or `1e-4pW` into SI.
pub fn parse_quantity(text: &str, expected: Dimension) -> Result<f64, UnitError> {
    let t = text.trim();
    let split = t
        .char_indices()
        .find(|&(i, ch)| {
            !(ch.is_ascii_digit()
                || ch == '.'
                || ch == '+'
                || ch == '-'
                || ((ch == 'e' || ch == 'E')
                    && t[i + 1..]
                        .chars()
                        .next()
                        .is_some_and(|n| n.is_ascii_digit() || n == '-' || n == '+')))
        })
        .map(|(i, _)| i)
        .unwrap_or(t.len());
    let (num, unit) = (t[..split].trim(), t[split..].trim());
    let value: f64 = num
        .parse()
        .map_err(|_| UnitError::BadNumber(t.to_string()))?;
    if unit.is_empty() {
        return Err(UnitError::Unitless(t.to_string(), example_unit(expected)));
    }
    let &(_, dim, scale) = UNITS
        .iter()
        .find(|(u, _, _)| *u == unit)
        .ok_or_else(|| UnitError::UnknownUnit {
            text: t.to_string(),
            unit: unit.to_string(),
        })?;
    if dim != expected {
        return Err(UnitError::WrongDimension {
            text: t.to_string(),
            found: dim,
            expected,
        });
    }
    // Dividing by an exact power of ten keeps values like `5um` exact.
    let inv = 1.0 / scale;
    if scale < 1.0 && (inv - inv.round()).abs() < 1e-9 * inv {
        Ok(value / inv.round())
    } else {
        Ok(value * scale)
    }
}

/// Format a float in scientific notation with nine significant digits.
pub fn sci(x: f64) -> String {
    format!("{x:.8e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_suffixed_values() {
        assert_eq!(parse_quantity("5um", Dimension::Length).unwrap(), 5e-6);
        assert_eq!(parse_quantity("100 MHz", Dimension::Frequency).unwrap(), 1e8);
        let p = parse_quantity("1e-4pW", Dimension::Power).unwrap();
        assert!((p - 1e-16).abs() < 1e-30);
        assert_eq!(parse_quantity("-3.5e2 Pa", Dimension::Pressure).unwrap(), -350.0);
        assert_eq!(parse_quantity("1mm/s", Dimension::Speed).unwrap(), 1e-3);
    }

    #[test]
    fn rejects_unitless_and_mismatched() {
        assert!(matches!(
            parse_quantity("100", Dimension::Power),
            Err(UnitError::Unitless(..))
        ));
        assert!(matches!(
            parse_quantity("100pW", Dimension::Length),
            Err(UnitError::WrongDimension { .. })
        ));
        assert!(matches!(
            parse_quantity("3 furlongs", Dimension::Length),
            Err(UnitError::UnknownUnit { .. })
        ));
        assert!(matches!(
            parse_quantity("abc", Dimension::Length),
            Err(UnitError::BadNumber(_))
        ));
    }

    #[test]
    fn sci_has_nine_significant_digits() {
        assert_eq!(sci(1234.5678912), "1.23456789e3");
        assert_eq!(sci(0.0), "0.00000000e0");
    }
}
