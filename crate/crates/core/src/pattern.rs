//! Sampled flux-versus-direction patterns.

use crate::error::{Error, Result};
use crate::units::{sci, MICRON, PW_PER_UM2};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PatternSource {
    Analytic,
    Fem,
    Disk,
}

/// Time-averaged radial flux on a sphere of radius `radius`, sampled in the
/// polar angle. Axisymmetric about `θ = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectivityPattern {
    pub radius: f64,
    /// Polar angles in radians, strictly increasing.
    pub theta: Vec<f64>,
    /// W/m².
    pub flux: Vec<f64>,
    pub source: PatternSource,
}

/// Result of looking up a pattern at an arbitrary angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lookup {
    pub flux: f64,
    /// The angle fell between samples and was linearly interpolated.
    pub interpolated: bool,
}

impl DirectivityPattern {
    pub fn new(radius: f64, theta: Vec<f64>, flux: Vec<f64>, source: PatternSource) -> Result<Self> {
        if theta.len() != flux.len() || theta.len() < 2 {
            return Err(Error::validation("pattern needs at least two matching theta/flux samples"));
        }
        if theta.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::validation("pattern angles must be strictly increasing"));
        }
        if theta[0] < 0.0 || *theta.last().unwrap() > PI + 1e-12 {
            return Err(Error::validation("pattern angles must lie in [0, π]"));
        }
        Ok(Self { radius, theta, flux, source })
    }

    /// A direction-independent pattern on `[0, π]`.
    pub fn uniform(radius: f64, flux: f64, samples: usize) -> Self {
        let theta = uniform_angles(samples.max(2), PI);
        let flux = vec![flux; theta.len()];
        Self { radius, theta, flux, source: PatternSource::Analytic }
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.flux.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.flux.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Angle of the largest sample.
    pub fn argmax(&self) -> f64 {
        let i = self
            .flux
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        self.theta[i]
    }

    pub fn max_over_min(&self) -> f64 {
        self.max() / self.min()
    }

    /// Power through the sampled band of the sphere, `∫ flux 2πR² sinθ dθ`
    /// (trapezoidal in θ).
    pub fn total_power(&self) -> f64 {
        let r2 = self.radius * self.radius;
        self.theta
            .windows(2)
            .zip(self.flux.windows(2))
            .map(|(t, f)| {
                0.5 * (f[0] * t[0].sin() + f[1] * t[1].sin()) * (t[1] - t[0])
            })
            .sum::<f64>()
            * 2.0
            * PI
            * r2
    }

    /// Flux averaged over all directions, `P/(4πR²)`.
    pub fn directional_average(&self) -> f64 {
        self.total_power() / (4.0 * PI * self.radius * self.radius)
    }

    /// Linear interpolation; angles outside the sampled range clamp to the
    /// nearest end and are flagged.
    pub fn lookup(&self, theta: f64) -> Lookup {
        let n = self.theta.len();
        if theta <= self.theta[0] {
            return Lookup { flux: self.flux[0], interpolated: theta < self.theta[0] };
        }
        if theta >= self.theta[n - 1] {
            return Lookup { flux: self.flux[n - 1], interpolated: theta > self.theta[n - 1] };
        }
        let j = self.theta.partition_point(|&t| t <= theta);
        let (t0, t1) = (self.theta[j - 1], self.theta[j]);
        if t0 == theta {
            return Lookup { flux: self.flux[j - 1], interpolated: false };
        }
        let s = (theta - t0) / (t1 - t0);
        Lookup { flux: self.flux[j - 1] * (1.0 - s) + self.flux[j] * s, interpolated: true }
    }

    /// Flux at `θ` by linear interpolation.
    pub fn at(&self, theta: f64) -> f64 {
        self.lookup(theta).flux
    }

    /// Pattern with `θ → π − θ`.
    pub fn mirrored(&self) -> Self {
        let theta = self.theta.iter().rev().map(|t| PI - t).collect();
        let flux = self.flux.iter().rev().copied().collect();
        Self { theta, flux, ..self.clone() }
    }

    /// `theta_deg,flux_pW_per_um2` CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta_deg,flux_pW_per_um2\n");
        for (t, f) in self.theta.iter().zip(&self.flux) {
            out.push_str(&format!("{},{}\n", sci(t.to_degrees()), sci(f / PW_PER_UM2)));
        }
        out
    }

    pub fn radius_um(&self) -> f64 {
        self.radius / MICRON
    }
}

/// `n` equally spaced angles on `[0, max]`.
pub fn uniform_angles(n: usize, max: f64) -> Vec<f64> {
    (0..n).map(|j| max * j as f64 / (n - 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn uniform_pattern_integrates_to_sphere_area() {
        let p = DirectivityPattern::uniform(2.0, 3.0, 721);
        assert_relative_eq!(p.total_power(), 3.0 * 4.0 * PI * 4.0, max_relative = 1e-5);
        assert_relative_eq!(p.directional_average(), 3.0, max_relative = 1e-5);
        assert_eq!(p.max_over_min(), 1.0);
    }

    #[test]
    fn lookup_interpolates_and_flags() {
        let p = DirectivityPattern::new(1.0, vec![0.0, 1.0, 2.0], vec![0.0, 10.0, 20.0], PatternSource::Fem)
            .unwrap();
        assert_eq!(p.lookup(0.5), Lookup { flux: 5.0, interpolated: true });
        assert_eq!(p.lookup(1.0), Lookup { flux: 10.0, interpolated: false });
        assert!(p.lookup(3.0).interpolated);
        assert_eq!(p.argmax(), 2.0);
        let m = p.mirrored();
        assert_relative_eq!(m.at(PI - 0.5), 5.0, max_relative = 1e-12);
    }

    #[test]
    fn validates_samples() {
        assert!(DirectivityPattern::new(1.0, vec![0.0, 0.0], vec![1.0, 1.0], PatternSource::Fem).is_err());
        assert!(DirectivityPattern::new(1.0, vec![0.0], vec![1.0], PatternSource::Fem).is_err());
        assert!(DirectivityPattern::new(1.0, vec![0.0, 4.0], vec![1.0, 1.0], PatternSource::Fem).is_err());
    }

    #[test]
    fn csv_header_and_rows() {
        let p = DirectivityPattern::uniform(1e-4, 1e-3, 3);
        let csv = p.to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "theta_deg,flux_pW_per_um2");
        assert_eq!(lines[2], "9.00000000e1,1.00000000e-3");
    }
}
