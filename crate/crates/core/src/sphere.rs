//! Uniformly pulsating sphere in a viscous, attenuating medium.
//!
//! The sphere radius oscillates as `a(1 + ε cos ωt)`; the surface velocity
//! amplitude is `−iaωε`. Pressure and velocity are the outgoing closed-form
//! solution of the radial Helmholtz equation with complex `k`.

use crate::error::{Error, Result};
use crate::medium::{Medium, Viscosity, WaveVector};
use crate::par::Exec;
use crate::special::{golden_max, Maximum};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Samples per period for waveform output and averages.
pub const WAVEFORM_SAMPLES: usize = 512;

const EPS_MIN: f64 = 1e-12;
const EPS_MAX: f64 = 1e-2;

/// Configuration of a pulsating sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereRadiator {
    pub radius: f64,
    pub epsilon: f64,
    pub frequency: f64,
    pub medium: Medium,
}

impl SphereRadiator {
    pub fn new(radius: f64, epsilon: f64, frequency: f64, medium: Medium) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::validation(format!("sphere radius must be positive, got {radius}")));
        }
        if !(EPS_MIN..=EPS_MAX).contains(&epsilon) {
            return Err(Error::validation(format!(
                "oscillation amplitude ε = {epsilon:e} outside accepted range [{EPS_MIN:e}, {EPS_MAX:e}]"
            )));
        }
        if !(1e-9..=1e-3).contains(&epsilon) {
            log::warn!("oscillation amplitude ε = {epsilon:e} is outside the nominal 1e-9..1e-3 range");
        }
        medium.validate()?;
        medium.wave_vector(frequency)?;
        Ok(Self { radius, epsilon, frequency, medium })
    }

    /// Build a radiator whose time-averaged input power is `target` (W).
    pub fn calibrated(radius: f64, frequency: f64, medium: Medium, target: f64) -> Result<Self> {
        let epsilon = calibrate_epsilon(radius, frequency, &medium, target)?;
        Self::new(radius, epsilon, frequency, medium)
    }

    pub fn field(&self) -> SphereField {
        SphereField::new(self.radius, self.epsilon, &self.medium, self.frequency)
            .expect("radiator was validated on construction")
    }
}

/// Closed-form field of a pulsating sphere.
#[derive(Debug, Clone, Copy)]
pub struct SphereField {
    radius: f64,
    epsilon: f64,
    wave: WaveVector,
    viscosity: Viscosity,
    speed: f64,
    density: f64,
}

impl SphereField {
    /// Field without the amplitude-range checks of [`SphereRadiator`]; used
    /// for calibration and linear superposition.
    pub fn new(radius: f64, epsilon: f64, medium: &Medium, frequency: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::validation(format!("sphere radius must be positive, got {radius}")));
        }
        Ok(Self {
            radius,
            epsilon,
            wave: medium.wave_vector(frequency)?,
            viscosity: medium.viscosity(frequency)?,
            speed: medium.speed,
            density: medium.density,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn wave(&self) -> &WaveVector {
        &self.wave
    }

    pub fn viscosity(&self) -> &Viscosity {
        &self.viscosity
    }

    fn check_r(&self, r: f64) -> Result<()> {
        if r < self.radius * (1.0 - 1e-12) {
            Err(Error::domain(format!(
                "evaluation radius {r:e} m is inside the sphere (a = {:e} m)",
                self.radius
            )))
        } else {
            Ok(())
        }
    }

    fn pressure_unchecked(&self, r: f64) -> Complex64 {
        let (a, k, i) = (self.radius, self.wave.k, Complex64::i());
        let c2 = self.speed * self.speed;
        a.powi(3) * c2 * k * k * self.density * self.epsilon / (r * (-1.0 + i * a * k))
            * (-i * k * (a - r)).exp()
    }

    fn velocity_coefficient(&self) -> Complex64 {
        let (a, k, i) = (self.radius, self.wave.k, Complex64::i());
        -i * a.powi(3) * self.wave.omega * self.epsilon / (a * k + i) * (-i * k * a).exp()
    }

    fn velocity_unchecked(&self, r: f64) -> Complex64 {
        let (k, i) = (self.wave.k, Complex64::i());
        self.velocity_coefficient() * (k * r + i) / (r * r) * (i * k * r).exp()
    }

    fn velocity_slope_unchecked(&self, r: f64) -> Complex64 {
        let (k, i) = (self.wave.k, Complex64::i());
        self.velocity_coefficient()
            * (i * k * r).exp()
            * (k / (r * r) + (k * r + i) * (i * k / (r * r) - 2.0 / r.powi(3)))
    }

    /// Complex pressure amplitude at distance `r ≥ a` (Pa).
    pub fn pressure(&self, r: f64) -> Result<Complex64> {
        self.check_r(r)?;
        Ok(self.pressure_unchecked(r))
    }

    /// Complex radial velocity amplitude at distance `r ≥ a` (m/s).
    pub fn velocity(&self, r: f64) -> Result<Complex64> {
        self.check_r(r)?;
        Ok(self.velocity_unchecked(r))
    }

    /// `(p(r), v(r))`.
    pub fn field_at(&self, r: f64) -> Result<(Complex64, Complex64)> {
        self.check_r(r)?;
        Ok((self.pressure_unchecked(r), self.velocity_unchecked(r)))
    }

    /// `∂v/∂r` at `r ≥ a`.
    pub fn velocity_slope(&self, r: f64) -> Result<Complex64> {
        self.check_r(r)?;
        Ok(self.velocity_slope_unchecked(r))
    }

    /// Surface velocity `−iaωε`.
    pub fn surface_velocity(&self) -> Complex64 {
        -Complex64::i() * self.radius * self.wave.omega * self.epsilon
    }

    /// Normal stress `T_rr` on the surface.
    pub fn surface_stress(&self) -> Complex64 {
        let a = self.radius;
        let p = self.pressure_unchecked(a);
        let v = self.velocity_unchecked(a);
        let dv = self.velocity_slope_unchecked(a);
        let div = dv + 2.0 * v / a;
        let Viscosity { shear, bulk, .. } = self.viscosity;
        p - 2.0 * shear * dv - (bulk - 2.0 / 3.0 * shear) * div
    }

    /// Radial force amplitude exerted by the sphere on the fluid (N).
    pub fn surface_force(&self) -> Complex64 {
        4.0 * PI * self.radius * self.radius * self.surface_stress()
    }

    /// Time-averaged input power `½ Re(F v*(a))` (W).
    pub fn input_power(&self) -> f64 {
        0.5 * (self.surface_force() * self.surface_velocity().conj()).re
    }

    /// Instantaneous input power at time `t` (s).
    pub fn power_waveform(&self, t: f64) -> f64 {
        let phase = Complex64::from_polar(1.0, -self.wave.omega * t);
        (self.surface_force() * phase).re * (self.surface_velocity() * phase).re
    }

    /// One period of the waveform sampled at [`WAVEFORM_SAMPLES`] points.
    pub fn waveform(&self) -> Vec<WaveformSample> {
        let period = 1.0 / self.wave.frequency;
        let p_a = self.pressure_unchecked(self.radius);
        (0..WAVEFORM_SAMPLES)
            .map(|j| {
                let frac = j as f64 / WAVEFORM_SAMPLES as f64;
                let t = frac * period;
                WaveformSample {
                    t_over_period: frac,
                    power: self.power_waveform(t),
                    surface_pressure: (p_a * Complex64::from_polar(1.0, -self.wave.omega * t)).re,
                }
            })
            .collect()
    }

    /// Time-averaged radial flux at `r` (W/m²).
    pub fn flux(&self, r: f64) -> Result<f64> {
        let (p, v) = self.field_at(r)?;
        Ok(0.5 * (p * v.conj()).re)
    }

    /// `(P_rad, flux)` through the sphere of radius `r`.
    pub fn radiated_power(&self, r: f64) -> Result<(f64, f64)> {
        let flux = self.flux(r)?;
        Ok((4.0 * PI * r * r * flux, flux))
    }

    /// Largest pressure magnitude over `r ≥ a`. For this solution `|p|`
    /// decreases monotonically, which is checked on a log grid.
    pub fn max_pressure(&self) -> f64 {
        let a = self.radius;
        let at_surface = self.pressure_unchecked(a).norm();
        let scanned = (1..=64)
            .map(|j| self.pressure_unchecked(a * 10f64.powf(j as f64 / 32.0)).norm())
            .fold(0.0, f64::max);
        debug_assert!(scanned <= at_surface * (1.0 + 1e-12));
        at_surface.max(scanned)
    }

    pub fn efficiency(&self, d: f64) -> Result<Efficiency> {
        let p_in = self.input_power();
        let (p_a, _) = self.radiated_power(self.radius)?;
        let (p_d, _) = self.radiated_power(d)?;
        Ok(Efficiency {
            acoustic: p_a / p_in,
            transmission: p_d / p_a,
            overall: p_d / p_in,
        })
    }

    /// Summary of forces and powers with radiated quantities at `d`.
    pub fn report(&self, d: f64) -> Result<PowerReport> {
        let eff = self.efficiency(d)?;
        let (p_rad, flux) = self.radiated_power(d)?;
        Ok(PowerReport {
            force: self.surface_force(),
            input_power: self.input_power(),
            distance: d,
            radiated_power: p_rad,
            flux,
            surface_flux: self.flux(self.radius)?,
            max_pressure: self.max_pressure(),
            efficiency: eff,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveformSample {
    pub t_over_period: f64,
    /// W
    pub power: f64,
    /// Pa
    pub surface_pressure: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Efficiency {
    pub acoustic: f64,
    pub transmission: f64,
    pub overall: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerReport {
    pub force: Complex64,
    pub input_power: f64,
    pub distance: f64,
    pub radiated_power: f64,
    pub flux: f64,
    pub surface_flux: f64,
    pub max_pressure: f64,
    pub efficiency: Efficiency,
}

/// Amplitude `ε` giving time-averaged input power `target`, using `P ∝ ε²`.
pub fn calibrate_epsilon(radius: f64, frequency: f64, medium: &Medium, target: f64) -> Result<f64> {
    if !(target > 0.0 && target.is_finite()) {
        return Err(Error::validation(format!("target power must be positive, got {target}")));
    }
    let eps0 = 1e-6;
    let p0 = SphereField::new(radius, eps0, medium, frequency)?.input_power();
    assert!(p0 > 0.0, "input power of a passive sphere must be positive, got {p0}");
    Ok(eps0 * (target / p0).sqrt())
}

/// Field with `ε` calibrated to the input power `target`.
pub fn calibrated_field(radius: f64, frequency: f64, medium: &Medium, target: f64) -> Result<SphereField> {
    let eps = calibrate_epsilon(radius, frequency, medium, target)?;
    SphereField::new(radius, eps, medium, frequency)
}

/// Efficiency decomposition for a sphere radiating to distance `d`.
pub fn efficiency(radius: f64, frequency: f64, medium: &Medium, d: f64) -> Result<Efficiency> {
    SphereField::new(radius, 1e-6, medium, frequency)?.efficiency(d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyPoint {
    pub frequency: f64,
    pub efficiency: Efficiency,
}

/// Efficiency at each frequency of a sweep.
pub fn efficiency_sweep(
    radius: f64,
    medium: &Medium,
    d: f64,
    frequencies: &[f64],
    exec: Exec,
) -> Result<Vec<EfficiencyPoint>> {
    exec.map(frequencies, |&f| {
        efficiency(radius, f, medium, d).map(|efficiency| EfficiencyPoint { frequency: f, efficiency })
    })
    .into_iter()
    .collect()
}

/// Frequency of maximum overall efficiency, by golden-section search over
/// log frequency to 1% relative.
pub fn efficiency_peak(radius: f64, medium: &Medium, d: f64, range: (f64, f64)) -> Result<Maximum> {
    let (lo, hi) = range;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::domain(format!("invalid frequency bracket [{lo}, {hi}]")));
    }
    if d < radius {
        return Err(Error::domain("evaluation distance inside the sphere"));
    }
    // Coarse scan to locate the unimodal bracket before refining.
    let n = 64;
    let (llo, lhi) = (lo.ln(), hi.ln());
    let grid: Vec<f64> = (0..=n).map(|j| llo + (lhi - llo) * j as f64 / n as f64).collect();
    let vals: Vec<f64> = grid
        .iter()
        .map(|&lf| efficiency(radius, lf.exp(), medium, d).map(|e| e.overall))
        .collect::<Result<_>>()?;
    let best = vals
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let a = grid[best.saturating_sub(1)];
    let b = grid[(best + 1).min(n)];
    let mut m = golden_max(
        |lf| efficiency(radius, lf.exp(), medium, d).map(|e| e.overall).unwrap_or(f64::NAN),
        a,
        b,
        1e-4,
    );
    m.x = m.x.exp();
    m.at_boundary = best == 0 || best == n;
    Ok(m)
}
