//! Axisymmetric mode expansion of a nonuniformly oscillating sphere and the
//! surface motion that maximizes the flux delivered to one point.
//!
//! Mode `l` has surface radial velocity `u_l P_l(cos θ)` and outgoing field
//! `p ∝ h_l(kr) P_l(cos θ)`. Viscosity enters through the complex `k` and the
//! radial normal-stress terms, as for the uniform sphere.

use crate::error::{Error, Result};
use crate::medium::Medium;
use crate::par::Exec;
use crate::pattern::{uniform_angles, DirectivityPattern, PatternSource};
use crate::special::{golden_max, legendre, Maximum, SphericalHankel};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Hard cap on the expansion order.
pub const MAX_ORDER: usize = 200;

/// Per-unit-amplitude quantities of one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeTransfer {
    pub l: usize,
    /// Surface pressure per unit surface velocity (Pa·s/m).
    pub surface_pressure: Complex64,
    /// Normal stress at the surface per unit surface velocity.
    pub surface_stress: Complex64,
    /// Time-averaged input power per `|u_l|²`.
    pub power_coefficient: f64,
    /// Pressure at the evaluation distance on the axis, per unit `u_l`.
    pub pressure_transfer: Complex64,
    /// Radial velocity at the evaluation distance on the axis, per unit `u_l`.
    pub velocity_transfer: Complex64,
}

/// Default truncation order for a sphere of radius `a` at wave number `k`.
pub fn default_order(a: f64, k: Complex64) -> usize {
    ((2.0 * k.norm() * a).ceil() as usize + 12).min(MAX_ORDER)
}

/// Mode transfers for `l = 0..=l_max` with the field evaluated at `d ≥ a`.
pub fn sphere_mode_transfers(
    a: f64,
    f: f64,
    medium: &Medium,
    d: f64,
    l_max: usize,
) -> Result<Vec<ModeTransfer>> {
    if !(a > 0.0) {
        return Err(Error::validation(format!("sphere radius must be positive, got {a}")));
    }
    if d < a {
        return Err(Error::domain(format!("evaluation distance {d:e} m inside the sphere")));
    }
    let wv = medium.wave_vector(f)?;
    let visc = medium.viscosity(f)?;
    let (k, omega, i) = (wv.k, wv.omega, Complex64::i());
    let c2rho = medium.speed * medium.speed * medium.density;
    let ha = SphericalHankel::new(l_max, k * a);
    let hd = SphericalHankel::new(l_max, k * d);
    let growth = hd.ratios_over(&ha, l_max);
    let mut out = Vec::with_capacity(l_max + 1);
    for l in 0..=l_max {
        let la = ha.log_derivative(l);
        let pa = i * c2rho * k / (omega * la);
        let dvdr = k * ha.second_over_first(l);
        let div = i * omega * pa / c2rho;
        let stress = pa - 2.0 * visc.shear * dvdr - (visc.bulk - 2.0 / 3.0 * visc.shear) * div;
        let power_coefficient = 0.5 * 4.0 * PI * a * a / (2 * l + 1) as f64 * stress.re;
        let pressure_transfer = pa * growth[l];
        let velocity_transfer = growth[l] * hd.log_derivative(l) / la;
        let finite = [pa, stress, pressure_transfer, velocity_transfer]
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite());
        if !finite || !(power_coefficient > 0.0) {
            return Err(Error::Truncation {
                order: l,
                reason: format!(
                    "spherical Hankel recurrence lost precision at |k|a = {:.3e}",
                    (k * a).norm()
                ),
            });
        }
        out.push(ModeTransfer {
            l,
            surface_pressure: pa,
            surface_stress: stress,
            power_coefficient,
            pressure_transfer,
            velocity_transfer,
        });
    }
    Ok(out)
}

/// Complex surface-velocity amplitude of each mode, `l = 0..=l_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeWeights {
    pub weights: Vec<Complex64>,
}

impl ModeWeights {
    pub fn l_max(&self) -> usize {
        self.weights.len().saturating_sub(1)
    }

    pub fn mode_powers(&self, transfers: &[ModeTransfer]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(transfers)
            .map(|(u, t)| t.power_coefficient * u.norm_sqr())
            .collect()
    }

    /// Total input power; the modes are orthogonal over the surface.
    pub fn input_power(&self, transfers: &[ModeTransfer]) -> f64 {
        self.mode_powers(transfers).iter().sum()
    }

    /// On-axis `(p, v_r)` at the transfer distance.
    pub fn axis_field(&self, transfers: &[ModeTransfer]) -> (Complex64, Complex64) {
        self.weights.iter().zip(transfers).fold(
            (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
            |(p, v), (u, t)| (p + u * t.pressure_transfer, v + u * t.velocity_transfer),
        )
    }

    /// `(p, v_r)` at polar angle `θ` on the transfer sphere.
    pub fn field(&self, transfers: &[ModeTransfer], theta: f64) -> (Complex64, Complex64) {
        let pl = legendre(self.l_max(), theta.cos());
        self.weights.iter().zip(transfers).zip(&pl).fold(
            (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
            |(p, v), ((u, t), &w)| (p + u * t.pressure_transfer * w, v + u * t.velocity_transfer * w),
        )
    }

    pub fn flux(&self, transfers: &[ModeTransfer], theta: f64) -> f64 {
        let (p, v) = self.field(transfers, theta);
        0.5 * (p * v.conj()).re
    }

    /// Pressure on the sphere surface at polar angle `θ`.
    pub fn surface_pressure(&self, transfers: &[ModeTransfer], theta: f64) -> Complex64 {
        let pl = legendre(self.l_max(), theta.cos());
        self.weights
            .iter()
            .zip(transfers)
            .zip(&pl)
            .map(|((u, t), &w)| u * t.surface_pressure * w)
            .sum()
    }

    /// Power crossing the whole transfer sphere.
    pub fn radiated_power(&self, transfers: &[ModeTransfer], d: f64) -> f64 {
        self.weights
            .iter()
            .zip(transfers)
            .map(|(u, t)| {
                0.5 * u.norm_sqr() * (t.pressure_transfer * t.velocity_transfer.conj()).re * 4.0 * PI * d * d
                    / (2 * t.l + 1) as f64
            })
            .sum()
    }
}

fn dot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    // xᴴy
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Weights of total input power `power` maximizing the on-axis flux.
///
/// In power-normalized coordinates `w_l = √c_l u_l` the flux is the Hermitian
/// form `½ wᴴHw` with `H = ½(βαᴴ + αβᴴ)` of rank two, so the optimum is the
/// top eigenvector of a 2×2 problem in `span{α, β}`. When pressure and
/// velocity transfers are proportional (far field) this reduces to
/// `u_l ∝ conj(transfer_l)/c_l`.
pub fn optimal_weights(transfers: &[ModeTransfer], power: f64) -> (ModeWeights, f64) {
    let sq: Vec<f64> = transfers.iter().map(|t| t.power_coefficient.sqrt()).collect();
    let alpha: Vec<Complex64> =
        transfers.iter().zip(&sq).map(|(t, s)| (t.pressure_transfer / s).conj()).collect();
    let beta: Vec<Complex64> =
        transfers.iter().zip(&sq).map(|(t, s)| (t.velocity_transfer / s).conj()).collect();
    let apply = |x: &[Complex64]| -> Vec<Complex64> {
        let ax = dot(&alpha, x);
        let bx = dot(&beta, x);
        alpha.iter().zip(&beta).map(|(a, b)| 0.5 * (b * ax + a * bx)).collect()
    };
    let na = norm(&alpha);
    let e1: Vec<Complex64> = alpha.iter().map(|a| a / na).collect();
    let proj = dot(&e1, &beta);
    let r: Vec<Complex64> = beta.iter().zip(&e1).map(|(b, e)| b - proj * e).collect();
    let nr = norm(&r);
    let w: Vec<Complex64> = if nr <= 1e-13 * norm(&beta) {
        e1
    } else {
        let e2: Vec<Complex64> = r.iter().map(|x| x / nr).collect();
        let he1 = apply(&e1);
        let he2 = apply(&e2);
        let m11 = dot(&e1, &he1).re;
        let m22 = dot(&e2, &he2).re;
        let m12 = dot(&e1, &he2);
        let lam = 0.5 * (m11 + m22) + (0.25 * (m11 - m22).powi(2) + m12.norm_sqr()).sqrt();
        let (c1, c2) = if m12.norm() > 1e-300 {
            (m12, Complex64::new(lam - m11, 0.0))
        } else if m11 >= m22 {
            (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
        } else {
            (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
        };
        e1.iter().zip(&e2).map(|(a, b)| c1 * a + c2 * b).collect()
    };
    let scale = power.sqrt() / norm(&w);
    let mut weights: Vec<Complex64> = w.iter().zip(&sq).map(|(x, s)| x * scale / s).collect();
    // Fix the global phase so the on-axis pressure is real and positive.
    let p: Complex64 = weights.iter().zip(transfers).map(|(u, t)| u * t.pressure_transfer).sum();
    if p.norm() > 0.0 {
        let ph = p.conj() / p.norm();
        weights.iter_mut().for_each(|u| *u *= ph);
    }
    let weights = ModeWeights { weights };
    let (p, v) = weights.axis_field(transfers);
    let flux = 0.5 * (p * v.conj()).re;
    (weights, flux)
}

/// Options for [`optimize_directed_beam`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BeamOptions {
    /// Fixed truncation order. `None` starts from [`default_order`] and
    /// extends until the optimized flux changes by less than 1%.
    pub l_max: Option<usize>,
}

/// Optimized directed beam toward `(d, θ = 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedBeam {
    pub radius: f64,
    pub frequency: f64,
    pub distance: f64,
    pub input_power: f64,
    pub weights: ModeWeights,
    pub transfers: Vec<ModeTransfer>,
    /// W/m².
    pub directed_flux: f64,
    /// Flux at `d` from uniform pulsation at the same input power.
    pub uniform_flux: f64,
    pub enhancement: f64,
    /// The truncation order was raised past the default.
    pub extended: bool,
}

impl DirectedBeam {
    pub fn l_max(&self) -> usize {
        self.weights.l_max()
    }

    /// Flux on the sphere of radius `d` over `θ ∈ [0, π]`.
    pub fn pattern(&self, samples: usize) -> DirectivityPattern {
        let theta = uniform_angles(samples.max(2), PI);
        let flux = theta.iter().map(|&t| self.weights.flux(&self.transfers, t)).collect();
        DirectivityPattern { radius: self.distance, theta, flux, source: PatternSource::Analytic }
    }

    /// Largest surface pressure magnitude over a fine angular scan.
    pub fn max_surface_pressure(&self) -> f64 {
        uniform_angles(721, PI)
            .into_iter()
            .map(|t| self.weights.surface_pressure(&self.transfers, t).norm())
            .fold(0.0, f64::max)
    }
}

fn uniform_flux(transfers: &[ModeTransfer], power: f64) -> f64 {
    let t = &transfers[0];
    0.5 * power * (t.pressure_transfer * t.velocity_transfer.conj()).re / t.power_coefficient
}

/// Maximize the on-axis flux at distance `d` for input power `power`.
pub fn optimize_directed_beam(
    a: f64,
    f: f64,
    medium: &Medium,
    power: f64,
    d: f64,
    options: BeamOptions,
) -> Result<DirectedBeam> {
    if !(power > 0.0) {
        return Err(Error::validation(format!("input power must be positive, got {power}")));
    }
    if d <= a {
        return Err(Error::domain("target distance must exceed the sphere radius"));
    }
    let build = |l_max: usize, transfers: Vec<ModeTransfer>, extended: bool| {
        let (weights, directed_flux) = optimal_weights(&transfers, power);
        let uniform_flux = uniform_flux(&transfers, power);
        DirectedBeam {
            radius: a,
            frequency: f,
            distance: d,
            input_power: power,
            enhancement: directed_flux / uniform_flux,
            weights,
            transfers,
            directed_flux,
            uniform_flux,
            extended: extended && l_max > 0,
        }
    };
    if let Some(l_max) = options.l_max {
        let t = sphere_mode_transfers(a, f, medium, d, l_max.min(MAX_ORDER))?;
        return Ok(build(l_max, t, false));
    }
    let k = medium.wave_vector(f)?.k;
    let mut l = default_order(a, k);
    let mut transfers = sphere_mode_transfers(a, f, medium, d, l)?;
    let mut flux = optimal_weights(&transfers, power).1;
    let mut extended = false;
    loop {
        if l >= MAX_ORDER {
            return Err(Error::Truncation {
                order: l,
                reason: "directed flux did not converge within the order cap".into(),
            });
        }
        let next = (l + (l / 4).max(4)).min(MAX_ORDER);
        let t = sphere_mode_transfers(a, f, medium, d, next)?;
        let f_next = optimal_weights(&t, power).1;
        let converged = (f_next - flux).abs() <= 0.01 * f_next.abs();
        if !converged {
            extended = true;
        }
        transfers = t;
        flux = f_next;
        l = next;
        if converged {
            break;
        }
    }
    if extended {
        log::info!("mode expansion extended to l = {l} for a = {a:e} m, f = {f:e} Hz");
    }
    Ok(build(l, transfers, extended))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectedPoint {
    pub frequency: f64,
    pub uniform_flux: f64,
    pub directed_flux: f64,
    pub enhancement: f64,
    pub l_max: usize,
}

/// Uniform and directed flux at `d` across a frequency sweep.
pub fn directed_sweep(
    a: f64,
    medium: &Medium,
    power: f64,
    d: f64,
    frequencies: &[f64],
    exec: Exec,
) -> Result<Vec<DirectedPoint>> {
    exec.map(frequencies, |&f| {
        optimize_directed_beam(a, f, medium, power, d, BeamOptions::default()).map(|b| DirectedPoint {
            frequency: f,
            uniform_flux: b.uniform_flux,
            directed_flux: b.directed_flux,
            enhancement: b.enhancement,
            l_max: b.l_max(),
        })
    })
    .into_iter()
    .collect()
}

/// Frequency maximizing the directed flux at `d`, searched over log frequency.
pub fn directed_peak(a: f64, medium: &Medium, power: f64, d: f64, range: (f64, f64)) -> Result<Maximum> {
    let (lo, hi) = range;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::domain(format!("invalid frequency bracket [{lo}, {hi}]")));
    }
    let n = 40;
    let grid: Vec<f64> = (0..=n).map(|j| lo.ln() + (hi / lo).ln() * j as f64 / n as f64).collect();
    let eval = |lf: f64| {
        optimize_directed_beam(a, lf.exp(), medium, power, d, BeamOptions::default()).map(|b| b.directed_flux)
    };
    let vals: Vec<f64> = Exec::default()
        .map(&grid, |&lf| eval(lf))
        .into_iter()
        .collect::<Result<_>>()?;
    let best = vals
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(y.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut m = golden_max(
        |lf| eval(lf).unwrap_or(f64::NAN),
        grid[best.saturating_sub(1)],
        grid[(best + 1).min(n)],
        1e-4,
    );
    m.x = m.x.exp();
    m.at_boundary = best == 0 || best == n;
    Ok(m)
}
