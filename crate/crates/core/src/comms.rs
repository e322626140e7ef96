//! Link budgets under thermal noise, relay chains, passage bit counts and
//! drift detection from a directional pattern.

use crate::directivity::{optimize_directed_beam, BeamOptions};
use crate::error::{Error, Result};
use crate::medium::Medium;
use crate::par::Exec;
use crate::pattern::DirectivityPattern;
use crate::sphere::calibrated_field;
use crate::units::{BOLTZMANN, PICOWATT};
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

/// The worked bandwidth used when none is given.
pub const DEFAULT_BANDWIDTH: f64 = 200e3;
/// Bisection tolerance of [`min_detectable_drift`], radians.
pub const DRIFT_TOLERANCE: f64 = 1e-4;
/// `10 log10(e)`: decibels per neper of power ratio.
pub const DB_PER_NEPER: f64 = 4.342_944_819_032_518;

pub fn thermal_energy(temperature: f64) -> f64 {
    BOLTZMANN * temperature
}

/// `k_B T Δf` in W.
pub fn thermal_noise(temperature: f64, bandwidth: f64) -> Result<f64> {
    if !(temperature > 0.0) || bandwidth < 0.0 {
        return Err(Error::domain("temperature must be positive and bandwidth nonnegative"));
    }
    Ok(thermal_energy(temperature) * bandwidth)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Capacity {
    /// Shannon capacity at the given bandwidth, bits/s.
    pub capacity: f64,
    /// `P/(ln2 k_B T)`, the large-bandwidth limit.
    pub wideband_limit: f64,
}

pub fn capacity(p_signal: f64, temperature: f64, bandwidth: f64) -> Result<Capacity> {
    if !(p_signal >= 0.0) {
        return Err(Error::domain(format!("signal power must be nonnegative, got {p_signal}")));
    }
    if !(temperature > 0.0 && bandwidth > 0.0) {
        return Err(Error::domain("temperature and bandwidth must be positive"));
    }
    let kt = thermal_energy(temperature);
    let snr = p_signal / (kt * bandwidth);
    Ok(Capacity {
        capacity: bandwidth * snr.ln_1p() / LN_2,
        wideband_limit: p_signal / (LN_2 * kt),
    })
}

/// Energy quantum registered as one bit, `k_B T e^SNR`.
pub fn threshold_energy(temperature: f64, snr: f64) -> Result<f64> {
    if !(snr >= 0.0) {
        return Err(Error::domain(format!("SNR threshold must be nonnegative, got {snr}")));
    }
    Ok(thermal_energy(temperature) * snr.exp())
}

pub fn threshold_rate(p_signal: f64, energy: f64) -> f64 {
    p_signal / energy
}

pub fn energy_per_bit(p_transmit: f64, rate: f64) -> Result<f64> {
    if !(rate > 0.0) {
        return Err(Error::domain(format!("bit rate must be positive, got {rate}")));
    }
    Ok(p_transmit / rate)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Receiver {
    /// m².
    pub area: f64,
    /// Hz.
    pub bandwidth: f64,
    /// K.
    pub temperature: f64,
    /// Natural-log SNR of the threshold detector.
    pub snr_threshold: f64,
}

impl Default for Receiver {
    fn default() -> Self {
        Self { area: 1e-12, bandwidth: DEFAULT_BANDWIDTH, temperature: 310.0, snr_threshold: 2.0 }
    }
}

impl Receiver {
    pub fn validate(&self) -> Result<()> {
        if !(self.area > 0.0 && self.bandwidth > 0.0 && self.temperature > 0.0) {
            return Err(Error::validation("receiver area, bandwidth and temperature must be positive"));
        }
        if !(self.snr_threshold >= 0.0) {
            return Err(Error::validation("receiver SNR threshold must be nonnegative"));
        }
        Ok(())
    }

    /// Warn when the band is not small against the carrier.
    pub fn check_carrier(&self, carrier: f64) -> bool {
        let narrow = self.bandwidth <= carrier / 10.0;
        if !narrow {
            log::warn!(
                "receiver bandwidth {:e} Hz exceeds a tenth of the {:e} Hz carrier",
                self.bandwidth,
                carrier
            );
        }
        narrow
    }
}

/// How a transmitter's flux at the receiver is obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadiatorModel {
    /// Pulsating sphere.
    SphereUniform { radius: f64 },
    /// Mode-weighted sphere with its beam optimized toward the receiver.
    SphereDirected { radius: f64 },
    /// A sampled pattern (e.g. from the ringset solver) computed at
    /// `reference_power` input; flux scales linearly with power.
    Pattern { pattern: DirectivityPattern, reference_power: f64, extent: f64 },
}

impl RadiatorModel {
    pub fn extent(&self) -> f64 {
        match self {
            RadiatorModel::SphereUniform { radius } | RadiatorModel::SphereDirected { radius } => *radius,
            RadiatorModel::Pattern { extent, .. } => *extent,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transmitter {
    pub model: RadiatorModel,
    /// Input power, W.
    pub power: f64,
    /// Carrier, Hz.
    pub frequency: f64,
    pub medium: Medium,
}

/// Flux at the receiver plus flags on how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxEstimate {
    pub flux: f64,
    /// The direction fell between pattern samples.
    pub interpolated: bool,
    /// The distance differs from the pattern radius and spherical spreading
    /// with attenuation was applied.
    pub extrapolated: bool,
}

impl Transmitter {
    pub fn flux(&self, distance: f64, direction: f64) -> Result<FluxEstimate> {
        if !(distance > self.model.extent()) {
            return Err(Error::domain(format!(
                "link distance {distance:e} m must exceed the transmitter extent {:e} m",
                self.model.extent()
            )));
        }
        if !(self.power >= 0.0) {
            return Err(Error::validation("transmit power must be nonnegative"));
        }
        let exact = |flux| FluxEstimate { flux, interpolated: false, extrapolated: false };
        if self.power == 0.0 {
            return Ok(exact(0.0));
        }
        match &self.model {
            RadiatorModel::SphereUniform { radius } => {
                let field = calibrated_field(*radius, self.frequency, &self.medium, self.power)?;
                Ok(exact(field.flux(distance)?))
            }
            RadiatorModel::SphereDirected { radius } => {
                let beam = optimize_directed_beam(
                    *radius,
                    self.frequency,
                    &self.medium,
                    self.power,
                    distance,
                    BeamOptions::default(),
                )?;
                let flux = if direction == 0.0 {
                    beam.directed_flux
                } else {
                    beam.weights.flux(&beam.transfers, direction)
                };
                Ok(exact(flux))
            }
            RadiatorModel::Pattern { pattern, reference_power, .. } => {
                let lookup = pattern.lookup(direction);
                let mut flux = lookup.flux * self.power / reference_power;
                let extrapolated = (distance - pattern.radius).abs() > 1e-9 * pattern.radius;
                if extrapolated {
                    let alpha = self.medium.alpha(self.frequency)?;
                    flux *= (pattern.radius / distance).powi(2) * (-2.0 * alpha * (distance - pattern.radius)).exp();
                }
                Ok(FluxEstimate { flux, interpolated: lookup.interpolated, extrapolated })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub distance: f64,
    pub flux: f64,
    pub p_transmit: f64,
    pub p_signal: f64,
    pub p_noise: f64,
    /// `ln(P_signal/P_noise)`.
    pub snr_nats: f64,
    pub capacity: f64,
    pub wideband_limit: f64,
    pub threshold_rate: f64,
    /// Transmit power over the threshold-detector rate.
    pub energy_per_bit: f64,
    pub latency: f64,
    pub interpolated: bool,
    pub extrapolated: bool,
}

/// JSON form of a [`LinkBudget`] in display units.
#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkReport {
    pub p_signal_pW: f64,
    pub p_noise_pW: f64,
    pub snr_nats: f64,
    pub snr_dB: f64,
    pub capacity_bps: f64,
    pub wideband_limit_bps: f64,
    pub threshold_rate_bps: f64,
    pub energy_per_bit_J: f64,
    pub latency_s: f64,
}

impl LinkBudget {
    pub fn snr_db(&self) -> f64 {
        self.snr_nats * DB_PER_NEPER
    }

    pub fn report(&self) -> LinkReport {
        LinkReport {
            p_signal_pW: self.p_signal / PICOWATT,
            p_noise_pW: self.p_noise / PICOWATT,
            snr_nats: self.snr_nats,
            snr_dB: self.snr_db(),
            capacity_bps: self.capacity,
            wideband_limit_bps: self.wideband_limit,
            threshold_rate_bps: self.threshold_rate,
            energy_per_bit_J: self.energy_per_bit,
            latency_s: self.latency,
        }
    }
}

/// Budget for a received flux, without a radiator model.
pub fn budget_from_flux(
    flux: f64,
    p_transmit: f64,
    distance: f64,
    speed: f64,
    receiver: &Receiver,
) -> Result<LinkBudget> {
    receiver.validate()?;
    let p_signal = flux * receiver.area;
    let p_noise = thermal_noise(receiver.temperature, receiver.bandwidth)?;
    let cap = capacity(p_signal, receiver.temperature, receiver.bandwidth)?;
    let e = threshold_energy(receiver.temperature, receiver.snr_threshold)?;
    let rate = threshold_rate(p_signal, e);
    let energy_per_bit = if rate > 0.0 { p_transmit / rate } else { f64::INFINITY };
    Ok(LinkBudget {
        distance,
        flux,
        p_transmit,
        p_signal,
        p_noise,
        snr_nats: (p_signal / p_noise).ln(),
        capacity: cap.capacity,
        wideband_limit: cap.wideband_limit,
        threshold_rate: rate,
        energy_per_bit,
        latency: distance / speed,
        interpolated: false,
        extrapolated: false,
    })
}

pub fn evaluate_link(tx: &Transmitter, distance: f64, direction: f64, receiver: &Receiver) -> Result<LinkBudget> {
    receiver.validate()?;
    receiver.check_carrier(tx.frequency);
    let est = tx.flux(distance, direction)?;
    let mut b = budget_from_flux(est.flux, tx.power, distance, tx.medium.speed, receiver)?;
    b.interpolated = est.interpolated;
    b.extrapolated = est.extrapolated;
    Ok(b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelayNode {
    /// m.
    pub position: [f64; 3],
    pub power: f64,
    pub frequency: f64,
    pub model: RadiatorModel,
}

/// A chain of nodes, each transmitting to the next. Beams are steered along
/// the hop so every hop is evaluated at `θ = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelayChain {
    pub nodes: Vec<RelayNode>,
    pub medium: Medium,
    /// All hops transmit at once, so adjacent hops need distinct bands.
    pub concurrent: bool,
}

impl RelayChain {
    /// `hops` equal hops of length `spacing` along z, all nodes sharing a
    /// model and power, with carriers alternating between `base` and
    /// `base + offset`.
    pub fn uniform_line(
        hops: usize,
        spacing: f64,
        power: f64,
        base: f64,
        offset: f64,
        model: RadiatorModel,
        medium: Medium,
    ) -> Self {
        let nodes = (0..=hops)
            .map(|j| RelayNode {
                position: [0.0, 0.0, j as f64 * spacing],
                power,
                frequency: if j % 2 == 0 { base } else { base + offset },
                model: model.clone(),
            })
            .collect();
        Self { nodes, medium, concurrent: true }
    }

    pub fn hop_count(&self) -> usize {
        self.nodes.len().saturating_sub(1)
    }

    pub fn hop_distance(&self, hop: usize) -> f64 {
        let (a, b) = (self.nodes[hop].position, self.nodes[hop + 1].position);
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
    }

    pub fn validate(&self, receiver: &Receiver) -> Result<()> {
        if self.nodes.len() < 2 {
            return Err(Error::validation("a relay chain needs at least two nodes"));
        }
        if self.concurrent {
            for hop in 1..self.hop_count() {
                let (f0, f1) = (self.nodes[hop - 1].frequency, self.nodes[hop].frequency);
                if (f0 - f1).abs() < 2.0 * receiver.bandwidth {
                    return Err(Error::validation(format!(
                        "adjacent concurrent hops {} and {} use carriers {f0:e} and {f1:e} Hz, \
                         closer than twice the receiver bandwidth",
                        hop - 1,
                        hop
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelayBudget {
    pub hops: Vec<LinkBudget>,
    /// Minimum hop capacity, bits/s.
    pub capacity: f64,
    /// Minimum hop threshold-detector rate, bits/s.
    pub threshold_rate: f64,
    /// Index of the hop limiting the capacity.
    pub bottleneck: usize,
    pub distance: f64,
    pub latency: f64,
    pub total_power: f64,
}

pub fn evaluate_relay(chain: &RelayChain, receiver: &Receiver, exec: Exec) -> Result<RelayBudget> {
    receiver.validate()?;
    chain.validate(receiver)?;
    let hops: Vec<LinkBudget> = exec
        .map_range(chain.hop_count(), |h| {
            let node = &chain.nodes[h];
            let tx = Transmitter {
                model: node.model.clone(),
                power: node.power,
                frequency: node.frequency,
                medium: chain.medium.clone(),
            };
            evaluate_link(&tx, chain.hop_distance(h), 0.0, receiver)
        })
        .into_iter()
        .collect::<Result<_>>()?;
    let bottleneck = hops
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.capacity.total_cmp(&b.1.capacity))
        .map(|(i, _)| i)
        .unwrap_or(0);
    Ok(RelayBudget {
        capacity: hops[bottleneck].capacity,
        threshold_rate: hops.iter().map(|h| h.threshold_rate).fold(f64::INFINITY, f64::min),
        bottleneck,
        distance: hops.iter().map(|h| h.distance).sum(),
        latency: hops.iter().map(|h| h.latency).sum(),
        total_power: chain.nodes[..chain.hop_count()].iter().map(|n| n.power).sum(),
        hops,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Passage {
    /// s.
    pub dwell: f64,
    pub bits: f64,
    pub bits_per_robot: f64,
}

/// Bits exchanged while a robot drifts past a hub with the flow.
pub fn passage_bits(speed: f64, radius: f64, rate: f64, robots: usize) -> Result<Passage> {
    if !(speed > 0.0) {
        return Err(Error::domain("flow speed must be positive"));
    }
    if robots == 0 {
        return Err(Error::domain("robot count must be at least one"));
    }
    let dwell = 2.0 * radius / speed;
    let bits = rate * dwell;
    Ok(Passage { dwell, bits, bits_per_robot: bits / robots as f64 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Drift {
    Detectable {
        /// rad.
        dtheta: f64,
        /// m.
        dx: f64,
    },
    /// The required flux change exceeds what the pattern offers.
    NotDetectable { required: f64, available: f64 },
}

impl Drift {
    pub fn dx(&self) -> Option<f64> {
        match self {
            Drift::Detectable { dx, .. } => Some(*dx),
            Drift::NotDetectable { .. } => None,
        }
    }
}

/// Smallest angular offset whose flux drop at the pattern radius delivers
/// one threshold quantum `energy` to a receiver of `area` within `dt`.
pub fn min_detectable_drift(pattern: &DirectivityPattern, area: f64, dt: f64, energy: f64) -> Result<Drift> {
    if !(area > 0.0 && dt > 0.0 && energy > 0.0) {
        return Err(Error::domain("receiver area, integration time and threshold energy must be positive"));
    }
    if pattern.theta[0] != 0.0 {
        return Err(Error::domain("pattern must be sampled from θ = 0"));
    }
    let f0 = pattern.flux[0];
    if pattern.max() > f0 * (1.0 + 1e-9) {
        log::warn!(
            "pattern maximum lies at {:.2}° rather than on the axis",
            pattern.argmax().to_degrees()
        );
    }
    let required = energy / (area * dt);
    let drop = |t: f64| f0 - pattern.at(t);
    // First sample interval whose far end reaches the required drop; the
    // interpolant is monotone within it.
    let Some(j) = (1..pattern.len()).find(|&j| f0 - pattern.flux[j] >= required) else {
        return Ok(Drift::NotDetectable { required, available: f0 - pattern.min() });
    };
    let (mut lo, mut hi) = (pattern.theta[j - 1], pattern.theta[j]);
    while hi - lo > DRIFT_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if drop(mid) >= required { hi = mid } else { lo = mid }
    }
    let dtheta = 0.5 * (lo + hi);
    Ok(Drift::Detectable { dtheta, dx: pattern.radius * dtheta.sin() })
}
