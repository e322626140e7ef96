//! Axisymmetric finite-element solution of the Helmholtz equation around a
//! ringset of robots lining a vessel wall (or, for validation, a sphere).

pub mod cache;
pub mod mesh;
pub mod post;
pub mod solve;

pub use cache::{CacheStatus, SolutionCache, CACHE_DIR_ENV};
pub use mesh::{AxiMesh, BoundarySegment, Face};
pub use post::{traveling_phase_pattern, verify_against_sphere, FieldSampler, SphereCheck, TravelingPattern, PATTERN_SAMPLES};
pub use solve::FieldSolution;

use crate::error::{Error, Result};
use crate::medium::Medium;
use crate::units::{MHZ, MICRON, PICOWATT};
use serde::{Deserialize, Serialize};

/// Cross-section of a ringset: an annular cylinder `R_inner ≤ ρ ≤ R_outer`,
/// `|z| ≤ L/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingsetGeometry {
    pub length: f64,
    pub outer_radius: f64,
    pub inner_radius: f64,
    /// Distance over which the actuation amplitude tapers to zero.
    pub taper: f64,
}

impl Default for RingsetGeometry {
    fn default() -> Self {
        Self { length: 10.0 * MICRON, outer_radius: 4.0 * MICRON, inner_radius: 3.0 * MICRON, taper: 0.1 * MICRON }
    }
}

impl RingsetGeometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.inner_radius > 0.0 && self.inner_radius < self.outer_radius) {
            return Err(Error::validation(format!(
                "ringset radii must satisfy 0 < inner < outer, got inner = {:e} m, outer = {:e} m",
                self.inner_radius, self.outer_radius
            )));
        }
        if !(self.taper >= 0.0 && self.length > 2.0 * self.taper) {
            return Err(Error::validation("ringset length must exceed twice the taper length"));
        }
        if 2.0 * self.taper > self.outer_radius - self.inner_radius {
            log::warn!("taper is longer than half the ringset wall; end actuation never reaches full amplitude");
        }
        Ok(())
    }
}

/// Body around which the field is solved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Obstacle {
    Ringset(RingsetGeometry),
    Sphere { radius: f64 },
}

impl Obstacle {
    pub fn validate(&self) -> Result<()> {
        match self {
            Obstacle::Ringset(g) => g.validate(),
            Obstacle::Sphere { radius } if *radius > 0.0 => Ok(()),
            Obstacle::Sphere { radius } => Err(Error::validation(format!("sphere radius must be positive, got {radius}"))),
        }
    }

    /// Largest distance from the origin to the obstacle.
    pub fn extent(&self) -> f64 {
        match self {
            Obstacle::Ringset(g) => g.outer_radius.hypot(0.5 * g.length),
            Obstacle::Sphere { radius } => *radius,
        }
    }

    /// Length that `ε` is a fraction of.
    pub fn reference_length(&self) -> f64 {
        match self {
            Obstacle::Ringset(g) => g.outer_radius,
            Obstacle::Sphere { radius } => *radius,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceSelector {
    Outer,
    Inner,
    Ends,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PhaseProfile {
    Uniform,
    /// `φ(z) = sign·ωz/c`: a wave travelling along `sign·z`.
    Traveling { sign: i8 },
}

/// Normal surface velocity `v_n = −iω R_ref ε(s) e^{iφ(z)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceActuation {
    pub selector: SurfaceSelector,
    /// Peak amplitude as a fraction of the reference length; rescaled by
    /// power calibration.
    pub epsilon: f64,
    pub phase: PhaseProfile,
}

impl Default for SurfaceActuation {
    fn default() -> Self {
        Self { selector: SurfaceSelector::Outer, epsilon: 1e-6, phase: PhaseProfile::Uniform }
    }
}

impl SurfaceActuation {
    pub fn actuates(&self, face: Face) -> bool {
        match (self.selector, face) {
            (_, Face::Sphere) => true,
            (SurfaceSelector::Outer, Face::Outer) => true,
            (SurfaceSelector::Inner, Face::Inner) => true,
            (SurfaceSelector::Ends, Face::UpperEnd | Face::LowerEnd) => true,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshParams {
    pub domain_radius: f64,
    /// Element size away from the obstacle (further limited by the wavelength).
    pub h_max: f64,
    /// Element size on the obstacle surface.
    pub h_surface: f64,
    /// Growth of the element size with distance from the obstacle.
    pub grading: f64,
    pub elements_per_wavelength: f64,
}

impl Default for MeshParams {
    fn default() -> Self {
        Self {
            domain_radius: 130.0 * MICRON,
            h_max: 0.5 * MICRON,
            h_surface: 0.02 * MICRON,
            grading: 0.25,
            elements_per_wavelength: 30.0,
        }
    }
}

impl MeshParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.domain_radius > 0.0
            && self.h_max > 0.0
            && self.h_surface > 0.0
            && self.grading > 0.0
            && self.elements_per_wavelength > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::validation("mesh parameters must all be positive"))
        }
    }

    /// Same parameters with element sizes scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            h_max: self.h_max * factor,
            h_surface: self.h_surface * factor,
            elements_per_wavelength: self.elements_per_wavelength / factor,
            ..*self
        }
    }
}

/// Everything that determines one field solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingsetScenario {
    pub obstacle: Obstacle,
    pub actuation: SurfaceActuation,
    pub frequency: f64,
    pub medium: Medium,
    /// Time-averaged input power the amplitude is calibrated to; `None`
    /// keeps the given `ε`.
    pub target_power: Option<f64>,
    pub mesh: MeshParams,
}

impl RingsetScenario {
    /// Default ringset with outer-surface actuation calibrated to 100 pW.
    pub fn ringset(frequency: f64, medium: Medium) -> Self {
        Self {
            obstacle: Obstacle::Ringset(RingsetGeometry::default()),
            actuation: SurfaceActuation::default(),
            frequency,
            medium,
            target_power: Some(100.0 * PICOWATT),
            mesh: MeshParams::default(),
        }
    }

    /// Uniformly pulsating sphere of radius `a`.
    pub fn sphere(radius: f64, frequency: f64, medium: Medium) -> Self {
        Self { obstacle: Obstacle::Sphere { radius }, ..Self::ringset(frequency, medium) }
    }

    pub fn with_phase(mut self, phase: PhaseProfile) -> Self {
        self.actuation.phase = phase;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.obstacle.validate()?;
        self.mesh.validate()?;
        self.medium.validate()?;
        self.medium.wave_vector(self.frequency)?;
        if let Some(p) = self.target_power {
            if !(p > 0.0 && p.is_finite()) {
                return Err(Error::validation(format!("target power must be positive, got {p}")));
            }
        }
        if !(self.actuation.epsilon > 0.0) {
            return Err(Error::validation("actuation amplitude must be positive"));
        }
        if !(1e-7..=1e-5).contains(&self.actuation.epsilon) && self.target_power.is_none() {
            log::warn!("actuation amplitude {:e} outside the nominal 1e-7..1e-5 range", self.actuation.epsilon);
        }
        if let PhaseProfile::Traveling { sign } = self.actuation.phase {
            if sign != 1 && sign != -1 {
                return Err(Error::validation("travelling phase sign must be +1 or -1"));
            }
        }
        if self.mesh.domain_radius <= 2.0 * self.obstacle.extent() {
            return Err(Error::validation("domain radius must exceed twice the obstacle extent"));
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        self.medium.speed / self.frequency
    }

    pub fn build_mesh(&self) -> Result<AxiMesh> {
        AxiMesh::build(&self.obstacle, &self.mesh, self.wavelength())
    }

    pub fn description(&self) -> String {
        let kind = match self.obstacle {
            Obstacle::Ringset(_) => "ringset",
            Obstacle::Sphere { .. } => "sphere",
        };
        format!("{kind} at {:.3} MHz", self.frequency / MHZ)
    }
}
