//! Assembly and direct solution of the r-weighted Helmholtz weak form
//!
//! `∫(∇p·∇q − k²pq) ρ dA − ∮_arc β p q ρ ds = ∮_act g q ρ ds`
//!
//! with P1 triangles, `β = ik − 1/R` on the outer arc and the Neumann
//! data `g = ∂p/∂n_out` from the imposed normal surface velocity.

use super::mesh::{AxiMesh, Face};
use super::{Obstacle, PhaseProfile, RingsetScenario};
use crate::error::{Error, Result};
use crate::medium::WaveVector;
use crate::par::Exec;
use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use num_complex::Complex64;
use std::f64::consts::PI;

const GAUSS3: [(f64, f64); 3] = [
    (0.112_701_665_379_258_3, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.887_298_334_620_741_7, 5.0 / 18.0),
];

/// Maximum accepted relative residual of the linear solve.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;

/// Solved nodal pressure field.
#[derive(Debug, Clone)]
pub struct FieldSolution {
    pub scenario: RingsetScenario,
    pub mesh: AxiMesh,
    /// Complex nodal pressure amplitudes (Pa).
    pub pressure: Vec<Complex64>,
    /// Actuation amplitude after power calibration.
    pub epsilon: f64,
    /// Time-averaged input power (W).
    pub input_power: f64,
    /// Relative residual `‖Ax − b‖/‖b‖` of the unscaled system.
    pub residual: f64,
    pub wave: WaveVector,
    raw: Vec<Complex64>,
}

/// Evaluates the imposed normal velocity along actuated faces.
pub(crate) struct Actuator<'a> {
    scenario: &'a RingsetScenario,
    omega: f64,
    epsilon: f64,
}

fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

impl<'a> Actuator<'a> {
    pub(crate) fn new(scenario: &'a RingsetScenario, epsilon: f64) -> Self {
        Self { scenario, omega: 2.0 * PI * scenario.frequency, epsilon }
    }

    /// Normal velocity into the fluid at `(ρ, z)` on `face`.
    pub(crate) fn velocity(&self, face: Face, rho: f64, z: f64) -> Complex64 {
        let sc = self.scenario;
        if !sc.actuation.actuates(face) {
            return Complex64::new(0.0, 0.0);
        }
        let profile = match (sc.obstacle, face) {
            (Obstacle::Ringset(g), Face::Outer | Face::Inner) => {
                let d = 0.5 * g.length - z.abs();
                if g.taper > 0.0 { smoothstep(d / g.taper) } else { 1.0 }
            }
            (Obstacle::Ringset(g), Face::UpperEnd | Face::LowerEnd) => {
                let d = (rho - g.inner_radius).min(g.outer_radius - rho);
                if g.taper > 0.0 { smoothstep(d / g.taper) } else { 1.0 }
            }
            _ => 1.0,
        };
        let phase = match sc.actuation.phase {
            PhaseProfile::Uniform => 0.0,
            PhaseProfile::Traveling { sign } => sign as f64 * self.omega * z / sc.medium.speed,
        };
        -Complex64::i() * self.omega * sc.obstacle.reference_length() * self.epsilon * profile
            * Complex64::from_polar(1.0, phase)
    }
}

/// Divergence of the fluid-pointing surface normal.
pub(crate) fn curvature(obstacle: &Obstacle, face: Face, rho: f64) -> f64 {
    match (face, obstacle) {
        (Face::Outer, _) => 1.0 / rho,
        (Face::Inner, _) => -1.0 / rho,
        (Face::Sphere, Obstacle::Sphere { radius }) => 2.0 / radius,
        _ => 0.0,
    }
}

struct System {
    triplets: Vec<Triplet<usize, usize, Complex64>>,
    rhs: Vec<Complex64>,
}

fn element_triplets(mesh: &AxiMesh, t: usize, k2: Complex64) -> [Triplet<usize, usize, Complex64>; 9] {
    let v = mesh.triangles[t];
    let p = v.map(|i| mesh.nodes[i]);
    let area = mesh.area(t);
    let r = p.map(|q| q[0]);
    let rbar = (r[0] + r[1] + r[2]) / 3.0;
    let grad = [
        [p[1][1] - p[2][1], p[2][0] - p[1][0]],
        [p[2][1] - p[0][1], p[0][0] - p[2][0]],
        [p[0][1] - p[1][1], p[1][0] - p[0][0]],
    ];
    let mut out = [Triplet::new(0, 0, Complex64::new(0.0, 0.0)); 9];
    for i in 0..3 {
        for j in 0..3 {
            let kij = (grad[i][0] * grad[j][0] + grad[i][1] * grad[j][1]) / (4.0 * area) * rbar;
            let mij = if i == j {
                area * (r[i] / 10.0 + (rbar * 3.0 - r[i]) / 30.0)
            } else {
                area * ((r[i] + r[j]) / 30.0 + r[3 - i - j] / 60.0)
            };
            out[3 * i + j] = Triplet::new(v[i], v[j], kij - k2 * mij);
        }
    }
    out
}

fn assemble(mesh: &AxiMesh, sc: &RingsetScenario, wave: &WaveVector, epsilon: f64, exec: Exec) -> System {
    let k = wave.k;
    let k2 = k * k;
    let n = mesh.node_count();
    let chunk = 4096;
    let chunks = mesh.element_count().div_ceil(chunk);
    let parts = exec.map_range(chunks, |c| {
        let lo = c * chunk;
        let hi = (lo + chunk).min(mesh.element_count());
        (lo..hi).flat_map(|t| element_triplets(mesh, t, k2)).collect::<Vec<_>>()
    });
    let mut triplets: Vec<_> = parts.into_iter().flatten().collect();

    let beta = Complex64::i() * k - 1.0 / mesh.domain_radius;
    let omega = wave.omega;
    let c2rho = sc.medium.speed * sc.medium.speed * sc.medium.density;
    let act = Actuator::new(sc, epsilon);
    let mut rhs = vec![Complex64::new(0.0, 0.0); n];
    for s in &mesh.boundary {
        let [a, b] = s.nodes;
        let (pa, pb) = (mesh.nodes[a], mesh.nodes[b]);
        let len = mesh.segment_length(s);
        match s.face {
            Face::Arc => {
                let (ra, rb) = (pa[0], pb[0]);
                let m_aa = len * (3.0 * ra + rb) / 12.0;
                let m_ab = len * (ra + rb) / 12.0;
                let m_bb = len * (ra + 3.0 * rb) / 12.0;
                triplets.push(Triplet::new(a, a, -beta * m_aa));
                triplets.push(Triplet::new(a, b, -beta * m_ab));
                triplets.push(Triplet::new(b, a, -beta * m_ab));
                triplets.push(Triplet::new(b, b, -beta * m_bb));
            }
            f if sc.actuation.actuates(f) => {
                for (t, w) in GAUSS3 {
                    let rho = pa[0] + (pb[0] - pa[0]) * t;
                    let z = pa[1] + (pb[1] - pa[1]) * t;
                    let v = act.velocity(f, rho, z);
                    // ∂p/∂n_out = −∂p/∂n_s = −(i c² k² ρ/ω) v_n
                    let g = -Complex64::i() * c2rho * k2 / omega * v;
                    let base = g * w * len * rho;
                    rhs[a] += base * (1.0 - t);
                    rhs[b] += base * t;
                }
            }
            _ => {}
        }
    }
    System { triplets, rhs }
}

fn matvec(triplets: &[Triplet<usize, usize, Complex64>], x: &[Complex64]) -> Vec<Complex64> {
    let mut y = vec![Complex64::new(0.0, 0.0); x.len()];
    for t in triplets {
        y[t.row] += t.val * x[t.col];
    }
    y
}

fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn residual(sys: &System, x: &[Complex64]) -> (Vec<Complex64>, f64) {
    let ax = matvec(&sys.triplets, x);
    let r: Vec<Complex64> = sys.rhs.iter().zip(&ax).map(|(b, y)| b - y).collect();
    let rel = norm(&r) / norm(&sys.rhs);
    (r, rel)
}

fn direct_solve(sys: &System) -> Result<(Vec<Complex64>, f64)> {
    let n = sys.rhs.len();
    let a = SparseColMat::<usize, Complex64>::try_new_from_triplets(n, n, &sys.triplets)
        .map_err(|e| Error::Solver { residual: f64::NAN, reason: format!("matrix assembly: {e:?}") })?;
    let lu = a
        .sp_lu()
        .map_err(|e| Error::Solver { residual: f64::NAN, reason: format!("sparse LU: {e:?}") })?;
    let solve = |rhs: &[Complex64]| -> Vec<Complex64> {
        let b = Mat::<Complex64>::from_fn(n, 1, |i, _| rhs[i]);
        let x = lu.solve(&b);
        (0..n).map(|i| x[(i, 0)]).collect()
    };
    let mut x = solve(&sys.rhs);
    let (mut r, mut rel) = residual(sys, &x);
    for _ in 0..3 {
        if rel <= RESIDUAL_TOLERANCE {
            break;
        }
        let dx = solve(&r);
        x.iter_mut().zip(&dx).for_each(|(a, d)| *a += d);
        (r, rel) = residual(sys, &x);
    }
    if !(rel <= RESIDUAL_TOLERANCE) {
        return Err(Error::Solver { residual: rel, reason: "residual above tolerance after refinement".into() });
    }
    Ok((x, rel))
}

/// Time-averaged power delivered through the actuated surface, including
/// the viscous normal stress.
pub(crate) fn input_power(mesh: &AxiMesh, sc: &RingsetScenario, wave: &WaveVector, p: &[Complex64], epsilon: f64) -> f64 {
    let i = Complex64::i();
    let (k, omega) = (wave.k, wave.omega);
    let k2 = k * k;
    let c2rho = sc.medium.speed * sc.medium.speed * sc.medium.density;
    let visc = sc.medium.viscosity(sc.frequency).expect("scenario validated");
    // T_nn = c1 p − λ κ ∂p/∂n_s − λ Δ_s p with λ = 2iηω/(c²k²ρ)
    let lam = 2.0 * i * visc.shear * omega / (c2rho * k2);
    let c1 = 1.0 - (visc.bulk - 2.0 / 3.0 * visc.shear) * i * omega / c2rho - lam * k2;
    let act = Actuator::new(sc, epsilon);
    let mut total = Complex64::new(0.0, 0.0);
    for s in mesh.boundary.iter().filter(|s| sc.actuation.actuates(s.face)) {
        let [a, b] = s.nodes;
        let (na, nb) = (mesh.nodes[a], mesh.nodes[b]);
        let len = mesh.segment_length(s);
        for (t, w) in GAUSS3 {
            let rho = na[0] + (nb[0] - na[0]) * t;
            let z = na[1] + (nb[1] - na[1]) * t;
            let pp = p[a] * (1.0 - t) + p[b] * t;
            let v = act.velocity(s.face, rho, z);
            let dpdn = i * c2rho * k2 / omega * v;
            let kappa = curvature(&sc.obstacle, s.face, rho);
            total += (c1 * pp - lam * kappa * dpdn) * v.conj() * rho * w * len;
        }
        // −λ∫Δ_s p v̄ ρ ds = λ∫ (dp/ds)(dv̄/ds) ρ ds; v vanishes at the ends of
        // each actuated face (taper) or on the axis (ρ = 0).
        let (va, vb) = (act.velocity(s.face, na[0], na[1]), act.velocity(s.face, nb[0], nb[1]));
        let dp = (p[b] - p[a]) / len;
        let dv = (vb - va) / len;
        total += lam * dp * dv.conj() * 0.5 * (na[0] + nb[0]) * len;
    }
    0.5 * (2.0 * PI * total).re
}

impl FieldSolution {
    /// Build the mesh and solve.
    pub fn solve(scenario: &RingsetScenario, exec: Exec) -> Result<Self> {
        scenario.validate()?;
        let mesh = scenario.build_mesh()?;
        Self::solve_on(scenario, mesh, exec)
    }

    /// Solve on a prebuilt mesh.
    pub fn solve_on(scenario: &RingsetScenario, mesh: AxiMesh, exec: Exec) -> Result<Self> {
        scenario.validate()?;
        let wave = scenario.medium.wave_vector(scenario.frequency)?;
        let h = mesh.max_element_size();
        if scenario.wavelength() / h < scenario.mesh.elements_per_wavelength * (1.0 - 1e-6) {
            return Err(Error::Mesh(format!(
                "mesh too coarse for {:.3e} Hz: {:.1} elements per wavelength",
                scenario.frequency,
                scenario.wavelength() / h
            )));
        }
        let eps0 = scenario.actuation.epsilon;
        let sys = assemble(&mesh, scenario, &wave, eps0, exec);
        let (p, rel) = direct_solve(&sys)?;
        Ok(Self::from_raw(scenario.clone(), mesh, p, rel, wave))
    }

    /// Calibrate a raw solution at the scenario's `ε` to the target power.
    pub(crate) fn from_raw(scenario: RingsetScenario, mesh: AxiMesh, raw: Vec<Complex64>, residual: f64, wave: WaveVector) -> Self {
        let eps0 = scenario.actuation.epsilon;
        let raw_power = input_power(&mesh, &scenario, &wave, &raw, eps0);
        let mut p = raw.clone();
        let (epsilon, input) = match scenario.target_power {
            Some(target) => {
                assert!(raw_power > 0.0, "actuated surface absorbs power: {raw_power:e} W");
                let s = (target / raw_power).sqrt();
                p.iter_mut().for_each(|x| *x *= s);
                (eps0 * s, target)
            }
            None => (eps0, raw_power),
        };
        Self { scenario, mesh, pressure: p, epsilon, input_power: input, residual, wave, raw }
    }

    /// Unscaled nodal field at the scenario's `ε` (the cached quantity).
    pub fn raw_pressure(&self) -> &[Complex64] {
        &self.raw
    }

    /// Largest nodal pressure magnitude (Pa).
    pub fn max_pressure(&self) -> f64 {
        self.pressure.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }

    /// Largest local pressure-work flux `½Re(p v̄)` over actuated segment
    /// midpoints (W/m²). Viscous stress corrections are left out.
    pub fn max_surface_flux(&self) -> f64 {
        let act = Actuator::new(&self.scenario, self.epsilon);
        self.mesh
            .boundary
            .iter()
            .filter(|s| self.scenario.actuation.actuates(s.face))
            .map(|s| {
                let [a, b] = s.nodes;
                let (na, nb) = (self.mesh.nodes[a], self.mesh.nodes[b]);
                let v = act.velocity(s.face, 0.5 * (na[0] + nb[0]), 0.5 * (na[1] + nb[1]));
                let p = 0.5 * (self.pressure[a] + self.pressure[b]);
                0.5 * (p * v.conj()).re
            })
            .fold(0.0, f64::max)
    }

    /// Input power recomputed from the stored field.
    pub fn recomputed_input_power(&self) -> f64 {
        input_power(&self.mesh, &self.scenario, &self.wave, &self.pressure, self.epsilon)
    }
}
