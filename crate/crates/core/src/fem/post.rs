//! Field evaluation off the nodes, flux patterns and validation helpers.

use super::mesh::AxiMesh;
use super::solve::FieldSolution;
use super::{MeshParams, PhaseProfile, RingsetGeometry, RingsetScenario, SolutionCache};
use crate::error::{Error, Result};
use crate::medium::Medium;
use crate::par::Exec;
use crate::pattern::{uniform_angles, DirectivityPattern, PatternSource};
use crate::sphere::calibrated_field;
use crate::units::{sci, MICRON};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Number of polar samples in FEM flux patterns (0.5° spacing).
pub const PATTERN_SAMPLES: usize = 361;

/// Bucket grid for point location.
pub struct Locator {
    z0: f64,
    cell: f64,
    nr: usize,
    nz: usize,
    buckets: Vec<Vec<u32>>,
}

impl Locator {
    pub fn new(mesh: &AxiMesh) -> Self {
        let r = mesh.domain_radius;
        let cell = (r / 128.0).max(1e-9);
        let nr = (r / cell).ceil() as usize + 1;
        let nz = (2.0 * r / cell).ceil() as usize + 1;
        let z0 = -r;
        let mut buckets = vec![Vec::new(); nr * nz];
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let p = tri.map(|i| mesh.nodes[i]);
            let (rmin, rmax) = (p.iter().map(|q| q[0]).fold(f64::INFINITY, f64::min), p.iter().map(|q| q[0]).fold(f64::NEG_INFINITY, f64::max));
            let (zmin, zmax) = (p.iter().map(|q| q[1]).fold(f64::INFINITY, f64::min), p.iter().map(|q| q[1]).fold(f64::NEG_INFINITY, f64::max));
            let i0 = ((rmin / cell).floor().max(0.0) as usize).min(nr - 1);
            let i1 = ((rmax / cell).floor().max(0.0) as usize).min(nr - 1);
            let j0 = (((zmin - z0) / cell).floor().max(0.0) as usize).min(nz - 1);
            let j1 = (((zmax - z0) / cell).floor().max(0.0) as usize).min(nz - 1);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    buckets[j * nr + i].push(t as u32);
                }
            }
        }
        Self { z0, cell, nr, nz, buckets }
    }

    /// Element containing `(ρ, z)` and the barycentric coordinates there.
    pub fn locate(&self, mesh: &AxiMesh, rho: f64, z: f64) -> Option<(usize, [f64; 3])> {
        let i = (rho / self.cell).floor();
        let j = ((z - self.z0) / self.cell).floor();
        if i < 0.0 || j < 0.0 || i as usize >= self.nr || j as usize >= self.nz {
            return None;
        }
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for &t in &self.buckets[j as usize * self.nr + i as usize] {
            let t = t as usize;
            let l = barycentric(mesh, t, rho, z);
            let worst = l.iter().copied().fold(f64::INFINITY, f64::min);
            if worst >= 0.0 {
                return Some((t, l));
            }
            if best.is_none_or(|b| worst > b.2) {
                best = Some((t, l, worst));
            }
        }
        // Accept points on an edge within round-off.
        best.filter(|b| b.2 > -1e-9).map(|b| (b.0, b.1))
    }
}

fn barycentric(mesh: &AxiMesh, t: usize, rho: f64, z: f64) -> [f64; 3] {
    let [a, b, c] = mesh.triangles[t].map(|i| mesh.nodes[i]);
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    let l1 = ((rho - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (z - a[1])) / det;
    let l2 = ((b[0] - a[0]) * (z - a[1]) - (rho - a[0]) * (b[1] - a[1])) / det;
    [1.0 - l1 - l2, l1, l2]
}

/// Flux pattern of a travelling-phase actuation with its directivity figures.
#[derive(Debug, Clone)]
pub struct TravelingPattern {
    pub pattern: DirectivityPattern,
    /// Flux along the travelling direction over the directional average.
    pub forward_over_average: f64,
    pub forward_over_backward: f64,
    pub max_pressure: f64,
    pub input_power: f64,
}

/// FEM pulsating sphere compared with the closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereCheck {
    pub fem_flux: f64,
    pub exact_flux: f64,
    pub flux_error: f64,
    pub fem_max_pressure: f64,
    pub exact_max_pressure: f64,
    pub pressure_error: f64,
    pub nodes: usize,
}

/// Evaluator for `p` and `∇p` anywhere in the mesh.
pub struct FieldSampler<'a> {
    sol: &'a FieldSolution,
    locator: Locator,
    gradient: Vec<[Complex64; 2]>,
}

impl<'a> FieldSampler<'a> {
    pub fn new(sol: &'a FieldSolution) -> Self {
        let mesh = &sol.mesh;
        // Area-weighted average of the element gradients at each node.
        let mut g = vec![[Complex64::new(0.0, 0.0); 2]; mesh.node_count()];
        let mut w = vec![0.0; mesh.node_count()];
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let p = tri.map(|i| mesh.nodes[i]);
            let a = mesh.area(t);
            let v = tri.map(|i| sol.pressure[i]);
            let gr = (v[0] * (p[1][1] - p[2][1]) + v[1] * (p[2][1] - p[0][1]) + v[2] * (p[0][1] - p[1][1])) / (2.0 * a);
            let gz = (v[0] * (p[2][0] - p[1][0]) + v[1] * (p[0][0] - p[2][0]) + v[2] * (p[1][0] - p[0][0])) / (2.0 * a);
            for &i in tri {
                g[i][0] += gr * a;
                g[i][1] += gz * a;
                w[i] += a;
            }
        }
        for (gi, wi) in g.iter_mut().zip(&w) {
            gi[0] /= *wi;
            gi[1] /= *wi;
        }
        Self { sol, locator: Locator::new(mesh), gradient: g }
    }

    fn locate(&self, rho: f64, z: f64) -> Result<(usize, [f64; 3])> {
        self.locator
            .locate(&self.sol.mesh, rho, z)
            .ok_or_else(|| Error::domain(format!("point ({rho:e}, {z:e}) m is outside the fluid mesh")))
    }

    pub fn pressure(&self, rho: f64, z: f64) -> Result<Complex64> {
        let (t, l) = self.locate(rho, z)?;
        let tri = self.sol.mesh.triangles[t];
        Ok((0..3).map(|k| self.sol.pressure[tri[k]] * l[k]).sum())
    }

    /// `(p, ∂p/∂ρ, ∂p/∂z)` with the recovered gradient.
    pub fn field(&self, rho: f64, z: f64) -> Result<(Complex64, Complex64, Complex64)> {
        let (t, l) = self.locate(rho, z)?;
        let tri = self.sol.mesh.triangles[t];
        let mut out = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for k in 0..3 {
            out.0 += self.sol.pressure[tri[k]] * l[k];
            out.1 += self.gradient[tri[k]][0] * l[k];
            out.2 += self.gradient[tri[k]][1] * l[k];
        }
        Ok(out)
    }

    /// Time-averaged radial flux on the sphere `|x| = R` at polar angle `θ`.
    pub fn radial_flux(&self, radius: f64, theta: f64) -> Result<f64> {
        let (s, c) = theta.sin_cos();
        let (p, gr, gz) = self.field(radius * s.max(0.0), radius * c)?;
        let sc = &self.sol.scenario;
        let k2 = self.sol.wave.k * self.sol.wave.k;
        let factor = -Complex64::i() * self.sol.wave.omega / (sc.medium.speed * sc.medium.speed * k2 * sc.medium.density);
        let v = factor * (gr * s + gz * c);
        Ok(0.5 * (p * v.conj()).re)
    }
}

impl FieldSolution {
    pub fn sampler(&self) -> FieldSampler<'_> {
        FieldSampler::new(self)
    }

    /// Flux versus polar angle on the sphere of radius `radius`.
    pub fn flux_pattern(&self, radius: f64, samples: usize) -> Result<DirectivityPattern> {
        let extent = self.scenario.obstacle.extent();
        if !(radius > extent && radius < self.mesh.domain_radius) {
            return Err(Error::domain(format!(
                "evaluation radius {radius:e} m must lie between the obstacle ({extent:e} m) and the domain boundary ({:e} m)",
                self.mesh.domain_radius
            )));
        }
        let s = self.sampler();
        let theta = uniform_angles(samples.max(2), PI);
        let flux = theta.iter().map(|&t| s.radial_flux(radius, t)).collect::<Result<Vec<_>>>()?;
        DirectivityPattern::new(radius, theta, flux, PatternSource::Fem)
    }

    /// `r_um,z_um,re_p_Pa,im_p_Pa` for nodes within `window` of the origin.
    pub fn snapshot_csv(&self, window: Option<f64>) -> String {
        let mut out = String::from("r_um,z_um,re_p_Pa,im_p_Pa\n");
        for (x, p) in self.mesh.nodes.iter().zip(&self.pressure) {
            if window.is_some_and(|w| x[0].hypot(x[1]) > w) {
                continue;
            }
            out.push_str(&format!("{},{},{},{}\n", sci(x[0] / MICRON), sci(x[1] / MICRON), sci(p.re), sci(p.im)));
        }
        out
    }
}

fn solve_with(sc: &RingsetScenario, exec: Exec, cache: Option<&SolutionCache>) -> Result<FieldSolution> {
    match cache {
        Some(c) => c.solve(sc, exec),
        None => FieldSolution::solve(sc, exec),
    }
}

/// Solve the ringset with travelling-phase outer actuation and summarize the
/// pattern at `radius`.
#[allow(clippy::too_many_arguments)]
pub fn traveling_phase_pattern(
    geom: RingsetGeometry,
    frequency: f64,
    medium: Medium,
    sign: i8,
    mesh: MeshParams,
    radius: f64,
    exec: Exec,
    cache: Option<&SolutionCache>,
) -> Result<TravelingPattern> {
    let mut sc = RingsetScenario::ringset(frequency, medium).with_phase(PhaseProfile::Traveling { sign });
    sc.obstacle = super::Obstacle::Ringset(geom);
    sc.mesh = mesh;
    let sol = solve_with(&sc, exec, cache)?;
    let pattern = sol.flux_pattern(radius, PATTERN_SAMPLES)?;
    let (fwd, back) = if sign > 0 {
        (pattern.flux[0], *pattern.flux.last().unwrap())
    } else {
        (*pattern.flux.last().unwrap(), pattern.flux[0])
    };
    Ok(TravelingPattern {
        forward_over_average: fwd / pattern.directional_average(),
        forward_over_backward: fwd / back,
        max_pressure: sol.max_pressure(),
        input_power: sol.input_power,
        pattern,
    })
}

/// Solve a uniformly pulsating sphere with the FEM and compare the average
/// flux at `distance` and the maximum pressure with the closed form.
pub fn verify_against_sphere(
    radius: f64,
    frequency: f64,
    medium: Medium,
    mesh: MeshParams,
    distance: f64,
    exec: Exec,
    cache: Option<&SolutionCache>,
) -> Result<SphereCheck> {
    let mut sc = RingsetScenario::sphere(radius, frequency, medium.clone());
    sc.mesh = mesh;
    let target = sc.target_power.unwrap();
    let sol = solve_with(&sc, exec, cache)?;
    let fem_flux = sol.flux_pattern(distance, PATTERN_SAMPLES)?.directional_average();
    let exact = calibrated_field(radius, frequency, &medium, target)?;
    let exact_flux = exact.flux(distance)?;
    let exact_max_pressure = exact.max_pressure();
    let fem_max_pressure = sol.max_pressure();
    Ok(SphereCheck {
        fem_flux,
        exact_flux,
        flux_error: (fem_flux - exact_flux).abs() / exact_flux,
        fem_max_pressure,
        exact_max_pressure,
        pressure_error: (fem_max_pressure - exact_max_pressure).abs() / exact_max_pressure,
        nodes: sol.mesh.node_count(),
    })
}
