//! Fields of several pulsating spheres combined on a grid.
//!
//! Intensity is reported as the plane-wave equivalent `|p|²/(2ρc)`. For a
//! single emitter in the far field it equals the radial flux; for crossing
//! beams it measures the local energy density without cancellation between
//! velocity directions.

use crate::error::{Error, Result};
use crate::medium::Medium;
use crate::par::Exec;
use crate::sphere::SphereField;
use crate::units::{sci, MICRON, PW_PER_UM2};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Emitter {
    /// m
    pub position: [f64; 3],
    pub radius: f64,
    /// Complex oscillation amplitude: `|ε| e^{iφ}`.
    pub amplitude: Complex64,
    pub frequency: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coherence {
    Coherent,
    Incoherent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmitterSet {
    pub emitters: Vec<Emitter>,
    pub coherence: Coherence,
    pub medium: Medium,
}

fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

impl EmitterSet {
    pub fn new(emitters: Vec<Emitter>, coherence: Coherence, medium: Medium) -> Result<Self> {
        if emitters.is_empty() {
            return Err(Error::validation("emitter set is empty"));
        }
        for (i, a) in emitters.iter().enumerate() {
            if !(a.radius > 0.0) {
                return Err(Error::validation(format!("emitter {i} has nonpositive radius")));
            }
            medium.wave_vector(a.frequency)?;
            for (j, b) in emitters.iter().enumerate().skip(i + 1) {
                if distance(&a.position, &b.position) <= a.radius + b.radius {
                    return Err(Error::validation(format!("emitters {i} and {j} overlap")));
                }
                if coherence == Coherence::Coherent && a.frequency != b.frequency {
                    return Err(Error::validation(format!(
                        "coherent emitters {i} and {j} have different frequencies"
                    )));
                }
            }
        }
        Ok(Self { emitters, coherence, medium })
    }
}

/// Superposed field on a set of points.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityMap {
    pub points: Vec<[f64; 3]>,
    /// `None` where the point lies inside an emitter.
    pub pressure: Vec<Option<Complex64>>,
    /// W/m², `None` where excluded.
    pub intensity: Vec<Option<f64>>,
}

impl IntensityMap {
    pub fn excluded(&self) -> usize {
        self.intensity.iter().filter(|x| x.is_none()).count()
    }

    /// `x_um,z_um,intensity_pW_per_um2` CSV; excluded points are skipped.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x_um,z_um,intensity_pW_per_um2\n");
        for (p, i) in self.points.iter().zip(&self.intensity) {
            if let Some(i) = i {
                out.push_str(&format!(
                    "{},{},{}\n",
                    sci(p[0] / MICRON),
                    sci(p[2] / MICRON),
                    sci(i / PW_PER_UM2)
                ));
            }
        }
        out
    }
}

/// Regular grid in the `y = 0` plane, row-major in `z`.
pub fn grid_xz(x: (f64, f64), z: (f64, f64), nx: usize, nz: usize) -> Vec<[f64; 3]> {
    let step = |lo: f64, hi: f64, n: usize, j: usize| {
        if n <= 1 {
            lo
        } else {
            lo + (hi - lo) * j as f64 / (n - 1) as f64
        }
    };
    (0..nz)
        .flat_map(|iz| (0..nx).map(move |ix| [step(x.0, x.1, nx, ix), 0.0, step(z.0, z.1, nz, iz)]))
        .collect()
}

/// Combine the emitter fields at each point.
pub fn superpose(set: &EmitterSet, points: &[[f64; 3]], exec: Exec) -> Result<IntensityMap> {
    let fields: Vec<SphereField> = set
        .emitters
        .iter()
        .map(|e| SphereField::new(e.radius, 1.0, &set.medium, e.frequency))
        .collect::<Result<_>>()?;
    let z0 = 2.0 * set.medium.density * set.medium.speed;
    let eval = |pt: &[f64; 3]| -> (Option<Complex64>, Option<f64>) {
        let mut sum = Complex64::new(0.0, 0.0);
        let mut incoherent = 0.0;
        for (e, f) in set.emitters.iter().zip(&fields) {
            let r = distance(pt, &e.position);
            match f.pressure(r) {
                Ok(p) => {
                    let p = p * e.amplitude;
                    sum += p;
                    incoherent += p.norm_sqr() / z0;
                }
                Err(_) => return (None, None),
            }
        }
        let intensity = match set.coherence {
            Coherence::Coherent => sum.norm_sqr() / z0,
            Coherence::Incoherent => incoherent,
        };
        (Some(sum), Some(intensity))
    };
    let (pressure, intensity): (Vec<_>, Vec<_>) = exec.map(points, eval).into_iter().unzip();
    let map = IntensityMap { points: points.to_vec(), pressure, intensity };
    if map.excluded() > 0 {
        log::warn!("{} grid points lie inside an emitter and were excluded", map.excluded());
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn emitter(x: f64, amp: Complex64) -> Emitter {
        Emitter { position: [x, 0.0, 0.0], radius: 5e-6, amplitude: amp, frequency: 1e7 }
    }

    #[test]
    fn singleton_reproduces_sphere_field() {
        let e = emitter(0.0, Complex64::new(2e-6, 0.0));
        let set = EmitterSet::new(vec![e], Coherence::Coherent, Medium::low()).unwrap();
        let pts = grid_xz((-50e-6, 50e-6), (-50e-6, 50e-6), 11, 11);
        let map = superpose(&set, &pts, Exec::Sequential).unwrap();
        let s = SphereField::new(5e-6, 2e-6, &Medium::low(), 1e7).unwrap();
        for (pt, p) in pts.iter().zip(&map.pressure) {
            let r = distance(pt, &[0.0; 3]);
            match p {
                Some(p) => assert!((p - s.pressure(r).unwrap()).norm() <= 1e-12 * p.norm()),
                None => assert!(r < 5e-6),
            }
        }
        assert_eq!(map.excluded(), 1);
    }

    #[test]
    fn coherent_pair_quadruples_at_equidistant_point() {
        let amp = Complex64::new(1e-6, 0.0);
        let set = EmitterSet::new(
            vec![emitter(-20e-6, amp), emitter(20e-6, amp)],
            Coherence::Coherent,
            Medium::water(),
        )
        .unwrap();
        let single = EmitterSet::new(vec![emitter(-20e-6, amp)], Coherence::Coherent, Medium::water()).unwrap();
        let pt = [[0.0, 0.0, 37e-6]];
        let two = superpose(&set, &pt, Exec::Sequential).unwrap().intensity[0].unwrap();
        let one = superpose(&single, &pt, Exec::Sequential).unwrap().intensity[0].unwrap();
        assert_relative_eq!(two, 4.0 * one, max_relative = 1e-12);
        let inc = EmitterSet { coherence: Coherence::Incoherent, ..set };
        let two_inc = superpose(&inc, &pt, Exec::Sequential).unwrap().intensity[0].unwrap();
        assert_relative_eq!(two_inc, 2.0 * one, max_relative = 1e-12);
    }

    #[test]
    fn validation() {
        let amp = Complex64::new(1e-6, 0.0);
        assert!(EmitterSet::new(vec![emitter(0.0, amp), emitter(8e-6, amp)], Coherence::Coherent, Medium::low())
            .is_err());
        let mut b = emitter(50e-6, amp);
        b.frequency = 2e7;
        assert!(EmitterSet::new(vec![emitter(0.0, amp), b], Coherence::Coherent, Medium::low()).is_err());
        assert!(EmitterSet::new(vec![emitter(0.0, amp), b], Coherence::Incoherent, Medium::low()).is_ok());
        assert!(EmitterSet::new(vec![], Coherence::Incoherent, Medium::low()).is_err());
    }

    #[test]
    fn strategies_agree_and_csv_skips_excluded() {
        let amp = Complex64::new(1e-6, 0.3e-6);
        let set = EmitterSet::new(
            vec![emitter(-30e-6, amp), emitter(30e-6, amp.conj())],
            Coherence::Coherent,
            Medium::high(),
        )
        .unwrap();
        let pts = grid_xz((-60e-6, 60e-6), (-10e-6, 10e-6), 25, 5);
        let a = superpose(&set, &pts, Exec::Sequential).unwrap();
        let b = superpose(&set, &pts, Exec::Parallel).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_csv().lines().count(), 1 + pts.len() - a.excluded());
    }
}
