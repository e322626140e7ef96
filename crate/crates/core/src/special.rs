//! Special functions and small numerical kernels shared by the field solvers.

use num_complex::Complex64;
use std::f64::consts::PI;

/// First positive zero of the Bessel function J₁.
pub const J1_FIRST_ZERO: f64 = 3.831_705_970_207_512_3;

/// J₀(x) and J₁(x) by Miller's backward recurrence, normalized with
/// J₀ + 2ΣJ₂ₖ = 1. Accurate to a few ulps over the range used here.
pub fn bessel_j01(x: f64) -> (f64, f64) {
    let ax = x.abs();
    if ax < 1e-8 {
        return (1.0 - 0.25 * ax * ax, 0.5 * x);
    }
    let start = {
        let n = (ax + 30.0 + 8.0 * ax.sqrt()) as usize;
        n + (n & 1)
    };
    let mut above = 0.0_f64; // J_{n+1}
    let mut cur = 1e-300_f64; // J_n, starting at n = start
    let mut norm = 2.0 * cur;
    let mut j1 = 0.0;
    for n in (1..=start).rev() {
        let below = 2.0 * n as f64 / ax * cur - above;
        above = cur;
        cur = below;
        let m = n - 1;
        if m > 0 && m % 2 == 0 {
            norm += 2.0 * cur;
        }
        if m == 1 {
            j1 = cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            above *= 1e-250;
            norm *= 1e-250;
            j1 *= 1e-250;
        }
    }
    let total = norm + cur;
    let (j0, j1) = (cur / total, j1 / total);
    (j0, if x < 0.0 { -j1 } else { j1 })
}

pub fn bessel_j1(x: f64) -> f64 {
    bessel_j01(x).1
}

/// Spherical Hankel functions of the first kind at complex argument, stored as
/// consecutive ratios so that neither large orders nor small arguments
/// overflow.
///
/// With `e^{-iωt}` time dependence, `h_l^{(1)}(kr)` is the outgoing solution.
#[derive(Debug, Clone)]
pub struct SphericalHankel {
    z: Complex64,
    h0: Complex64,
    /// `ratio[l] = h_l / h_{l-1}` for `l ≥ 1`; `ratio[0]` is unused.
    ratio: Vec<Complex64>,
}

impl SphericalHankel {
    pub fn new(l_max: usize, z: Complex64) -> Self {
        let i = Complex64::i();
        let h0 = -i * (i * z).exp() / z;
        let mut ratio = vec![Complex64::new(0.0, 0.0); l_max + 1];
        if l_max >= 1 {
            // h_1 / h_0 = (1/z) - i ... from h_1 = -e^{iz}(z + i)/z²
            ratio[1] = (z + i) / (i * z);
            for l in 1..l_max {
                // h_{l+1} = (2l+1)/z h_l - h_{l-1}
                ratio[l + 1] = (2 * l + 1) as f64 / z - 1.0 / ratio[l];
            }
        }
        Self { z, h0, ratio }
    }

    pub fn l_max(&self) -> usize {
        self.ratio.len() - 1
    }

    pub fn arg(&self) -> Complex64 {
        self.z
    }

    /// `h_l(z)`; may overflow for `l ≫ |z|`, use the ratio accessors there.
    pub fn value(&self, l: usize) -> Complex64 {
        self.ratio[1..=l].iter().fold(self.h0, |acc, r| acc * r)
    }

    /// `h_l'(z) / h_l(z)`.
    pub fn log_derivative(&self, l: usize) -> Complex64 {
        if l == 0 {
            // h_0' = -h_1
            -self.ratio_or_h1_over_h0()
        } else {
            // h_l' = h_{l-1} - (l+1)/z h_l
            1.0 / self.ratio[l] - (l + 1) as f64 / self.z
        }
    }

    /// `h_l''(z) / h_l'(z)` from the spherical Bessel equation.
    pub fn second_over_first(&self, l: usize) -> Complex64 {
        let z = self.z;
        let ll = (l * (l + 1)) as f64;
        -2.0 / z - (1.0 - ll / (z * z)) / self.log_derivative(l)
    }

    fn ratio_or_h1_over_h0(&self) -> Complex64 {
        let i = Complex64::i();
        (self.z + i) / (i * self.z)
    }

    /// Iterator over `h_l(self.z) / h_l(other.z)` for `l = 0..=l_max`, computed
    /// as a running product of ratios.
    pub fn ratios_over(&self, other: &SphericalHankel, l_max: usize) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(l_max + 1);
        let mut acc = self.h0 / other.h0;
        out.push(acc);
        for l in 1..=l_max {
            acc *= self.ratio[l] / other.ratio[l];
            out.push(acc);
        }
        out
    }
}

/// Legendre polynomials `P_0(x) .. P_{l_max}(x)`.
pub fn legendre(l_max: usize, x: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(l_max + 1);
    p.push(1.0);
    if l_max >= 1 {
        p.push(x);
    }
    for l in 1..l_max {
        let lf = l as f64;
        let next = ((2.0 * lf + 1.0) * x * p[l] - lf * p[l - 1]) / (lf + 1.0);
        p.push(next);
    }
    p
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pn1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Composite Gauss–Legendre quadrature of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let (x, w) = gauss_legendre(16);
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|p| {
            let lo = a + p as f64 * h;
            x.iter()
                .zip(&w)
                .map(|(xi, wi)| wi * f(lo + 0.5 * h * (xi + 1.0)))
                .sum::<f64>()
                * 0.5
                * h
        })
        .sum()
}

/// Result of a bracketed one-dimensional maximization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
    /// True when the maximum sits on (or within tolerance of) a bracket end.
    pub at_boundary: bool,
}

/// Golden-section maximization of a unimodal `f` on `[lo, hi]` to the given
/// relative tolerance in `x`.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, rel_tol: f64) -> Maximum {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > rel_tol * (a.abs() + b.abs()) * 0.5 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let value = f(x);
    let span = hi - lo;
    let at_boundary = (x - lo).abs() < 1e-3 * span || (hi - x).abs() < 1e-3 * span;
    Maximum { x, value, at_boundary }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn j1_series(x: f64) -> f64 {
        let mut term = x / 2.0;
        let mut sum = term;
        for k in 1..60 {
            term *= -(x * x / 4.0) / (k as f64 * (k as f64 + 1.0));
            sum += term;
        }
        sum
    }

    #[test]
    fn j1_matches_series_and_tabulated_values() {
        for &x in &[0.1, 0.5, 1.0, 2.5, 4.0, 7.0] {
            assert_relative_eq!(bessel_j1(x), j1_series(x), max_relative = 1e-12);
        }
        assert_relative_eq!(bessel_j1(1.0), 0.440_050_585_744_933_5, max_relative = 1e-13);
        assert_relative_eq!(bessel_j1(10.0), 0.043_472_746_168_861_44, max_relative = 1e-11);
        assert_relative_eq!(bessel_j01(10.0).0, -0.245_935_764_451_348_3, max_relative = 1e-12);
        assert_relative_eq!(bessel_j1(100.0), -0.077_145_352_014_112_16, max_relative = 1e-10);
        assert!(bessel_j1(J1_FIRST_ZERO).abs() < 1e-15);
        assert_relative_eq!(bessel_j1(-2.0), -bessel_j1(2.0));
    }

    #[test]
    fn hankel_matches_closed_forms() {
        let z = Complex64::new(3.0, 0.2);
        let i = Complex64::i();
        let h = SphericalHankel::new(3, z);
        let e = (i * z).exp();
        let h1 = -e * (z + i) / (z * z);
        let h2 = i * e / z * (1.0 + 3.0 * i / z - 3.0 / (z * z));
        assert!((h.value(1) - h1).norm() < 1e-13 * h1.norm());
        assert!((h.value(2) - h2).norm() < 1e-13 * h2.norm());
        // h_0' = -h_1
        assert!((h.log_derivative(0) * h.value(0) + h1).norm() < 1e-13);
    }

    #[test]
    fn hankel_log_derivative_matches_finite_difference() {
        let z = Complex64::new(2.3, 0.05);
        let dz = 1e-6;
        for l in 0..6 {
            let hp = SphericalHankel::new(6, z + dz).value(l);
            let hm = SphericalHankel::new(6, z - dz).value(l);
            let h = SphericalHankel::new(6, z);
            let fd = (hp - hm) / (2.0 * dz) / h.value(l);
            assert!((fd - h.log_derivative(l)).norm() < 1e-7 * fd.norm().max(1.0));
        }
    }

    #[test]
    fn legendre_values() {
        let p = legendre(4, 0.3);
        assert_relative_eq!(p[2], 0.5 * (3.0 * 0.09 - 1.0));
        assert_relative_eq!(p[3], 0.5 * (5.0 * 0.027 - 3.0 * 0.3));
        assert!(legendre(30, 1.0).iter().all(|&v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn quadrature_and_golden_section() {
        let v = integrate(|x| x.sin(), 0.0, PI, 4);
        assert_relative_eq!(v, 2.0, max_relative = 1e-14);
        let m = golden_max(|x| -(x - 2.0) * (x - 2.0), 0.0, 5.0, 1e-8);
        assert_relative_eq!(m.x, 2.0, max_relative = 1e-6);
        assert!(!m.at_boundary);
        let m = golden_max(|x| x, 0.0, 5.0, 1e-8);
        assert!(m.at_boundary);
    }
}
