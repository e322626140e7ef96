use num_complex::Complex64;
use proptest::prelude::*;
use sonolink::comms::{capacity, min_detectable_drift, Drift};
use sonolink::directivity::{
    optimal_weights, sphere_mode_transfers, superpose, Coherence, Emitter, EmitterSet, ModeWeights,
};
use sonolink::pattern::{uniform_angles, DirectivityPattern, PatternSource};
use sonolink::sphere::{calibrated_field, efficiency_sweep, SphereField};
use sonolink::{Exec, Medium};
use std::f64::consts::PI;

const UM: f64 = 1e-6;

fn preset() -> impl Strategy<Value = Medium> {
    prop_oneof![Just(Medium::water()), Just(Medium::low()), Just(Medium::high())]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sphere_field_linear_power_quadratic(
        a in 0.5f64..50.0,
        f_mhz in 1.0f64..300.0,
        eps in 1e-8f64..1e-4,
        scale in 1.5f64..10.0,
        m in preset(),
    ) {
        let a = a * UM;
        let f = f_mhz * 1e6;
        let s1 = SphereField::new(a, eps, &m, f).unwrap();
        let s2 = SphereField::new(a, eps * scale, &m, f).unwrap();
        let r = 3.0 * a + 10.0 * UM;
        let (p1, p2) = (s1.pressure(r).unwrap(), s2.pressure(r).unwrap());
        prop_assert!((p2 - p1 * scale).norm() <= 1e-12 * p2.norm());
        prop_assert!((s2.input_power() / s1.input_power() / (scale * scale) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lossless_radiated_power_is_conserved(
        a in 0.5f64..50.0,
        f_mhz in 1.0f64..300.0,
        r1 in 1.0f64..10.0,
        r2 in 10.0f64..100.0,
    ) {
        let m = Medium::lossless();
        let a = a * UM;
        let s = calibrated_field(a, f_mhz * 1e6, &m, 100e-12).unwrap();
        let (p1, _) = s.radiated_power(a * r1).unwrap();
        let (p2, _) = s.radiated_power(a * r2).unwrap();
        prop_assert!((p1 / p2 - 1.0).abs() < 1e-9);
        prop_assert!((s.input_power() / p1 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn lossy_radiated_power_decreases(
        a in 0.5f64..50.0,
        f_mhz in 1.0f64..300.0,
        m in preset(),
        r1 in 1.0f64..10.0,
        dr in 0.1f64..50.0,
    ) {
        let a = a * UM;
        let s = calibrated_field(a, f_mhz * 1e6, &m, 100e-12).unwrap();
        let (p1, _) = s.radiated_power(a * r1).unwrap();
        let (p2, _) = s.radiated_power(a * (r1 + dr)).unwrap();
        prop_assert!(p2 < p1);
        prop_assert!(p1 <= s.input_power() * (1.0 + 1e-12));
    }

    #[test]
    fn far_field_decays_with_twice_alpha(
        f_mhz in 5.0f64..200.0,
        m in preset(),
    ) {
        let f = f_mhz * 1e6;
        let s = calibrated_field(5.0 * UM, f, &m, 100e-12).unwrap();
        let alpha = m.alpha(f).unwrap();
        let lambda = m.speed / f;
        // Far from the sphere, r² flux ∝ e^{-2αr}; fit the slope of its log.
        let rs: Vec<f64> = (0..8).map(|j| 50.0 * lambda + j as f64 * 2.0 * lambda).collect();
        let ys: Vec<f64> = rs.iter().map(|&r| (s.flux(r).unwrap() * r * r).ln()).collect();
        let n = rs.len() as f64;
        let (mx, my) = (rs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
        let slope = rs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
            / rs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
        prop_assert!((slope / (-2.0 * alpha) - 1.0).abs() < 1e-3, "slope {slope} vs {}", -2.0 * alpha);
    }

    #[test]
    fn capacity_is_monotone(
        p in 1e-20f64..1e-12,
        dp in 1e-21f64..1e-12,
        df in 1e3f64..1e8,
        ddf in 1.0f64..1e8,
    ) {
        let c = capacity(p, 310.0, df).unwrap();
        prop_assert!(capacity(p + dp, 310.0, df).unwrap().capacity >= c.capacity);
        prop_assert!(capacity(p, 310.0, df + ddf).unwrap().capacity >= c.capacity);
        prop_assert!(c.capacity <= c.wideband_limit * (1.0 + 1e-12));
        prop_assert!(c.capacity >= 0.0);
        let wide = capacity(p, 310.0, 1e3 * p / (1.380649e-23 * 310.0)).unwrap();
        prop_assert!((wide.capacity / wide.wideband_limit - 1.0).abs() < 1e-3);
    }

    #[test]
    fn drift_shrinks_with_integration(
        sigma in 0.1f64..1.0,
        dt in 1e-4f64..1e-2,
        growth in 1.1f64..10.0,
    ) {
        let theta = uniform_angles(3601, PI);
        let flux: Vec<f64> = theta.iter().map(|t| 6e-3 * (-t * t / (2.0 * sigma * sigma)).exp()).collect();
        let pat = DirectivityPattern::new(1e-4, theta, flux, PatternSource::Analytic).unwrap();
        let a = min_detectable_drift(&pat, 1e-12, dt, 3e-20).unwrap();
        let b = min_detectable_drift(&pat, 1e-12, dt * growth, 3e-20).unwrap();
        let c = min_detectable_drift(&pat, 1e-12 * growth, dt, 3e-20).unwrap();
        if let (Drift::Detectable { dtheta: ta, .. }, Drift::Detectable { dtheta: tb, .. }, Drift::Detectable { dtheta: tc, .. }) = (a, b, c) {
            // Equal up to the bisection tolerance.
            prop_assert!(tb <= ta + 1e-4 && tc <= ta + 1e-4);
        } else {
            prop_assert!(a.dx().is_none());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn optimal_weights_meet_power_constraint(
        f_mhz in 10.0f64..400.0,
        d in 20.0f64..500.0,
        m in preset(),
        power in 1e-12f64..1e-9,
    ) {
        let t = sphere_mode_transfers(5.0 * UM, f_mhz * 1e6, &m, d * UM, 20).unwrap();
        let (w, flux) = optimal_weights(&t, power);
        prop_assert!((w.input_power(&t) / power - 1.0).abs() < 1e-9);
        prop_assert!(w.mode_powers(&t).iter().all(|&p| p >= 0.0));
        prop_assert!((w.flux(&t, 0.0) / flux - 1.0).abs() < 1e-9);
        // The optimum is never worse than uniform pulsation.
        let u = ModeWeights { weights: {
            let mut v = vec![Complex64::new(0.0, 0.0); t.len()];
            v[0] = Complex64::new((power / t[0].power_coefficient).sqrt(), 0.0);
            v
        }};
        prop_assert!(flux >= u.flux(&t, 0.0) * (1.0 - 1e-12));
    }

    #[test]
    fn two_mode_optimum_beats_brute_force(
        f_mhz in 10.0f64..400.0,
        d in 20.0f64..300.0,
        m in preset(),
    ) {
        let power = 100e-12;
        let t = sphere_mode_transfers(5.0 * UM, f_mhz * 1e6, &m, d * UM, 1).unwrap();
        let (_, best) = optimal_weights(&t, power);
        let mut brute = f64::NEG_INFINITY;
        let n = 120;
        for i in 0..=n {
            let s = i as f64 / n as f64; // fraction of power in mode 0
            for j in 0..n {
                let phase = 2.0 * PI * j as f64 / n as f64;
                let w0 = Complex64::new((s * power / t[0].power_coefficient).sqrt(), 0.0);
                let w1 = Complex64::from_polar(((1.0 - s) * power / t[1].power_coefficient).sqrt(), phase);
                brute = brute.max(ModeWeights { weights: vec![w0, w1] }.flux(&t, 0.0));
            }
        }
        prop_assert!(best >= brute * (1.0 - 1e-9), "{best} < {brute}");
        prop_assert!(best <= brute * 1.01, "{best} vs grid {brute}");
    }

    #[test]
    fn superposition_is_linear(
        sep in 10.0f64..40.0,
        re in -2.0f64..2.0,
        im in -2.0f64..2.0,
        x in -60.0f64..60.0,
        z in 30.0f64..90.0,
    ) {
        let m = Medium::low();
        let e = |pos: f64, amp: Complex64| Emitter { position: [pos * UM, 0.0, 0.0], radius: 2.0 * UM, amplitude: amp, frequency: 30e6 };
        let amp = Complex64::new(re, im) * 1e-6;
        let pt = [[x * UM, 0.0, z * UM]];
        let one = |em: Emitter| superpose(&EmitterSet::new(vec![em], Coherence::Coherent, m.clone()).unwrap(), &pt, Exec::Sequential).unwrap().pressure[0].unwrap();
        let pa = one(e(-sep / 2.0, Complex64::new(1e-6, 0.0)));
        let pb = one(e(sep / 2.0, amp));
        let both = EmitterSet::new(vec![e(-sep / 2.0, Complex64::new(1e-6, 0.0)), e(sep / 2.0, amp)], Coherence::Coherent, m.clone()).unwrap();
        let map = superpose(&both, &pt, Exec::Parallel).unwrap();
        let sum = map.pressure[0].unwrap();
        prop_assert!((sum - pa - pb).norm() <= 1e-12 * (pa.norm() + pb.norm()));
        let inc = EmitterSet { coherence: Coherence::Incoherent, ..both };
        let i = superpose(&inc, &pt, Exec::Sequential).unwrap().intensity[0].unwrap();
        let z0 = 2.0 * m.density * m.speed;
        prop_assert!((i - (pa.norm_sqr() + pb.norm_sqr()) / z0).abs() <= 1e-12 * i);
    }
}

#[test]
fn sweeps_are_deterministic_across_strategies() {
    let m = Medium::low();
    let fs: Vec<f64> = (1..=40).map(|j| j as f64 * 5e6).collect();
    let a = efficiency_sweep(5.0 * UM, &m, 100.0 * UM, &fs, Exec::Sequential).unwrap();
    let b = efficiency_sweep(5.0 * UM, &m, 100.0 * UM, &fs, Exec::Parallel).unwrap();
    let c = efficiency_sweep(5.0 * UM, &m, 100.0 * UM, &fs, Exec::Parallel).unwrap();
    assert_eq!(a, b);
    assert_eq!(b, c);
}
