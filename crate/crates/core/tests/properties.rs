use num_complex::Complex64 as C64;
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

use redspec_core::classes::{ergodic_mean, is_c0, ClassConfig, Membership};
use redspec_core::config::Config;
use redspec_core::convolution::convolve;
use redspec_core::kernel::{approximate_identity, bandpass_kernel, box_kernel, bump_kernel, compact_bump, ConvKernel};
use redspec_core::report::round_sig;
use redspec_core::signal::{Domain, SampledSignal};
use redspec_core::spectra::{laplace_spectrum, FrequencyGrid, Status, TransformOptions};
use redspec_core::transforms::{mollifier_identity, shift_identity_residual};

const DT: f64 = 0.05;

/// Fixed seed so a failure reproduces run to run.
fn pinned(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, rng_seed: RngSeed::Fixed(2024), failure_persistence: None, ..ProptestConfig::default() }
}

fn record(vals: &[(f64, f64)], domain: Domain) -> SampledSignal {
    let n = vals.len();
    let t0 = if domain == Domain::HalfLine { 0.0 } else { -((n / 2) as f64) * DT };
    let v: Vec<C64> = vals.iter().map(|&(a, b)| C64::new(a, b)).collect();
    SampledSignal::from_channels(domain, t0, DT, vec![v], Some(0)).unwrap()
}

/// Moduli in [0.5, 1] so the growth fit sees a bounded record.
fn samples(lo: usize, hi: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.5..1.0f64, -3.2..3.2f64).prop_map(|(r, a)| (r * a.cos(), r * a.sin())), lo..hi)
}

fn coeff() -> impl Strategy<Value = C64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| C64::new(a, b))
}

fn max_diff_on_common(a: &SampledSignal, b: &SampledSignal) -> (f64, usize) {
    let mut worst = 0.0f64;
    let mut n = 0;
    for i in 0..a.len() {
        if let Some(j) = b.index_of(a.t(i)) {
            worst = worst.max((a.channel(0)[i] - b.channel(0)[j]).norm());
            n += 1;
        }
    }
    (worst, n)
}

fn lin(a: C64, f: &SampledSignal, b: C64, g: &SampledSignal) -> SampledSignal {
    f.scale(a).add(&g.scale(b)).unwrap()
}

proptest! {
    #![proptest_config(pinned(48))]

    #[test]
    fn convolution_is_linear(x in samples(80, 200), y_seed in samples(200, 201), a in coeff(), b in coeff(), m in 1usize..12) {
        let f = record(&x, Domain::FullLine);
        let g = record(&y_seed[..x.len()], Domain::FullLine);
        let k = box_kernel(m as f64 * DT).unwrap();
        let lhs = convolve(&lin(a, &f, b, &g).extended(), &k).unwrap();
        let rf = convolve(&f.extended(), &k).unwrap();
        let rg = convolve(&g.extended(), &k).unwrap();
        let rhs = lin(a, rf.signal(), b, rg.signal());
        let (d, n) = max_diff_on_common(lhs.signal(), &rhs);
        prop_assert!(n > 0);
        prop_assert!(d < 1e-12, "{}", d);
    }

    #[test]
    fn mollifier_is_linear(x in samples(40, 120), y_seed in samples(120, 121), a in coeff(), b in coeff(), m in 1usize..20) {
        let f = record(&x, Domain::HalfLine);
        let g = record(&y_seed[..x.len()], Domain::HalfLine);
        let h = m as f64 * DT;
        prop_assume!(m < x.len());
        let lhs = lin(a, &f, b, &g).mollify(h).unwrap();
        let rhs = lin(a, &f.mollify(h).unwrap(), b, &g.mollify(h).unwrap());
        let (d, _) = max_diff_on_common(&lhs, &rhs);
        prop_assert!(d < 1e-12, "{}", d);
    }

    #[test]
    fn mollifier_agrees_with_box_convolution(x in samples(40, 160), m in 1usize..20) {
        let f = record(&x, Domain::HalfLine);
        prop_assume!(m < x.len());
        let h = m as f64 * DT;
        let direct = f.mollify(h).unwrap();
        let conv = convolve(&f.extend_by_zero(-1.0).unwrap(), &box_kernel(h).unwrap()).unwrap();
        let (d, n) = max_diff_on_common(&direct, conv.signal());
        prop_assert_eq!(n, direct.len());
        prop_assert!(d < 1e-12, "{}", d);
    }

    #[test]
    fn kernels_commute(x in samples(120, 300), m1 in 1usize..10, m2 in 1usize..10) {
        let f = record(&x, Domain::FullLine).extended();
        let p = box_kernel(m1 as f64 * DT).unwrap();
        let q = compact_bump(DT).unwrap();
        let pq = convolve(&convolve(&f, &p).unwrap(), &q).unwrap();
        let qp = convolve(&convolve(&f, &q).unwrap(), &p).unwrap();
        let (d, _) = max_diff_on_common(pq.signal(), qp.signal());
        prop_assert!(d < 1e-12, "{}", d);
        let r = box_kernel(m2 as f64 * DT).unwrap();
        let pr = convolve(&convolve(&f, &p).unwrap(), &r).unwrap();
        let rp = convolve(&convolve(&f, &r).unwrap(), &p).unwrap();
        let (d, n) = max_diff_on_common(pr.signal(), rp.signal());
        prop_assert!(n > 0);
        prop_assert!(d < 1e-12, "{}", d);
    }

    #[test]
    fn translation_and_modulation_commute(x in samples(40, 120), k in -20i64..20, w in -4.0..4.0f64) {
        let f = record(&x, Domain::FullLine);
        let s = k as f64 * DT;
        let a = f.modulate(w).translate(s).unwrap();
        let b = f.translate(s).unwrap().modulate(w).scale(C64::from_polar(1.0, w * s));
        let (d, n) = max_diff_on_common(&a, &b);
        prop_assert_eq!(n, a.len());
        prop_assert!(d < 1e-12, "{}", d);
    }

    #[test]
    fn translation_preserves_values(x in samples(40, 120), k in 0i64..30) {
        let f = record(&x, Domain::HalfLine);
        prop_assume!((k as usize) < x.len());
        let g = f.translate(k as f64 * DT).unwrap();
        for i in 0..g.len() {
            prop_assert_eq!(g.channel(0)[i], f.channel(0)[i + k as usize]);
        }
        prop_assert_eq!(g.domain(), Domain::HalfLine);
    }

    #[test]
    fn zero_extension_convolution_vanishes_far_left(x in samples(40, 120), m in 1usize..20) {
        let f = record(&x, Domain::HalfLine);
        let h = m as f64 * DT;
        let c = convolve(&f.extend_by_zero(-3.0).unwrap(), &box_kernel(h).unwrap()).unwrap();
        let s = c.signal();
        for i in 0..s.len() {
            if s.t(i) < -h - 1e-9 {
                prop_assert_eq!(s.channel(0)[i], C64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn round_sig_is_idempotent(x in prop::num::f64::NORMAL, d in 1usize..17) {
        let r = round_sig(x, d);
        prop_assert_eq!(round_sig(r, d), r);
        prop_assert!((r - x).abs() <= x.abs() * 10f64.powi(1 - d as i32));
    }
}

proptest! {
    #![proptest_config(pinned(8))]

    #[test]
    fn plateau_kernels_are_fourier_consistent(w0 in -3.0..3.0f64, di in 0usize..3) {
        let delta = [1.0, 0.5, 0.25][di];
        let k = bandpass_kernel(w0, delta, 0.05).unwrap();
        prop_assert!(k.fourier_consistency_error() <= k.ft_tolerance(1e-8));
        let tol = k.ft_tolerance(1e-8);
        for (w, v) in k.ft_grid().iter().zip(k.ft_samples()) {
            prop_assert!(v.im.abs() <= tol);
            prop_assert!(v.re >= -tol && v.re <= 1.0 + tol, "ψ̂({}) = {}", w, v);
        }
    }

    #[test]
    fn approximate_identity_dilates(n in 1u32..5, w in -6.0..6.0f64) {
        let k1 = approximate_identity(1, 0.01).unwrap();
        let kn = approximate_identity(n, 0.01).unwrap();
        prop_assert!((kn.ft(w) - k1.ft(w / n as f64)).norm() <= 1e-8);
        prop_assert!((kn.ft_quadrature(w) - k1.ft(w / n as f64)).norm() <= kn.ft_tolerance(1e-8));
    }

    #[test]
    fn schwartz_convolution_decays_left(a in 0.2..3.0f64, w in -2.0..2.0f64) {
        let f = SampledSignal::half_line(240.0, 0.05, Some(1), |t| C64::from_polar(1.0, w * t) * (1.0 + a * t)).unwrap();
        let k = bump_kernel(0.05).unwrap();
        let c = convolve(&f.extend_by_zero(-240.0).unwrap(), &k).unwrap();
        let s = c.signal();
        let at = |t: f64| s.channel(0)[s.index_of(t).unwrap()].norm();
        let (v10, v20, v40) = (at(-10.0), at(-20.0), at(-40.0));
        prop_assert!(v20 <= v10 && v40 <= v20);
        // ‖F‖ on [0, 10] is at most 1 + 10a
        prop_assert!(v40 < 1e-5 * (1.0 + 10.0 * a), "{}", v40);
    }

    #[test]
    fn laplace_shift_identity(k in 1i64..200, re in 0.05..1.0f64, im in -4.0..4.0f64, w in -3.0..3.0f64) {
        let f = SampledSignal::half_line(200.0, 0.01, Some(0), |t| C64::from_polar(1.0, w * t) + (-t).exp()).unwrap();
        let l = C64::new(re, im);
        let r = shift_identity_residual(&f, k as f64 * 0.01, l).unwrap();
        prop_assert!(r <= 1e-8 * (1.0 + 1.0 / re), "{}", r);
    }

    #[test]
    fn laplace_mollifier_identity(m in 1usize..200, re in 0.05..1.0f64, im in -4.0..4.0f64) {
        let f = SampledSignal::half_line(200.0, 0.01, Some(0), |t| C64::from_polar(1.0, t) / (1.0 + t)).unwrap();
        let id = mollifier_identity(&f, m as f64 * 0.01, C64::new(re, im)).unwrap();
        prop_assert!(id.residual <= 1e-8 * (1.0 + 1.0 / re), "{}", id.residual);
    }

    #[test]
    fn ergodic_closure_under_mollifier(w in 0.3..3.0f64, a in 0.0..1.0f64, h in 1usize..5) {
        let f = SampledSignal::half_line(400.0, 0.05, Some(0), |t| C64::new(a, 0.0) + C64::from_polar(1.0, w * t)).unwrap();
        let cfg = ClassConfig::default();
        let (m, devs, r) = ergodic_mean(&f, None, &cfg).unwrap();
        prop_assume!(r.member == Membership::Yes);
        let g = f.mollify(h as f64 * 0.5).unwrap();
        let (mg, _, rg) = ergodic_mean(&g, None, &cfg).unwrap();
        prop_assert_ne!(rg.member, Membership::No);
        // a finite record only certifies Yes when F cleared the threshold with room to spare
        if *devs.last().unwrap() <= 0.5 * cfg.tol_erg * f.sup_norm() {
            prop_assert_eq!(rg.member, Membership::Yes);
        }
        prop_assert!((m.value[0] - mg.value[0]).norm() <= cfg.tol_erg);
    }

    #[test]
    fn c0_closure_under_mollifier(b in 0.2..2.0f64, w in -3.0..3.0f64, h in 1usize..5) {
        let f = SampledSignal::half_line(400.0, 0.05, Some(0), |t| C64::from_polar(1.0 / (1.0 + b * t), w * t)).unwrap();
        let cfg = ClassConfig::default();
        prop_assume!(is_c0(&f, &cfg).is_yes());
        let g = f.mollify(h as f64 * 0.5).unwrap();
        prop_assert!(is_c0(&g, &cfg).is_yes());
        let (m, _, r) = ergodic_mean(&g, None, &cfg).unwrap();
        prop_assert!(r.member != Membership::No);
        prop_assert!(m.value[0].norm() <= cfg.tol_erg);
    }
}

proptest! {
    #![proptest_config(pinned(4))]

    #[test]
    fn laplace_status_shifts_under_modulation(k in -4i64..4, w0i in -4i64..4) {
        let w0 = w0i as f64 * 0.5;
        let lam = k as f64 * 0.5;
        let f = SampledSignal::half_line(300.0, 0.05, Some(0), |t| C64::from_polar(1.0, w0 * t)).unwrap();
        let opts = TransformOptions::default();
        let grid = FrequencyGrid::new(-6.0, 6.0, 0.5).unwrap();
        let base = laplace_spectrum(&f, &grid, &opts).unwrap();
        let moved = laplace_spectrum(&f.modulate(lam), &grid, &opts).unwrap();
        for c in &moved.certificates {
            if let Some(prev) = base.status_at(c.omega - lam) {
                if prev != Status::Undecided && c.status != Status::Undecided {
                    prop_assert_eq!(prev, c.status, "ω = {}", c.omega);
                }
            }
        }
        prop_assert_eq!(moved.status_at(w0 + lam), Some(Status::Singular));
    }

    #[test]
    fn laplace_status_is_translation_invariant(k in 1i64..400, w0i in -4i64..4) {
        let w0 = w0i as f64 * 0.5;
        let f = SampledSignal::half_line(300.0, 0.05, Some(0), |t| C64::from_polar(1.0, w0 * t) + (-t).exp()).unwrap();
        let opts = TransformOptions::default();
        let grid = FrequencyGrid::new(-3.0, 3.0, 0.5).unwrap();
        let a = laplace_spectrum(&f, &grid, &opts).unwrap();
        let b = laplace_spectrum(&f.translate(k as f64 * 0.05).unwrap(), &grid, &opts).unwrap();
        for (x, y) in a.certificates.iter().zip(&b.certificates) {
            if x.status != Status::Undecided && y.status != Status::Undecided {
                prop_assert_eq!(x.status, y.status, "ω = {}", x.omega);
            }
        }
    }
}

#[test]
fn config_rejects_unknown_and_nonpositive() {
    assert!(Config::from_json(r#"{"tol_c0": 1e-3}"#).is_ok());
    assert!(Config::from_json(r#"{"tol_cO": 1e-3}"#).is_err());
    assert!(Config::from_json(r#"{"tol_erg": 0}"#).is_err());
    assert!(Config::from_json(r#"{"a_seq": [0.1, 0.2]}"#).is_err());
}

#[test]
fn box_kernel_taps_have_unit_mass() {
    for m in 1..30 {
        let (_, taps) = box_kernel(m as f64 * DT).unwrap().taps(DT).unwrap();
        let s: C64 = taps.iter().sum();
        assert!((s.re - 1.0).abs() < 1e-12 && s.im.abs() < 1e-15);
    }
}
