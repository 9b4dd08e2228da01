//! Worked examples checked against closed forms or independent quadrature
//! written here, not against library routines.

use std::f64::consts::{FRAC_PI_4, PI};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use redspec_core::classes::{ap_decompose, bohr_coefficient, ergodic_mean, is_uc, ClassConfig, FunctionClass, Membership};
use redspec_core::convolution::convolve;
use redspec_core::corpus::builtin;
use redspec_core::evolution::{solve_evolution, EvolutionProblem};
use redspec_core::kernel::{bandpass_kernel, box_kernel, bump_kernel, bump_psi_hat, exp_kernel, Family};
use redspec_core::quadrature::bump_normalization;
use redspec_core::signal::SampledSignal;
use redspec_core::spectra::{
    carleman_spectrum, laplace_spectrum, weak_laplace_spectrum, FrequencyGrid, ReducedEngine, ReducedOptions, Status,
    TransformOptions,
};
use redspec_core::theorems::{run_signal_checks, CheckStatus, SuiteConfig};
use redspec_core::transforms::carleman_transform;

fn cis(x: f64) -> C64 {
    C64::from_polar(1.0, x)
}

/// Adaptive Simpson on a complex integrand.
fn simpson(f: &dyn Fn(f64) -> C64, a: f64, b: f64, tol: f64) -> C64 {
    fn rec(f: &dyn Fn(f64) -> C64, a: f64, b: f64, fa: C64, fm: C64, fb: C64, whole: C64, tol: f64, depth: u32) -> C64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let err = left + right - whole;
        if depth == 0 || err.norm() <= 15.0 * tol {
            left + right + err / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 40)
}

fn panels(f: &dyn Fn(f64) -> C64, a: f64, b: f64, n: usize, tol: f64) -> C64 {
    let h = (b - a) / n as f64;
    (0..n).map(|k| simpson(f, a + k as f64 * h, a + (k + 1) as f64 * h, tol / n as f64)).sum()
}

// ---- signals ----

#[test]
fn difference_of_unit_exponential() {
    let f = SampledSignal::full_line(50.0, 0.01, Some(0), |t| cis(t)).unwrap();
    for h in [0.01, 0.5, 1.0, 3.0] {
        let d = f.difference(h).unwrap();
        let want = (cis(h) - 1.0).norm();
        assert!((d.sup_norm() - want).abs() < 1e-12, "h={h}");
    }
}

#[test]
fn box_average_of_half_line_indicator_is_a_ramp() {
    let h = 0.5;
    let f = SampledSignal::half_line(10.0, 0.01, Some(0), |_| C64::new(1.0, 0.0)).unwrap();
    let g = convolve(&f.extend_by_zero(-3.0).unwrap(), &box_kernel(h).unwrap()).unwrap();
    let s = g.signal();
    let ramp = |t: f64| {
        if t <= -h {
            0.0
        } else if t < 0.0 {
            (t + h) / h
        } else {
            1.0
        }
    };
    let mut worst = 0.0f64;
    for i in 0..s.len() {
        let t = s.t(i);
        worst = worst.max((s.channel(0)[i] - ramp(t)).norm());
    }
    // the trapezoid sees one corner per kink: error O(dt/h)
    assert!(worst <= 0.02 + 1e-12, "worst {worst}");
    for t in [-2.0, -1.0, -0.6, -0.51] {
        let i = s.index_of(t).unwrap();
        assert!(s.channel(0)[i].norm() < 1e-14, "t={t}");
    }
    // the jump at 0 gets half a trapezoid weight
    let i = s.index_of(-0.25).unwrap();
    assert!((s.channel(0)[i].re - 0.5).abs() <= 0.01 / (2.0 * h) + 1e-12);
}

#[test]
fn mollified_exponential_matches_closed_form() {
    for (w, h) in [(1.0, 0.5), (2.5, 1.0), (-0.7, 2.0)] {
        let f = SampledSignal::half_line(40.0, 0.001, Some(0), |t| cis(w * t)).unwrap();
        let m = f.mollify(h).unwrap();
        let factor = (cis(w * h) - 1.0) / C64::new(0.0, w * h);
        let mut worst = 0.0f64;
        for i in (0..m.len()).step_by(97) {
            let t = m.t(i);
            worst = worst.max((m.channel(0)[i] - cis(w * t) * factor).norm());
        }
        // trapezoid error bound w²·dt²/12
        assert!(worst < w * w * 1e-6 / 12.0 + 1e-12, "w={w} h={h}: {worst}");
    }
}

#[test]
fn chirp_primitive_approaches_fresnel_limit() {
    let dt = 0.0025;
    let tmax = 60.0;
    let f = SampledSignal::half_line(tmax, dt, Some(0), |t| cis(t * t)).unwrap();
    let p = f.indefinite_integral().unwrap();
    let oracle = panels(&|s| cis(s * s), 0.0, tmax, 2400, 1e-11);
    let grid_val = p.channel(0)[p.len() - 1];
    assert!((grid_val - oracle).norm() < 1e-4, "grid {grid_val} oracle {oracle}");
    let limit = C64::from_polar(PI.sqrt() / 2.0, FRAC_PI_4);
    // tail ∫_T^∞ e^{is²} ds has modulus at most 1/T
    assert!((oracle - limit).norm() <= 1.0 / tmax);
    assert!((grid_val - limit).norm() <= 1.0 / tmax + 1e-4);
}

// ---- kernels ----

#[test]
fn bump_normalization_gives_unit_plateau() {
    let int = simpson(&|t| C64::new((2.0 / (t * t - 1.0)).exp(), 0.0), -1.0 + 1e-12, 1.0 - 1e-12, 1e-14).re;
    let a = (2.0 * PI * int).powf(-0.5);
    assert!((a - bump_normalization()).abs() < 1e-10 * a);
    // ψ̂(0) = 2π a² ∫ bump²
    assert!((2.0 * PI * a * a * int - 1.0).abs() < 1e-12);
    assert!((bump_psi_hat(0.0) - 1.0).abs() < 1e-8);
    let k = bump_kernel(0.01).unwrap();
    assert!((k.ft_quadrature(0.0).re - 1.0).abs() < 1e-8);
    assert!(bump_psi_hat(2.0).abs() < 1e-14 && bump_psi_hat(-2.5).abs() < 1e-14);
}

#[test]
fn bandpass_vanishes_three_widths_out() {
    for (w0, d) in [(0.0, 1.0), (1.5, 0.5), (-2.0, 0.25)] {
        let k = bandpass_kernel(w0, d, 0.01).unwrap();
        let tol = k.ft_tolerance(1e-8);
        for w in [w0 - 3.0 * d, w0 + 3.0 * d] {
            assert!(k.ft(w).norm() <= tol, "closed form at {w}");
            assert!(k.ft_quadrature(w).norm() <= tol, "quadrature at {w}");
        }
        assert!((k.ft_quadrature(w0).re - 1.0).abs() <= tol);
    }
}

#[test]
fn exponential_kernel_transform() {
    for l in [C64::new(1.0, 0.0), C64::new(0.5, 2.0), C64::new(2.0, -1.0)] {
        let f = exp_kernel(l).unwrap();
        for w in [-3.0, 0.0, 1.0, 4.0] {
            let oracle = panels(&|t| f.eval(t) * cis(-w * t), 0.0, 40.0 / l.re, 400, 1e-12);
            assert!((oracle - 1.0 / (l + C64::new(0.0, w))).norm() < 1e-9);
            assert!((f.ft(w) - oracle).norm() < 1e-9);
        }
        let neg = exp_kernel(-l).unwrap();
        assert!((neg.ft(0.7) - 1.0 / (-l + C64::new(0.0, 0.7))).norm() < 1e-15);
    }
}

// ---- classes ----

#[test]
fn ergodic_deviation_of_exponential() {
    let cfg = ClassConfig::default();
    for w in [0.5, 1.0, -2.0] {
        let f = SampledSignal::half_line(400.0, 0.01, Some(0), |t| cis(w * t)).unwrap();
        let hs = [25.0, 50.0, 100.0];
        let (mean, devs, r) = ergodic_mean(&f, Some(&hs), &cfg).unwrap();
        assert_ne!(r.member, Membership::No);
        // the reported mean is over the whole record: |mean| ≤ 2/(|ω|·span)
        assert!(mean.value[0].norm() <= 2.0 / (w.abs() * 400.0) + 1e-9);
        for (h, d) in hs.iter().zip(&devs) {
            assert!(*d <= 2.0 / (w.abs() * h) + 2.0 / (w.abs() * 400.0) + 1e-9, "w={w} h={h} dev={d}");
        }
    }
}

#[test]
fn chirp_has_mean_zero_and_is_not_uc() {
    let cs = builtin("chirp").unwrap();
    let cfg = ClassConfig::default();
    let (mean, _, r) = ergodic_mean(&cs.signal, None, &cfg).unwrap();
    assert_eq!(r.member, Membership::Yes);
    // |mean| ≈ |Fresnel limit|/T
    let fresnel = PI.sqrt() / 2.0;
    assert!((mean.value[0].norm() - fresnel / cs.signal.t_end()).abs() < 0.5 / cs.signal.t_end());
    assert!(mean.value[0].norm() <= cfg.tol_erg);
    let u = is_uc(&cs.signal, &cfg);
    assert_eq!(u.member, Membership::No);
    assert!(u.witness.is_some());
}

#[test]
fn bohr_coefficients_of_cosine() {
    let f = SampledSignal::half_line(600.0, 0.05, Some(0), |t| C64::new(2.0 * t.cos(), 0.0)).unwrap();
    let tol = ClassConfig::default().tol_bohr * 2.0;
    for w in [1.0, -1.0] {
        let b = bohr_coefficient(&f, w);
        assert!((b.a[0] - 1.0).norm() < tol, "a({w}) = {}", b.a[0]);
    }
    for w in [0.0, 2.0, 0.5] {
        assert!(bohr_coefficient(&f, w).norm() < tol);
    }
}

#[test]
fn asymptotically_periodic_split() {
    let f = SampledSignal::half_line(600.0, 0.05, Some(0), |t| cis(t) + (-t).exp()).unwrap();
    let cfg = ClassConfig::default();
    let (ap, rem, r) = ap_decompose(&f, &[1.0], None, &cfg);
    assert!(r.is_yes());
    let mut worst_ap = 0.0f64;
    let mut worst_rem = 0.0f64;
    for i in 0..f.len() {
        let t = f.t(i);
        worst_ap = worst_ap.max((ap.channel(0)[i] - cis(t)).norm());
        worst_rem = worst_rem.max((rem.channel(0)[i] - (-t).exp()).norm());
    }
    // the mean of e^{-t}e^{-it} over the record is ≈ 1/((1+i)·T)
    assert!(worst_ap < 2.0 / 600.0, "{worst_ap}");
    assert!(worst_rem < 2.0 / 600.0, "{worst_rem}");
}

// ---- spectra ----

#[test]
fn reduced_zero_class_pure_exponential() {
    let w0 = 1.0;
    let f = SampledSignal::full_line(200.0, 0.05, Some(0), |t| cis(w0 * t)).unwrap();
    let e = ReducedEngine::new(&f, ReducedOptions::new(FunctionClass::Zero, Family::S)).unwrap();
    assert_eq!(e.test(w0).status, Status::Singular);
    assert_eq!(e.test(w0 + 5.0).status, Status::Regular);
    assert_eq!(e.test(w0 - 3.0).status, Status::Regular);
    // grid points within the narrowest plateau half-width of ω0 stay Singular
    assert_eq!(e.test(w0 + 0.1).status, Status::Singular);
}

#[test]
fn carleman_of_exponential_is_simple_pole() {
    let w0 = 1.0;
    let f = SampledSignal::full_line(340.0, 0.001, Some(0), |t| cis(w0 * t)).unwrap();
    let mut worst = 0.0f64;
    for re in [0.05, -0.05, 0.2, -0.4] {
        for im in [-2.0, 0.3, 1.5, 4.0] {
            let l = C64::new(re, im);
            let v = carleman_transform(&f, l).unwrap();
            let want = 1.0 / (l - C64::new(0.0, w0));
            worst = worst.max((v.value[0] - want).norm() / want.norm().max(1.0));
        }
    }
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn carleman_spectrum_of_sinc_is_the_band() {
    let cs = builtin("sinc").unwrap();
    let g = FrequencyGrid::new(-3.0, 3.0, 0.5).unwrap();
    let est = carleman_spectrum(cs.carleman_record(), &g, &TransformOptions::default()).unwrap();
    for c in &est.certificates {
        let w = c.omega;
        if (w.abs() - 1.0).abs() < 1e-9 {
            continue;
        }
        let want = if w.abs() < 1.0 { Status::Singular } else { Status::Regular };
        assert_eq!(c.status, want, "ω = {w}");
    }
}

#[test]
fn laplace_spectra_of_decay_and_exponential() {
    let g = FrequencyGrid::new(-5.0, 5.0, 0.5).unwrap();
    let opts = TransformOptions::default();
    let dec = builtin("decay_exp").unwrap();
    let est = laplace_spectrum(&dec.signal, &g, &opts).unwrap();
    assert_eq!(est.count(Status::Regular), g.len());

    let ex = builtin("exp_i1").unwrap();
    let est = laplace_spectrum(&ex.signal, &g, &opts).unwrap();
    assert_eq!(est.status_at(1.0), Some(Status::Singular));
    for s in est.singular_set() {
        assert!((s - 1.0).abs() <= 0.5, "singular at {s}");
    }
    let wl = weak_laplace_spectrum(&ex.signal, &g, &opts).unwrap();
    assert_eq!(wl.status_at(1.0), Some(Status::Singular));
    for s in wl.singular_set() {
        assert!((s - 1.0).abs() <= 0.5, "weak singular at {s}");
    }
}

// ---- theorem checks ----

#[test]
fn evolution_closed_forms() {
    let dt = 0.01;
    let zero = SampledSignal::half_line(30.0, dt, Some(0), |_| C64::new(0.0, 0.0)).unwrap();
    let a = DMatrix::from_element(1, 1, C64::new(0.0, 1.0));
    let u = solve_evolution(&EvolutionProblem::new(a, zero, vec![C64::new(1.0, 0.0)]).unwrap()).unwrap();
    let worst = (0..u.len()).map(|i| (u.channel(0)[i] - cis(u.t(i))).norm()).fold(0.0, f64::max);
    assert!(worst < 1e-6, "{worst}");

    let phi = SampledSignal::half_line(30.0, dt, Some(0), cis).unwrap();
    let a = DMatrix::from_element(1, 1, C64::new(-1.0, 0.0));
    let u = solve_evolution(&EvolutionProblem::new(a, phi, vec![C64::new(0.0, 0.0)]).unwrap()).unwrap();
    let exact = |t: f64| (cis(t) - (-t).exp()) / C64::new(1.0, 1.0);
    let worst = (0..u.len()).map(|i| (u.channel(0)[i] - exact(u.t(i))).norm()).fold(0.0, f64::max);
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn theorem_checks_on_simple_signals() {
    let cfg = SuiteConfig { grid: FrequencyGrid::new(-3.0, 3.0, 0.5).unwrap(), ..SuiteConfig::default() };
    for (name, check) in [
        ("decay_exp", "inclusion-chain"),
        ("exp_i1", "inclusion-chain"),
        ("chirp", "ergodic"),
        ("const", "ergodic"),
        ("sinc2", "tauberian"),
        ("aap_mix", "tauberian"),
    ] {
        let cs = builtin(name).unwrap();
        let res = run_signal_checks(&cs, &cfg, Some(check)).unwrap();
        assert!(!res.is_empty());
        for r in res {
            assert_eq!(r.status, CheckStatus::Pass, "{name}/{check}: {}", r.details);
        }
    }
}
