//! Acceptance criteria, one line per criterion.

use std::time::Instant;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use redspec_core::classes::{ap_decompose_scaled, Evidence, ergodic_mean, is_c0, is_c0_scaled, ClassConfig, FunctionClass, Membership};
use redspec_core::convolution::{convolve, restrict_half_line};
use redspec_core::corpus::{builtin, builtin_corpus, exp_annihilator_provider, synth, SynthParams};
use redspec_core::evolution::random_bounded_problem;
use redspec_core::kernel::{
    approximate_identity, bandpass_kernel, bump_kernel, bump_psi_hat, compact_bump, exp_annihilator, wiener_divide,
    Family,
};
use redspec_core::quadrature::{bump, bump_mass, integrate};
use redspec_core::signal::{Domain, SampledSignal};
use redspec_core::spectra::{
    carleman_spectrum, laplace_spectrum, reduced_spectrum, FrequencyGrid, ReducedEngine, ReducedOptions,
    SpectrumEstimate, Status, TransformOptions,
};
use redspec_core::theorems::{chain_violations, check_evolution_spectrum, ChainSpectra, CheckStatus, SuiteConfig};
use redspec_core::transforms::{laplace_many, mollifier_identity, shift_identity_residual};

type Outcome = (bool, String);

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn grid() -> FrequencyGrid {
    FrequencyGrid::default()
}

fn frac(s: &SpectrumEstimate, st: Status) -> f64 {
    s.count(st) as f64 / s.certificates.len() as f64
}

fn c1_chirp() -> Outcome {
    let cs = builtin("chirp").unwrap();
    let opts = TransformOptions::default();
    let car = carleman_spectrum(cs.carleman_record(), &grid(), &opts).unwrap();
    let lap = laplace_spectrum(&cs.signal, &grid(), &opts).unwrap();
    let a = frac(&car, Status::Singular);
    let (ls, lu) = (lap.count(Status::Singular), frac(&lap, Status::Undecided));
    let mut c0 = Vec::new();
    for h in [0.5, 1.0, 2.0] {
        let m = cs.signal.mollify(h).unwrap();
        c0.push(is_c0(&m, &ClassConfig::default()).member);
    }
    let ok = a >= 0.95 && ls == 0 && lu <= 0.10 && c0.iter().all(|m| *m == Membership::Yes);
    (ok, format!("carleman singular {:.1}%, laplace singular {ls} undecided {:.1}%, C0(M_h) {c0:?}", 100.0 * a, 100.0 * lu))
}

fn c2_exp_growth() -> Outcome {
    let cs = builtin("expgrow").unwrap();
    let f = &cs.signal;
    let k = exp_annihilator(1.0, f.dt()).unwrap();
    let g = convolve(&f.extended(), &k).unwrap().signal().clone();
    let annihilated = g.sup_norm();
    let mut opts = ReducedOptions::new(FunctionClass::C0, Family::D);
    opts.registered = vec![exp_annihilator_provider()];
    let eng = ReducedEngine::new(f, opts).unwrap();
    let st: Vec<Status> = [0.0, 1.0, 2.0].iter().map(|&w| eng.test(w).status).collect();
    // (e^t)*ψ = c·e^t with c = ∫e^{−s}ψ(s)ds, here by adaptive quadrature
    let psi = compact_bump(f.dt()).unwrap();
    let oracle = integrate(&|s| (-s).exp() * bump(s) / bump_mass(), -1.0, 1.0, 1e-14);
    let gp = convolve(&f.extended(), &psi).unwrap().signal().clone();
    let mut worst: f64 = 0.0;
    for i in (0..gp.len()).step_by(97) {
        let c = gp.channel(0)[i] / gp.t(i).exp();
        worst = worst.max((c - oracle).norm());
    }
    let ok = annihilated <= 1e-6 && st.iter().all(|s| *s == Status::Regular) && worst <= 1e-4;
    (ok, format!("|e^t*f|inf = {annihilated:.2e}, statuses at 0,1,2 {st:?}, |c - oracle| = {worst:.2e} (c = {oracle:.6})"))
}

fn c3_inv_mod() -> Outcome {
    let cs = builtin("inv_mod").unwrap();
    let s = reduced_spectrum(&cs.signal, &grid(), SuiteConfig::default().reduced_options(FunctionClass::C0, &cs));
    let n = s.count(Status::Singular);
    (n == 0, format!("singular points {n}, undecided {}", s.count(Status::Undecided)))
}

fn c4_pole(chain: &ChainSpectra) -> Outcome {
    let w0 = 1.0;
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, s) in chain.names.iter().zip(&chain.spectra).skip(1) {
        let s = s.as_ref().unwrap();
        let near = s.certificates.iter().any(|c| (c.omega - w0).abs() <= 0.25 && c.status == Status::Singular);
        let stray = s.certificates.iter().filter(|c| (c.omega - w0).abs() > 0.25 && c.status == Status::Singular).count();
        let far_bad = s.certificates.iter().filter(|c| (c.omega - w0).abs() > 1.0 + 1e-9 && c.status != Status::Regular).count();
        ok &= near && stray == 0 && far_bad == 0;
        parts.push(format!("{name}: near {near} stray {stray} far-nonregular {far_bad}"));
    }
    (ok, parts.join("; "))
}

fn c5_chain(chains: &[(String, ChainSpectra)]) -> Outcome {
    let mut total = 0;
    let mut worst = Vec::new();
    for (name, ch) in chains {
        let ok: Vec<&SpectrumEstimate> = ch.spectra.iter().filter_map(|s| s.as_ref().ok()).collect();
        let v = chain_violations(&ok).len();
        total += v;
        if v > 0 {
            worst.push(format!("{name}:{v}"));
        }
    }
    (total == 0, format!("{} signals, {total} violations {worst:?}", chains.len()))
}

fn c6_algebra() -> Outcome {
    let g = FrequencyGrid::new(-3.0, 3.0, 0.1).unwrap();
    let p = SynthParams { tmax: 400.0, dt: 0.05 };
    let reduced = |f: &SampledSignal| {
        let mut o = ReducedOptions::new(FunctionClass::C0, Family::S);
        o.scale = Some(f.sup_norm());
        reduced_spectrum(f, &g, o)
    };
    let mut trans_bad = 0;
    let mut mod_bad = 0;
    let mut conv_bad = 0;
    let mut compared = 0;
    for name in ["exp_i1", "sinc", "ap_sum"] {
        let cs = synth(name, p).unwrap();
        let f = cs.carleman_record().clone();
        assert_eq!(f.domain(), Domain::FullLine);
        let base = reduced(&f);
        for s in [1.0, 2.5, 5.0] {
            let t = reduced(&f.translate(s).unwrap());
            trans_bad += base.statuses().iter().zip(t.statuses()).filter(|(a, b)| *a != b).count();
        }
        // sp(γ_λF) = sp(F) + λ on the overlap of the two grids
        for lam in [0.5, -1.0, 1.5] {
            let m = reduced(&f.modulate(lam));
            let shift = (lam / g.step).round() as i64;
            for (j, c) in base.certificates.iter().enumerate() {
                let k = j as i64 + shift;
                if k >= 0 && (k as usize) < m.certificates.len() {
                    compared += 1;
                    if m.certificates[k as usize].status != c.status {
                        mod_bad += 1;
                    }
                }
            }
        }
        // sp(F*ψ) ⊂ sp(F) ∩ supp ψ̂
        let psi = bump_kernel(f.dt()).unwrap();
        let fp = convolve(&f.extended(), &psi).unwrap().signal().clone();
        let mut o = ReducedOptions::new(FunctionClass::C0, Family::S);
        o.scale = Some(f.sup_norm());
        let sp = reduced_spectrum(&fp, &g, o);
        for (a, b) in sp.certificates.iter().zip(&base.certificates) {
            if a.status == Status::Singular && (b.status == Status::Regular || a.omega.abs() > 2.0) {
                conv_bad += 1;
            }
        }
    }
    let ok = trans_bad == 0 && mod_bad == 0 && conv_bad == 0;
    (ok, format!("translation mismatches {trans_bad}, modulation mismatches {mod_bad}/{compared}, convolution violations {conv_bad}"))
}

fn c7_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let lambdas: Vec<C64> = (0..20).map(|_| C64::new(rng.gen_range(0.05..0.5), rng.gen_range(-5.0..5.0))).collect();
    let mut ok = true;
    let mut parts = Vec::new();
    for name in ["decay_exp", "exp_i1", "chirp"] {
        let f = builtin(name).unwrap().signal;
        let vals = laplace_many(&f, &lambdas).unwrap();
        let mut norms: Vec<f64> = vals.iter().map(|v| v.value.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()).collect();
        norms.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let scale = 0.5 * (norms[9] + norms[10]);
        let mut shift: f64 = 0.0;
        let mut moll: f64 = 0.0;
        for &l in &lambdas {
            shift = shift.max(shift_identity_residual(&f, 1.0, l).unwrap());
            moll = moll.max(mollifier_identity(&f, 1.0, l).unwrap().residual);
        }
        let tol = 1e-4 * scale;
        ok &= shift <= tol && moll <= tol;
        parts.push(format!("{name}: shift {shift:.1e} mollifier {moll:.1e} tol {tol:.1e}"));
    }
    (ok, parts.join("; "))
}

fn c8_wiener() -> Outcome {
    let dt = 0.05;
    let cases = [(bump_kernel(dt).unwrap(), (-1.0, 1.0)), (bandpass_kernel(1.0, 0.5, dt).unwrap(), (0.6, 1.4))];
    let mut ok = true;
    let mut parts = Vec::new();
    for (f, k) in cases {
        let g = wiener_divide(&f, k, 1e-6).unwrap();
        // ĝ from the stored time samples, f̂ from its closed form
        let err = (0..=200)
            .map(|i| k.0 + (k.1 - k.0) * i as f64 / 200.0)
            .map(|w| (g.ft_quadrature(w) * f.ft(w) - 1.0).norm())
            .fold(0.0, f64::max);
        ok &= err <= 1e-8;
        parts.push(format!("{}: {err:.1e}", f.id()));
    }
    (ok, parts.join("; "))
}

fn c9_approximate_identity() -> Outcome {
    let u = SampledSignal::full_line(1200.0, 0.05, Some(0), |t| C64::from_polar(1.0, t)).unwrap();
    let mut errs = Vec::new();
    for n in [1, 2, 4, 8] {
        let k = approximate_identity(n, u.dt()).unwrap();
        let g = convolve(&u.extended(), &k).unwrap().signal().clone();
        let mut e: f64 = 0.0;
        for i in 0..g.len() {
            e = e.max((g.channel(0)[i] - C64::from_polar(1.0, g.t(i))).norm());
        }
        errs.push(e);
    }
    let mono = errs.windows(2).all(|w| w[1] < w[0]);
    let v = SampledSignal::half_line(50.0, 0.001, Some(0), |t| C64::from_polar(1.0, t)).unwrap();
    let m = v.mollify(0.01).unwrap();
    let mut me: f64 = 0.0;
    for i in 0..m.len() {
        me = me.max((m.channel(0)[i] - v.channel(0)[i]).norm());
    }
    let oracle = 1.0 - bump_psi_hat(1.0 / 8.0);
    let ok = mono && errs[3] <= 0.05 && me <= 0.02;
    (ok, format!("|u*psi_n - u| = {} (n=8 oracle {oracle:.3e}), |M_0.01 u - u| = {me:.2e}", sci(&errs)))
}

fn c10_ergodic() -> Outcome {
    let f = builtin("chirp").unwrap().signal;
    let (mean, devs, rep) = ergodic_mean(&f, Some(&[25.0, 50.0, 100.0]), &ClassConfig::default()).unwrap();
    let m = mean.value[0].norm();
    let dec = devs.windows(2).all(|w| w[1] < w[0]);
    (m <= 1e-2 && dec && rep.is_yes(), format!("|mean| = {m:.2e}, deviations {}, member {:?}", sci(&devs), rep.member))
}

fn c11_tauberian() -> Outcome {
    let cs = builtin("aap_mix").unwrap();
    let f = &cs.signal;
    let psi = bump_kernel(f.dt()).unwrap();
    let g = restrict_half_line(convolve(&f.extended(), &psi).unwrap().signal()).unwrap();
    let cfg = ClassConfig::default();
    let (_, rem, rep) = ap_decompose_scaled(&g, &[1.0], None, &cfg, f.sup_norm());
    let rc0 = is_c0_scaled(&rem, &cfg, f.sup_norm());
    let a = match &rep.evidence {
        Evidence::Bohr { coefficients, .. } => coefficients.first().map(|b| b.a[0]),
        _ => None,
    };
    let want = bump_psi_hat(1.0);
    let err = a.map_or(f64::INFINITY, |a| (a - want).norm());
    (rc0.is_yes() && err <= 1e-2, format!("remainder C0 {:?}, coefficient {} vs psi_hat(1) = {want:.6} (err {err:.1e})", rc0.member, a.map_or("none".into(), |a| format!("{:.6}{:+.6}i", a.re, a.im))))
}

fn c12_evolution() -> Outcome {
    let cfg = SuiteConfig::default();
    let mut viol = 0;
    let mut res_bad = 0;
    let mut other = Vec::new();
    let mut worst_ratio: f64 = 0.0;
    for seed in 1..=20u64 {
        let inst = random_bounded_problem(seed, 1200.0, 0.01).unwrap();
        let (r, out) = check_evolution_spectrum(&format!("random-{seed}"), &inst.problem, None, &cfg);
        match &out {
            Some(o) => {
                viol += o.violations.len();
                worst_ratio = worst_ratio.max(o.residual / o.tol_ode);
                if o.residual > o.tol_ode {
                    res_bad += 1;
                }
            }
            None => other.push(format!("{seed}:{:?}", r.status)),
        }
        if r.status == CheckStatus::Fail && out.is_none() {
            other.push(format!("{seed}: fail"));
        }
    }
    let ok = viol == 0 && res_bad == 0 && other.is_empty();
    (ok, format!("20 instances, violations {viol}, residual over tolerance {res_bad} (worst residual/tol {worst_ratio:.1e}), other {other:?}"))
}

fn main() {
    // numeric arguments select criteria; libtest flags passed by cargo are ignored
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let start = Instant::now();
    let cfg = SuiteConfig::default();
    let corpus = builtin_corpus().unwrap();
    let need_chains = only.is_empty() || only.contains(&4) || only.contains(&5);
    let chains: Vec<(String, ChainSpectra)> = corpus.iter().filter(|_| need_chains).map(|cs| (cs.name.clone(), ChainSpectra::compute(cs, &cfg))).collect();
    let exp_i1 = chains.iter().find(|c| c.0 == "exp_i1").map(|c| &c.1);

    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("chirp: Carleman spectrum R, Laplace spectrum empty, M_h chirp in C0", Box::new(c1_chirp)),
        ("e^t: annihilating kernel, regular points, F*psi = c e^t", Box::new(c2_exp_growth)),
        ("(1+t)^-1 e^{it}: empty reduced C0 spectrum", Box::new(c3_inv_mod)),
        ("e^{it}: pole localization in four half-line spectra", Box::new(|| c4_pole(exp_i1.unwrap()))),
        ("inclusion chain over the corpus", Box::new(|| c5_chain(&chains))),
        ("spectral algebra: translation, modulation, convolution", Box::new(c6_algebra)),
        ("transform identities at 20 lambda", Box::new(c7_identities)),
        ("Wiener division", Box::new(c8_wiener)),
        ("approximate identity and mollifier limit", Box::new(c9_approximate_identity)),
        ("chirp ergodic with mean 0", Box::new(c10_ergodic)),
        ("tauberian: e^{it} + e^{-t}", Box::new(c11_tauberian)),
        ("evolution: 20 random bounded instances", Box::new(c12_evolution)),
    ];
    let mut failed = 0;
    let mut ran = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if !only.is_empty() && !only.contains(&(i + 1)) {
            continue;
        }
        ran += 1;
        let t = Instant::now();
        let (ok, detail) = match std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| run())) {
            Ok(x) => x,
            Err(_) => (false, "panicked".into()),
        };
        if !ok {
            failed += 1;
        }
        println!("criterion {:>2} {} {name} [{:.1}s]: {detail}", i + 1, if ok { "PASS" } else { "FAIL" }, t.elapsed().as_secs_f64());
    }
    println!("acceptance: {} passed, {failed} failed in {:.1}s", ran - failed, start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
