//! Executable forms of the inclusion, ergodicity, tauberian and evolution
//! theorems, run as property checks on concrete signals.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::classes::{
    ap_decompose_scaled, bohr_scan, ergodic_mean_scaled, is_bounded, is_c0_scaled, is_slowly_oscillating, is_uc_scaled, ClassConfig,
    FunctionClass, Membership,
};
use crate::convolution::convolve;
use crate::corpus::{sinc2_ft, CorpusSignal};
use crate::error::{Error, Result};
use crate::evolution::{imaginary_axis_frequencies, integrated_residual, ode_tolerance, solve_evolution, EvolutionProblem};
use crate::kernel::{bump_kernel, bump_psi_hat, compact_bump, Family, TestKernel};
use crate::quadrature::integrate_c;
use crate::signal::{Domain, SampledSignal};
use crate::spectra::{
    carleman_spectrum, laplace_spectrum, reduced_spectrum, weak_laplace_spectrum, FrequencyGrid, ReducedOptions, SpectrumEstimate,
    Status, TransformOptions,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckStatus {
    Pass,
    Fail,
    Vacuous,
}

/// Enough to rerun a failed check: signal, parameters, frequency, tolerances
/// and the certificates that disagreed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckWitness {
    pub signal: String,
    pub params: serde_json::Value,
    pub omega: Option<f64>,
    pub tolerances: serde_json::Value,
    pub certificates: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub theorem: String,
    pub signal: String,
    pub status: CheckStatus,
    pub details: serde_json::Value,
    pub witness: Option<CheckWitness>,
}

impl CheckResult {
    fn new(theorem: &str, signal: &str, status: CheckStatus, details: serde_json::Value) -> Self {
        CheckResult { theorem: theorem.into(), signal: signal.into(), status, details, witness: None }
    }

    /// A failure without a frequency witness, e.g. an engine panic.
    pub fn failure(theorem: &str, signal: &str, details: serde_json::Value) -> Self {
        Self::new(theorem, signal, CheckStatus::Fail, details)
    }

    pub fn vacuous(theorem: &str, signal: &str, reason: impl Into<String>) -> Self {
        Self::new(theorem, signal, CheckStatus::Vacuous, serde_json::json!({ "reason": reason.into() }))
    }
}

pub const CHECK_IDS: &[&str] = &["inclusion-chain", "ergodic", "tauberian", "regular-ft", "evolution"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub grid: FrequencyGrid,
    pub transform: TransformOptions,
    pub classes: ClassConfig,
    pub delta_seq: Vec<f64>,
    pub seed: u64,
    /// Number of random evolution instances.
    pub evolution_instances: usize,
    /// Distance allowed between a singular frequency and its explanation.
    pub grid_tol: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            grid: FrequencyGrid::default(),
            transform: TransformOptions::default(),
            classes: ClassConfig::default(),
            delta_seq: vec![1.0, 0.5, 0.25],
            seed: 2024,
            evolution_instances: 20,
            grid_tol: 0.25,
        }
    }
}

impl SuiteConfig {
    pub fn reduced_options(&self, class: FunctionClass, cs: &CorpusSignal) -> ReducedOptions {
        let fam = if cs.signal.growth_exponent().is_none() { Family::D } else { Family::S };
        let mut o = ReducedOptions::new(class, fam);
        o.delta_seq = self.delta_seq.clone();
        o.classes = self.classes.clone();
        o.registered = cs.registered.clone();
        o
    }
}

/// The five spectra of the inclusion chain for one signal, smallest first:
/// reduced (AAP), reduced (C₀), weak Laplace, Laplace, Carleman.
pub struct ChainSpectra {
    pub names: [&'static str; 5],
    pub spectra: Vec<std::result::Result<SpectrumEstimate, String>>,
}

impl ChainSpectra {
    pub const NAMES: [&'static str; 5] = ["reduced(AAP)", "reduced(C0)", "weak-laplace", "laplace", "carleman"];

    pub fn compute(cs: &CorpusSignal, cfg: &SuiteConfig) -> Self {
        let names = Self::NAMES;
        let half = match cs.half_line() {
            Ok(h) => h,
            Err(e) => return ChainSpectra { names, spectra: (0..5).map(|_| Err(e.to_string())).collect() },
        };
        let g = &cfg.grid;
        let to = &cfg.transform;
        let spectra = vec![
            Ok(reduced_spectrum(&half, g, cfg.reduced_options(FunctionClass::AAP, cs))),
            Ok(reduced_spectrum(&half, g, cfg.reduced_options(FunctionClass::C0, cs))),
            weak_laplace_spectrum(&half, g, to).map_err(|e| e.to_string()),
            laplace_spectrum(&half, g, to).map_err(|e| e.to_string()),
            carleman_spectrum(cs.carleman_record(), g, to).map_err(|e| e.to_string()),
        ];
        ChainSpectra { names, spectra }
    }

    pub fn reduced_c0(&self) -> Option<&SpectrumEstimate> {
        self.spectra[1].as_ref().ok()
    }
}

fn params_json(cs: &CorpusSignal) -> serde_json::Value {
    serde_json::to_value(cs.params).unwrap_or_default()
}

/// A smaller spectrum Singular where a larger one is Regular is a violation;
/// Undecided never is.
pub fn chain_violations(spectra: &[&SpectrumEstimate]) -> Vec<(f64, usize, usize)> {
    let mut out = Vec::new();
    let n = spectra[0].certificates.len();
    for j in 0..n {
        for a in 0..spectra.len() {
            for b in a + 1..spectra.len() {
                if spectra[a].certificates[j].status == Status::Singular && spectra[b].certificates[j].status == Status::Regular {
                    out.push((spectra[a].certificates[j].omega, a, b));
                }
            }
        }
    }
    out
}

pub fn check_inclusion_chain(cs: &CorpusSignal, chain: &ChainSpectra, cfg: &SuiteConfig) -> CheckResult {
    let id = "inclusion-chain";
    if cs.signal.growth_exponent().is_none() {
        return CheckResult::vacuous(id, &cs.name, "no polynomial growth bound: the transforms are not defined");
    }
    let mut ok: Vec<(&str, &SpectrumEstimate)> = Vec::new();
    let mut skipped = Vec::new();
    for (name, s) in chain.names.iter().zip(&chain.spectra) {
        match s {
            Ok(s) => ok.push((name, s)),
            Err(e) => skipped.push(format!("{name}: {e}")),
        }
    }
    if ok.len() < 2 {
        return CheckResult::vacuous(id, &cs.name, format!("engines failed: {}", skipped.join("; ")));
    }
    let est: Vec<&SpectrumEstimate> = ok.iter().map(|x| x.1).collect();
    let v = chain_violations(&est);
    let counts: BTreeMap<&str, [usize; 3]> = ok
        .iter()
        .map(|(n, s)| (*n, [s.count(Status::Regular), s.count(Status::Singular), s.count(Status::Undecided)]))
        .collect();
    let details = serde_json::json!({
        "order": ok.iter().map(|x| x.0).collect::<Vec<_>>(),
        "counts_regular_singular_undecided": counts,
        "skipped": skipped,
        "violations": v.len(),
    });
    let mut r = CheckResult::new(id, &cs.name, if v.is_empty() { CheckStatus::Pass } else { CheckStatus::Fail }, details);
    if let Some(&(w, a, b)) = v.first() {
        let cert = |k: usize| est[k].certificates.iter().find(|c| c.omega == w).cloned();
        r.witness = Some(CheckWitness {
            signal: cs.name.clone(),
            params: params_json(cs),
            omega: Some(w),
            tolerances: serde_json::to_value(&cfg.transform).unwrap_or_default(),
            certificates: serde_json::json!({ ok[a].0: cert(a), ok[b].0: cert(b) }),
        });
    }
    r
}

/// ‖v‖ for a vector of channel values.
fn vnorm(v: &[C64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Bounded or slowly oscillating, as the ergodicity theorem requires.
fn ergodic_hypothesis(f: &SampledSignal, cfg: &ClassConfig) -> Option<&'static str> {
    if is_bounded(f).is_yes() {
        Some("bounded")
    } else if is_slowly_oscillating(f, cfg).is_yes() {
        Some("slowly oscillating")
    } else {
        None
    }
}

/// At every ω regular for sp_{𝒜,𝒮}(F), γ_{−ω}F must be ergodic, with mean 0
/// when 𝒜 = C₀.
pub fn check_ergodic_theorem(cs: &CorpusSignal, reduced: &SpectrumEstimate, class: FunctionClass, cfg: &SuiteConfig) -> CheckResult {
    let id = "ergodic";
    let f = match cs.half_line() {
        Ok(f) => f,
        Err(e) => return CheckResult::vacuous(id, &cs.name, e.to_string()),
    };
    if f.growth_exponent().is_none() {
        return CheckResult::vacuous(id, &cs.name, "F grows exponentially: neither bounded nor slowly oscillating");
    }
    let Some(hyp) = ergodic_hypothesis(&f, &cfg.classes) else {
        return CheckResult::vacuous(id, &cs.name, "F is neither bounded nor slowly oscillating");
    };
    let scale = f.sup_norm();
    let tol_mean = cfg.classes.tol_erg * scale;
    let (mut yes, mut undecided) = (0usize, 0usize);
    let mut fail: Option<(f64, String, serde_json::Value)> = None;
    for c in reduced.certificates.iter().filter(|c| c.status == Status::Regular) {
        let w = c.omega;
        let g = f.modulate(-w);
        let Ok((mean, _, rep)) = ergodic_mean_scaled(&g, None, &cfg.classes, scale) else {
            undecided += 1;
            continue;
        };
        match rep.member {
            Membership::Yes => {
                let m = vnorm(&mean.value);
                if class == FunctionClass::C0 && m > tol_mean {
                    fail.get_or_insert((w, format!("mean {m:.3e} above {tol_mean:.3e}"), serde_json::to_value(&rep).unwrap_or_default()));
                } else {
                    yes += 1;
                }
            }
            Membership::No => {
                fail.get_or_insert((w, "γ₋ωF not ergodic".into(), serde_json::to_value(&rep).unwrap_or_default()));
            }
            Membership::Undecided => undecided += 1,
        }
    }
    let details = serde_json::json!({ "hypothesis": hyp, "class": class, "ergodic_yes": yes, "undecided": undecided });
    if let Some((w, why, rep)) = fail {
        let mut r = CheckResult::new(id, &cs.name, CheckStatus::Fail, details);
        r.details["reason"] = why.into();
        r.witness = Some(CheckWitness {
            signal: cs.name.clone(),
            params: params_json(cs),
            omega: Some(w),
            tolerances: serde_json::to_value(&cfg.classes).unwrap_or_default(),
            certificates: rep,
        });
        return r;
    }
    if yes == 0 {
        let mut r = CheckResult::vacuous(id, &cs.name, "no regular frequency gave a decisive ergodicity test");
        r.details["undecided"] = undecided.into();
        return r;
    }
    CheckResult::new(id, &cs.name, CheckStatus::Pass, details)
}

/// Maximal runs of non-regular grid points that contain a singular point,
/// as (lo, hi) frequency intervals.
pub fn singular_clusters(s: &SpectrumEstimate) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let certs = &s.certificates;
    let mut i = 0;
    while i < certs.len() {
        if certs[i].status == Status::Regular {
            i += 1;
            continue;
        }
        let j0 = i;
        while i < certs.len() && certs[i].status != Status::Regular {
            i += 1;
        }
        if certs[j0..i].iter().any(|c| c.status == Status::Singular) {
            out.push((certs[j0].omega, certs[i - 1].omega));
        }
    }
    out
}

/// (𝔉*ψ)|𝕁.
fn convolve_restricted(f: &SampledSignal, k: &TestKernel) -> Result<SampledSignal> {
    let g = convolve(&f.extended(), k)?.restrict()?;
    match f.domain() {
        Domain::HalfLine => Ok(g.with_domain(Domain::HalfLine)),
        Domain::FullLine => Ok(g),
    }
}

/// Tauberian conclusions from sp_{C₀,𝒮}(F): C₀ convolutions when it is empty,
/// AAP convolutions (and AAP F when F is UC) when it is a finite set of
/// clusters at which γ₋ωF is ergodic.
pub fn check_tauberian(cs: &CorpusSignal, reduced_c0: &SpectrumEstimate, cfg: &SuiteConfig) -> CheckResult {
    let id = "tauberian";
    let f = &cs.signal;
    // e^t: the spectrum is empty for compactly supported kernels, yet
    // 𝔉*ψ = c·e^t is not uniformly continuous
    if f.growth_exponent().is_none() {
        return CheckResult::vacuous(id, &cs.name, "(𝔉*ψ)|𝕁 grows exponentially and is not uniformly continuous");
    }
    let ccfg = &cfg.classes;
    let scale = f.sup_norm();
    let undecided = reduced_c0.count(Status::Undecided);
    let clusters = singular_clusters(reduced_c0);
    let psi = if f.growth_exponent().is_none() { compact_bump(f.dt()) } else { bump_kernel(f.dt()) };
    let psi = match psi {
        Ok(k) => k,
        Err(e) => return CheckResult::vacuous(id, &cs.name, e.to_string()),
    };
    let g = match convolve_restricted(f, &psi) {
        Ok(x) => x,
        Err(e) => return CheckResult::vacuous(id, &cs.name, format!("convolution: {e}")),
    };
    let mut details = serde_json::json!({ "kernel": psi.id(), "clusters": clusters, "undecided_points": undecided });
    let mut asserted: Vec<(&str, Membership)> = Vec::new();
    if clusters.is_empty() {
        if undecided > 0 {
            return CheckResult::vacuous(id, &cs.name, format!("{undecided} undecided grid points: emptiness of the spectrum not established"));
        }
        let uc = is_uc_scaled(&g, ccfg, scale);
        details["psi_conv_uc"] = serde_json::to_value(uc.member).unwrap_or_default();
        if !uc.is_yes() {
            return CheckResult { details, ..CheckResult::vacuous(id, &cs.name, "(𝔉*ψ)|𝕁 is not uniformly continuous") };
        }
        let c0 = is_c0_scaled(&g, ccfg, scale);
        asserted.push(("psi_conv_c0", c0.member));
        if is_uc_scaled(f, ccfg, scale).is_yes() {
            asserted.push(("f_c0", is_c0_scaled(f, ccfg, scale).member));
        }
    } else {
        if clusters.iter().any(|(lo, hi)| hi - lo > 2.0) {
            return CheckResult::vacuous(id, &cs.name, "singular set is not a finite union of small clusters on this grid");
        }
        let tol = ccfg.tol_bohr * scale;
        let mut freqs = Vec::new();
        for &(lo, hi) in &clusters {
            let pad = cfg.grid.step;
            for b in bohr_scan(f, lo - pad, hi + pad, 0.02, tol, 4) {
                freqs.push(b.omega);
            }
        }
        // γ₋ωF ergodic at every frequency of the spectrum
        for &w in &freqs {
            match ergodic_mean_scaled(&f.modulate(-w), None, ccfg, scale) {
                Ok((_, _, r)) if r.is_yes() => {}
                _ => {
                    return CheckResult { details, ..CheckResult::vacuous(id, &cs.name, format!("ergodicity of γ₋ωF not established at ω = {w:.4}")) };
                }
            }
        }
        details["frequencies"] = serde_json::to_value(&freqs).unwrap_or_default();
        let (_, _, aap) = ap_decompose_scaled(&g, &freqs, None, ccfg, scale);
        asserted.push(("psi_conv_aap", aap.member));
        details["psi_conv_report"] = serde_json::to_value(&aap).unwrap_or_default();
        if is_uc_scaled(f, ccfg, scale).is_yes() {
            let (_, _, faap) = ap_decompose_scaled(f, &freqs, None, ccfg, scale);
            asserted.push(("f_aap", faap.member));
        }
    }
    details["assertions"] = serde_json::to_value(&asserted).unwrap_or_default();
    if let Some((what, _)) = asserted.iter().find(|a| a.1 == Membership::No) {
        let mut r = CheckResult::new(id, &cs.name, CheckStatus::Fail, details);
        r.witness = Some(CheckWitness {
            signal: cs.name.clone(),
            params: params_json(cs),
            omega: None,
            tolerances: serde_json::to_value(ccfg).unwrap_or_default(),
            certificates: serde_json::json!({ "failed": what }),
        });
        return r;
    }
    if asserted.iter().all(|a| a.1 == Membership::Undecided) {
        return CheckResult { details, ..CheckResult::vacuous(id, &cs.name, "class tests inconclusive") };
    }
    CheckResult::new(id, &cs.name, CheckStatus::Pass, details)
}

/// Closed-form Fourier transforms of the corpus signals that have one in L¹.
pub fn closed_form_ft(name: &str) -> Option<fn(f64) -> f64> {
    match name {
        "zero" => Some(|_| 0.0),
        "sinc" => Some(|w| if w.abs() < 1.0 { std::f64::consts::PI } else { 0.0 }),
        "sinc2" => Some(sinc2_ft),
        _ => None,
    }
}

/// F*ψ(t) = (1/2π)∫ F̂(η)ψ̂(η)e^{itη} dη.
fn fourier_side(ft: fn(f64) -> f64, t: f64) -> C64 {
    let g = |eta: f64| C64::from_polar(ft(eta) * bump_psi_hat(eta), t * eta);
    let mut acc = C64::new(0.0, 0.0);
    // split at the kinks of the closed forms
    let knots = [-2.0, -1.0, 0.0, 1.0, 2.0];
    for w in knots.windows(2) {
        acc += integrate_c(&g, w[0], w[1], 1e-12);
    }
    acc / (2.0 * std::f64::consts::PI)
}

/// F with integrable F̂: F*ψ ∈ C₀(ℝ) and equals the inverse transform of F̂ψ̂.
pub fn check_regular_ft(cs: &CorpusSignal, cfg: &SuiteConfig) -> CheckResult {
    let id = "regular-ft";
    let Some(ft) = closed_form_ft(&cs.name) else {
        return CheckResult::vacuous(id, &cs.name, "no integrable closed-form Fourier transform");
    };
    let f = cs.carleman_record();
    if f.domain() != Domain::FullLine {
        return CheckResult::vacuous(id, &cs.name, "needs a full-line record");
    }
    let psi = match bump_kernel(f.dt()) {
        Ok(k) => k,
        Err(e) => return CheckResult::vacuous(id, &cs.name, e.to_string()),
    };
    let g = match convolve(&f.extended(), &psi) {
        Ok(g) => g.signal().clone(),
        Err(e) => return CheckResult::vacuous(id, &cs.name, e.to_string()),
    };
    let scale = f.sup_norm().max(g.sup_norm());
    let c0 = is_c0_scaled(&g, &cfg.classes, scale.max(1e-300));
    let stride = (g.len() / 40).max(1);
    let mut worst: f64 = 0.0;
    let mut at = 0.0;
    for i in (0..g.len()).step_by(stride) {
        let t = g.t(i);
        let d = (g.channel(0)[i] - fourier_side(ft, t)).norm();
        if d > worst {
            worst = d;
            at = t;
        }
    }
    let tol_conv = 1e-6 * (1.0 + scale);
    let ok_c0 = scale == 0.0 || c0.member != Membership::No;
    let pass = ok_c0 && worst <= tol_conv && (scale == 0.0 || c0.is_yes());
    let details = serde_json::json!({
        "c0": c0.member,
        "cross_check_error": worst,
        "cross_check_t": at,
        "tol_conv": tol_conv,
    });
    if !c0.is_yes() && c0.member == Membership::Undecided && worst <= tol_conv && scale > 0.0 {
        return CheckResult { details, ..CheckResult::vacuous(id, &cs.name, "C₀ test inconclusive") };
    }
    let mut r = CheckResult::new(id, &cs.name, if pass { CheckStatus::Pass } else { CheckStatus::Fail }, details);
    if !pass {
        r.witness = Some(CheckWitness {
            signal: cs.name.clone(),
            params: params_json(cs),
            omega: None,
            tolerances: serde_json::json!({ "tol_conv": tol_conv, "tol_c0": cfg.classes.tol_c0 }),
            certificates: serde_json::to_value(&c0).unwrap_or_default(),
        });
    }
    r
}

/// Outcome of one evolution run, kept for reporting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionOutcome {
    pub residual: f64,
    pub tol_ode: f64,
    pub sup_u: f64,
    pub allowed: Vec<f64>,
    pub singular_u: Vec<f64>,
    pub violations: Vec<f64>,
}

/// Laplace-spectrum analyses use this spacing.
const ANALYSIS_DT: f64 = 0.05;

fn for_analysis(s: &SampledSignal) -> SampledSignal {
    let stride = (ANALYSIS_DT / s.dt()).round().max(1.0) as usize;
    s.decimate(stride)
}

/// i·sp^ℒ(u) ⊂ (σ(A) ∩ iℝ) ∪ i·sp^ℒ(φ) for a bounded mild solution u; with
/// φ = 0 also sp_𝒜(u) ⊂ σ(A) ∩ iℝ for the class `class`.
pub fn check_evolution_spectrum(name: &str, p: &EvolutionProblem, class: Option<FunctionClass>, cfg: &SuiteConfig) -> (CheckResult, Option<EvolutionOutcome>) {
    let id = "evolution";
    let u = match solve_evolution(p) {
        Ok(u) => u,
        Err(e) => return (CheckResult::vacuous(id, name, e.to_string()), None),
    };
    let residual = integrated_residual(p, &u);
    let tol_ode = ode_tolerance(&u);
    if !is_bounded(&u).is_yes() {
        let mut r = CheckResult::vacuous(id, name, "mild solution is not bounded");
        r.details["residual"] = residual.into();
        return (r, None);
    }
    let run = || -> Result<EvolutionOutcome> {
        let anorm = p.a.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let eig = imaginary_axis_frequencies(&p.a, 1e-9 * (1.0 + anorm))?;
        let ua = for_analysis(&u);
        let pa = for_analysis(&p.phi);
        let su = laplace_spectrum(&ua, &cfg.grid, &cfg.transform)?;
        let mut allowed: Vec<f64> = eig.clone();
        if pa.sup_norm() > 0.0 {
            let sp = laplace_spectrum(&pa, &cfg.grid, &cfg.transform)?;
            // undecided points of φ are not evidence against the inclusion
            allowed.extend(sp.certificates.iter().filter(|c| c.status != Status::Regular).map(|c| c.omega));
        }
        let mut singular_u = su.singular_set();
        if let Some(cl) = class {
            if pa.sup_norm() == 0.0 {
                let mut o = ReducedOptions::new(cl, Family::S);
                o.delta_seq = cfg.delta_seq.clone();
                o.classes = cfg.classes.clone();
                let red = reduced_spectrum(&ua, &cfg.grid, o);
                let reduced_bad: Vec<f64> = red.singular_set().into_iter().filter(|w| eig.iter().all(|m| (m - w).abs() > cfg.grid_tol)).collect();
                singular_u.extend(reduced_bad);
            }
        }
        let violations: Vec<f64> =
            singular_u.iter().copied().filter(|w| allowed.iter().all(|m| (m - w).abs() > cfg.grid_tol)).collect();
        Ok(EvolutionOutcome { residual, tol_ode, sup_u: u.sup_norm(), allowed, singular_u, violations })
    };
    match run() {
        Err(e) => {
            let mut r = CheckResult::vacuous(id, name, e.to_string());
            r.details["residual"] = residual.into();
            (r, None)
        }
        Ok(out) => {
            let pass = out.violations.is_empty() && out.residual <= out.tol_ode;
            let mut r = CheckResult::new(id, name, if pass { CheckStatus::Pass } else { CheckStatus::Fail }, serde_json::to_value(&out).unwrap_or_default());
            if !pass {
                r.witness = Some(CheckWitness {
                    signal: name.into(),
                    params: serde_json::json!({ "dim": p.dim(), "dt": p.phi.dt(), "tmax": p.phi.t_end() }),
                    omega: out.violations.first().copied(),
                    tolerances: serde_json::json!({ "grid_tol": cfg.grid_tol, "tol_ode": out.tol_ode }),
                    certificates: serde_json::json!({ "singular_u": out.singular_u, "allowed": out.allowed }),
                });
            }
            (r, Some(out))
        }
    }
}

/// Worked evolution examples: rotation, forced damping, and a nilpotent
/// generator whose solution is unbounded.
pub fn evolution_examples(tmax: f64, dt: f64) -> Result<Vec<(String, EvolutionProblem)>> {
    use nalgebra::DMatrix;
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let zero_phi = |d: usize| SampledSignal::from_channels(Domain::HalfLine, 0.0, dt, vec![vec![z; (tmax / dt).round() as usize + 1]; d], Some(0));
    let rot = EvolutionProblem::new(DMatrix::from_element(1, 1, C64::new(0.0, 1.0)), zero_phi(1)?, vec![one])?;
    let forced = EvolutionProblem::new(
        DMatrix::from_element(1, 1, C64::new(-1.0, 0.0)),
        SampledSignal::half_line(tmax, dt, Some(0), |t| C64::from_polar(1.0, t))?,
        vec![z],
    )?;
    let nil = EvolutionProblem::new(DMatrix::from_row_slice(2, 2, &[z, one, z, z]), zero_phi(2)?, vec![z, one])?;
    Ok(vec![("rotation".into(), rot), ("forced-damped".into(), forced), ("nilpotent".into(), nil)])
}

fn check_selected(only: Option<&str>) -> Result<()> {
    match only {
        Some(o) if !CHECK_IDS.contains(&o) => Err(Error::Config(format!("unknown check {o:?}; known: {}", CHECK_IDS.join(", ")))),
        _ => Ok(()),
    }
}

/// Checks on one corpus signal, in a fixed order.
pub fn run_signal_checks(cs: &CorpusSignal, cfg: &SuiteConfig, only: Option<&str>) -> Result<Vec<CheckResult>> {
    check_selected(only)?;
    let want = |id: &str| only.map_or(true, |o| o == id);
    let mut out = Vec::new();
    let chain = if want("inclusion-chain") {
        Some(ChainSpectra::compute(cs, cfg))
    } else if want("ergodic") || want("tauberian") {
        // only the reduced C₀ spectrum is needed
        let red = cs.half_line().map(|h| reduced_spectrum(&h, &cfg.grid, cfg.reduced_options(FunctionClass::C0, cs))).map_err(|e| e.to_string());
        let skipped = || Err("skipped".to_string());
        Some(ChainSpectra { names: ChainSpectra::NAMES, spectra: vec![skipped(), red, skipped(), skipped(), skipped()] })
    } else {
        None
    };
    if want("inclusion-chain") {
        out.push(check_inclusion_chain(cs, chain.as_ref().unwrap(), cfg));
    }
    let red = chain.as_ref().and_then(|c| c.reduced_c0());
    if want("ergodic") {
        out.push(match red {
            Some(r) => check_ergodic_theorem(cs, r, FunctionClass::C0, cfg),
            None => CheckResult::vacuous("ergodic", &cs.name, "reduced spectrum unavailable"),
        });
    }
    if want("tauberian") {
        out.push(match red {
            Some(r) => check_tauberian(cs, r, cfg),
            None => CheckResult::vacuous("tauberian", &cs.name, "reduced spectrum unavailable"),
        });
    }
    if want("regular-ft") {
        out.push(check_regular_ft(cs, cfg));
    }
    Ok(out)
}

/// The worked evolution examples followed by `cfg.evolution_instances`
/// random bounded instances.
pub fn run_evolution_checks(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for (name, p) in evolution_examples(1200.0, 0.01)? {
        out.push(check_evolution_spectrum(&name, &p, Some(FunctionClass::C0), cfg).0);
    }
    for k in 0..cfg.evolution_instances {
        let seed = cfg.seed.wrapping_add(k as u64);
        let inst = crate::evolution::random_bounded_problem(seed, 1200.0, 0.01)?;
        out.push(check_evolution_spectrum(&format!("random-{seed}"), &inst.problem, None, cfg).0);
    }
    Ok(out)
}

/// Run the checks selected by `only` (all when None) over the corpus and the
/// evolution instances; results in deterministic order.
pub fn run_suite(corpus: &[CorpusSignal], cfg: &SuiteConfig, only: Option<&str>) -> Result<Vec<CheckResult>> {
    check_selected(only)?;
    let mut out = Vec::new();
    for cs in corpus {
        out.extend(run_signal_checks(cs, cfg, only)?);
    }
    if only.map_or(true, |o| o == "evolution") {
        out.extend(run_evolution_checks(cfg)?);
    }
    Ok(out)
}

/// (pass, fail, vacuous) counts.
pub fn tally(results: &[CheckResult]) -> (usize, usize, usize) {
    let c = |s: CheckStatus| results.iter().filter(|r| r.status == s).count();
    (c(CheckStatus::Pass), c(CheckStatus::Fail), c(CheckStatus::Vacuous))
}
