//! Built-in synthetic signals with their expected properties.

use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::convolution::restrict_half_line;
use crate::error::{Error, Result};
use crate::kernel::{annihilator_support, exp_annihilator, Family};
use crate::quadrature::bump;
use crate::signal::{Domain, SampledSignal};
use crate::spectra::RegisteredKernel;

/// Why an expectation holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    /// Stated as a theorem or example in the theory.
    Theorem,
    /// Immediate from the definitions.
    Definition,
    /// Worked out by direct calculation or an independent numerical oracle.
    Calculation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Expectation {
    pub property: String,
    pub value: String,
    pub basis: Basis,
}

fn expect(property: &str, value: &str, basis: Basis) -> Expectation {
    Expectation { property: property.into(), value: value.into(), basis }
}

/// Record length and spacing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub tmax: f64,
    pub dt: f64,
}

#[derive(Clone)]
pub struct CorpusSignal {
    pub name: String,
    pub params: SynthParams,
    /// The analysed record (half-line, or full-line for signals defined on ℝ).
    pub signal: SampledSignal,
    /// A two-sided version for the Carleman transform, when one is natural.
    pub two_sided: Option<SampledSignal>,
    pub expectations: Vec<Expectation>,
    pub registered: Vec<RegisteredKernel>,
}

impl std::fmt::Debug for CorpusSignal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CorpusSignal").field("name", &self.name).field("params", &self.params).finish()
    }
}

impl CorpusSignal {
    /// The half-line part F|ℝ₊.
    pub fn half_line(&self) -> Result<SampledSignal> {
        match self.signal.domain() {
            Domain::HalfLine => Ok(self.signal.clone()),
            Domain::FullLine => restrict_half_line(&self.signal),
        }
    }

    /// The record whose Carleman transform is taken: the two-sided version,
    /// else the signal itself (a half-line record stands for its zero extension).
    pub fn carleman_record(&self) -> &SampledSignal {
        match (&self.two_sided, self.signal.domain()) {
            (Some(s), _) => s,
            _ => &self.signal,
        }
    }

    /// JSON metadata written next to a synthesized CSV.
    pub fn metadata(&self) -> serde_json::Value {
        serde_json::json!({
            "name": self.name,
            "params": self.params,
            "domain": self.signal.domain(),
            "t0": self.signal.t0(),
            "dt": self.signal.dt(),
            "len": self.signal.len(),
            "growth_exponent": self.signal.growth_exponent(),
            "expectations": self.expectations,
            "registered_kernels": self.registered.iter().map(|r| r.id.clone()).collect::<Vec<_>>(),
        })
    }
}

pub const NAMES: &[&str] = &[
    "zero",
    "const",
    "exp_i0",
    "exp_i1",
    "exp_isqrt2",
    "decay_exp",
    "decay_inv",
    "chirp",
    "chirp_mollified",
    "expgrow",
    "sinc",
    "sinc2",
    "ap_sum",
    "aap_mix",
    "so_composite",
    "inv_mod",
    "tchirp",
];

/// Default record for `name`.
pub fn default_params(name: &str) -> SynthParams {
    match name {
        "chirp" | "chirp_mollified" | "tchirp" => SynthParams { tmax: 300.0, dt: 0.005 },
        "expgrow" => SynthParams { tmax: 20.0, dt: 0.01 },
        _ => SynthParams { tmax: 1200.0, dt: 0.05 },
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn cis(x: f64) -> C64 {
    C64::from_polar(1.0, x)
}

fn sinc(t: f64) -> f64 {
    if t.abs() < 1e-8 {
        1.0 - t * t / 6.0
    } else {
        t.sin() / t
    }
}

/// Spikes of height 1 at t = 20n with half-width 3/√n: not uniformly
/// continuous, but their local L¹ mass tends to 0.
pub fn spikes(t: f64) -> f64 {
    if t < 10.0 {
        return 0.0;
    }
    let n = (t / 20.0).round().max(1.0);
    let w = 3.0 / n.sqrt();
    bump((t - 20.0 * n) / w)
}

/// Kernel provider for e^t: the annihilating kernel with support adapted to ω.
pub fn exp_annihilator_provider() -> RegisteredKernel {
    RegisteredKernel {
        id: "exp-annihilator".into(),
        family: Family::D,
        provider: Arc::new(|w, dt| exp_annihilator(annihilator_support(w), dt).map(Some)),
    }
}

/// Build a corpus signal by name with the given record.
pub fn synth(name: &str, p: SynthParams) -> Result<CorpusSignal> {
    use Basis::*;
    let (tmax, dt) = (p.tmax, p.dt);
    let half = |f: &dyn Fn(f64) -> C64, g: Option<u32>| SampledSignal::half_line(tmax, dt, g, f);
    let full = |f: &dyn Fn(f64) -> C64, g: Option<u32>| SampledSignal::full_line(tmax, dt, g, f);
    let mut registered = Vec::new();
    let (signal, two_sided, ex) = match name {
        "zero" => (
            half(&|_| c(0.0, 0.0), Some(0))?,
            Some(full(&|_| c(0.0, 0.0), Some(0))?),
            vec![expect("all spectra", "empty", Definition), expect("class", "C0", Definition)],
        ),
        "const" => (
            half(&|_| c(1.0, 0.0), Some(0))?,
            Some(full(&|_| c(1.0, 0.0), Some(0))?),
            vec![expect("reduced C0 spectrum", "{0}", Calculation), expect("ergodic mean", "1", Definition)],
        ),
        "exp_i0" | "exp_i1" | "exp_isqrt2" => {
            let w0 = match name {
                "exp_i0" => 0.0,
                "exp_i1" => 1.0,
                _ => SQRT_2,
            };
            (
                half(&|t| cis(w0 * t), Some(0))?,
                Some(full(&|t| cis(w0 * t), Some(0))?),
                vec![
                    expect("laplace spectrum", &format!("{{{w0}}}"), Calculation),
                    expect("reduced C0 spectrum", &format!("{{{w0}}}"), Calculation),
                    expect("class", "AP", Definition),
                ],
            )
        }
        "decay_exp" => (
            half(&|t| c((-t).exp(), 0.0), Some(0))?,
            None,
            vec![expect("all half-line spectra", "empty", Calculation), expect("class", "C0", Definition)],
        ),
        "decay_inv" => (
            half(&|t| c(1.0 / (1.0 + t), 0.0), Some(0))?,
            Some(full(&|t| c(1.0 / (1.0 + t.abs()), 0.0), Some(0))?),
            vec![expect("reduced C0 spectrum", "empty", Theorem), expect("class", "C0", Definition)],
        ),
        "chirp" => (
            half(&|t| cis(t * t), Some(0))?,
            Some(full(&|t| cis(t * t), Some(0))?),
            vec![
                expect("carleman spectrum", "R", Theorem),
                expect("laplace spectrum", "empty", Theorem),
                expect("reduced C0 spectrum", "empty", Theorem),
                expect("ergodic mean", "0", Calculation),
            ],
        ),
        "chirp_mollified" => {
            let h = 1.0;
            let m = |s: SampledSignal| s.mollify(h);
            (
                m(half(&|t| cis(t * t), Some(0))?)?,
                Some(m(full(&|t| cis(t * t), Some(0))?)?),
                vec![expect("class", "C0", Theorem), expect("mollifier width", "1", Definition)],
            )
        }
        "expgrow" => {
            registered.push(exp_annihilator_provider());
            (
                full(&|t| c(t.exp(), 0.0), None)?,
                None,
                vec![
                    expect("reduced C0 spectrum (family D)", "empty", Theorem),
                    expect("F*psi", "c e^t", Theorem),
                ],
            )
        }
        "sinc" => (
            full(&|t| c(sinc(t), 0.0), Some(0))?,
            None,
            vec![expect("carleman spectrum", "[-1,1]", Calculation), expect("class", "C0", Definition)],
        ),
        "sinc2" => (
            full(&|t| c(sinc(t).powi(2), 0.0), Some(0))?,
            None,
            vec![
                expect("fourier transform", "pi(1-|w|/2)_+", Calculation),
                expect("F*psi", "C0", Theorem),
            ],
        ),
        "ap_sum" => (
            half(&|t| cis(t) + cis(SQRT_2 * t), Some(0))?,
            Some(full(&|t| cis(t) + cis(SQRT_2 * t), Some(0))?),
            vec![expect("reduced C0 spectrum", "{1, sqrt2}", Calculation), expect("class", "AP", Definition)],
        ),
        "aap_mix" => (
            half(&|t| cis(t) + (-t).exp(), Some(0))?,
            None,
            vec![expect("reduced C0 spectrum", "{1}", Calculation), expect("class", "AAP", Definition)],
        ),
        "so_composite" => (
            half(&|t| cis((1.0 + t).sqrt()) + spikes(t), Some(0))?,
            None,
            vec![expect("class", "SO, not UC", Calculation)],
        ),
        "inv_mod" => (
            half(&|t| cis(t) / (1.0 + t), Some(0))?,
            Some(full(&|t| cis(t) / (1.0 + t.abs()), Some(0))?),
            vec![expect("reduced C0 spectrum", "empty", Theorem)],
        ),
        "tchirp" => (
            half(&|t| cis(t * t) * t, Some(1))?,
            None,
            vec![expect("class", "unbounded, not SO", Calculation)],
        ),
        _ => return Err(Error::Config(format!("unknown corpus signal {name:?}; known: {}", NAMES.join(", ")))),
    };
    Ok(CorpusSignal { name: name.into(), params: p, signal, two_sided, expectations: ex, registered })
}

pub fn builtin(name: &str) -> Result<CorpusSignal> {
    synth(name, default_params(name))
}

/// The whole corpus at default records.
pub fn builtin_corpus() -> Result<Vec<CorpusSignal>> {
    NAMES.iter().map(|n| builtin(n)).collect()
}

/// A corpus entry read from a signal file and its optional JSON sidecar
/// (as written next to synthesized files).
pub fn from_record(name: &str, signal: SampledSignal, sidecar: Option<&serde_json::Value>) -> Result<CorpusSignal> {
    let mut signal = signal;
    let mut expectations = Vec::new();
    let mut registered = Vec::new();
    let mut params = SynthParams { tmax: signal.t_end(), dt: signal.dt() };
    if let Some(m) = sidecar {
        if let Some(g) = m.get("growth_exponent") {
            let g: Option<u32> = serde_json::from_value(g.clone()).map_err(|e| Error::Config(format!("sidecar growth_exponent: {e}")))?;
            signal = signal.with_growth(g);
        }
        if let Some(p) = m.get("params") {
            params = serde_json::from_value(p.clone()).map_err(|e| Error::Config(format!("sidecar params: {e}")))?;
        }
        if let Some(x) = m.get("expectations") {
            expectations = serde_json::from_value(x.clone()).map_err(|e| Error::Config(format!("sidecar expectations: {e}")))?;
        }
        for id in m.get("registered_kernels").and_then(|v| v.as_array()).into_iter().flatten() {
            match id.as_str() {
                Some("exp-annihilator") => registered.push(exp_annihilator_provider()),
                other => return Err(Error::Config(format!("unknown registered kernel {other:?}"))),
            }
        }
    }
    Ok(CorpusSignal { name: name.into(), params, signal, two_sided: None, expectations, registered })
}

/// ∫ e^{−s}ψ(s) ds for a kernel given by samples: the constant c in
/// (e^t)*ψ = c·e^t.
pub fn exp_moment(k: &SampledSignal) -> C64 {
    let v: Vec<C64> = (0..k.len()).map(|i| k.channel(0)[i] * (-k.t(i)).exp()).collect();
    crate::quadrature::trapezoid(&v, k.dt())
}

/// Fourier transform of sinc², π(1 − |ω|/2)₊.
pub fn sinc2_ft(w: f64) -> f64 {
    PI * (1.0 - 0.5 * w.abs()).max(0.0)
}
