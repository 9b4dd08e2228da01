//! Spectrum engines: reduced Beurling spectrum by regular-point testing,
//! and the Laplace, Carleman and weak Laplace spectra from half-plane scans.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::classes::{ap_decompose_scaled, bohr_scan, detect, ClassConfig, ClassReport, FunctionClass, Membership};
use crate::convolution::{convolve_with, restrict_half_line, ConvOptions};
use crate::error::{Error, Result};
use crate::kernel::{bandpass_kernel_with_width, Family, TestKernel};
use crate::signal::{lattice_steps, Domain, SampledSignal};
use crate::transforms::{exp_sums, half_plane_scan, laplace_many, HalfPlaneGrid, Side, TransformValue};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl FrequencyGrid {
    pub fn new(min: f64, max: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !min.is_finite() || !max.is_finite() || max < min {
            return Err(Error::Config(format!("bad grid {min}:{max}:{step}")));
        }
        let g = FrequencyGrid { min, max, step };
        if g.len() < 3 {
            return Err(Error::Config("grid must have at least 3 points".into()));
        }
        Ok(g)
    }

    /// `min:max:step`
    pub fn parse(s: &str) -> Result<Self> {
        let p: Vec<&str> = s.split(':').collect();
        if p.len() != 3 {
            return Err(Error::Config(format!("grid must be min:max:step, got {s:?}")));
        }
        let v: Vec<f64> = p
            .iter()
            .map(|x| x.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad number {x:?} in grid"))))
            .collect::<Result<_>>()?;
        FrequencyGrid::new(v[0], v[1], v[2])
    }

    pub fn len(&self) -> usize {
        ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.min + k as f64 * self.step).collect()
    }
}

impl Default for FrequencyGrid {
    fn default() -> Self {
        FrequencyGrid { min: -5.0, max: 5.0, step: 0.1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Regular,
    Singular,
    Undecided,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Regular => 0,
            Status::Singular => 1,
            Status::Undecided => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpectrumKind {
    Reduced { class: FunctionClass, family: Family },
    Beurling,
    Carleman,
    Laplace,
    WeakLaplace,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelUse {
    pub id: String,
    pub delta: Option<f64>,
    /// |φ̂(ω)| by quadrature of the stored samples.
    pub ft_at_omega: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Attempt {
    pub kernel: KernelUse,
    pub report: ClassReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformEvidence {
    pub a_used: Vec<f64>,
    pub a_dropped: Vec<f64>,
    pub norms: Vec<f64>,
    pub scale: f64,
    pub peak_ratio: f64,
    pub extrapolation_gap: f64,
    pub tol_match: f64,
    /// ‖𝒞F(a+iω) − 𝒞F(−a+iω)‖ per a (Carleman only).
    pub jumps: Vec<f64>,
    pub jump_extrapolated: Option<f64>,
    pub disk_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowEvidence {
    pub eps: f64,
    pub l1_norms: Vec<f64>,
    pub extrapolation_gap: f64,
    pub tol: f64,
    pub status: Status,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum CertEvidence {
    Reduced { attempts: Vec<Attempt>, localized: Option<f64> },
    Transform(TransformEvidence),
    WeakLaplace { a_used: Vec<f64>, windows: Vec<WindowEvidence> },
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityCertificate {
    pub omega: f64,
    pub status: Status,
    pub kernel_used: Option<KernelUse>,
    pub evidence: CertEvidence,
    pub reason: Option<String>,
}

impl RegularityCertificate {
    fn undecided(omega: f64, reason: impl Into<String>) -> Self {
        RegularityCertificate { omega, status: Status::Undecided, kernel_used: None, evidence: CertEvidence::None, reason: Some(reason.into()) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEstimate {
    pub kind: SpectrumKind,
    pub grid: FrequencyGrid,
    pub certificates: Vec<RegularityCertificate>,
    /// Sidecars of the kernels used, for reuse.
    pub kernels: Vec<serde_json::Value>,
}

impl SpectrumEstimate {
    pub fn statuses(&self) -> Vec<Status> {
        self.certificates.iter().map(|c| c.status).collect()
    }

    pub fn singular_set(&self) -> Vec<f64> {
        self.certificates.iter().filter(|c| c.status == Status::Singular).map(|c| c.omega).collect()
    }

    pub fn count(&self, s: Status) -> usize {
        self.certificates.iter().filter(|c| c.status == s).count()
    }

    pub fn status_at(&self, omega: f64) -> Option<Status> {
        self.certificates.iter().find(|c| (c.omega - omega).abs() < 1e-9).map(|c| c.status)
    }

    pub fn kind_name(&self) -> String {
        match self.kind {
            SpectrumKind::Reduced { class, family } => format!("reduced({class:?},{family:?})"),
            SpectrumKind::Beurling => "beurling".into(),
            SpectrumKind::Carleman => "carleman".into(),
            SpectrumKind::Laplace => "laplace".into(),
            SpectrumKind::WeakLaplace => "weak-laplace".into(),
        }
    }

    /// {kind, grid, status, evidence}
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "kind": self.kind_name(),
            "grid": {"min": self.grid.min, "max": self.grid.max, "step": self.grid.step},
            "status": self.certificates.iter().map(|c| c.status).collect::<Vec<_>>(),
            "evidence": self.certificates,
            "kernels": self.kernels,
        })
    }

    /// `ω,status_code,metric` rows; the metric is the engine's main statistic.
    pub fn plot_csv(&self) -> String {
        let mut s = String::from("omega,status_code,metric\n");
        for c in &self.certificates {
            let metric = match &c.evidence {
                CertEvidence::Transform(t) => t.peak_ratio,
                CertEvidence::WeakLaplace { windows, .. } => windows.last().and_then(|w| w.l1_norms.last().copied()).unwrap_or(f64::NAN),
                CertEvidence::Reduced { attempts, .. } => attempts.last().map(|a| a.kernel.ft_at_omega).unwrap_or(f64::NAN),
                CertEvidence::None => f64::NAN,
            };
            s.push_str(&format!("{},{},{}\n", fmt12(c.omega), c.status.code(), fmt12(metric)));
        }
        s
    }
}

fn fmt12(x: f64) -> String {
    if !x.is_finite() {
        return "nan".into();
    }
    let v: f64 = format!("{x:.11e}").parse().unwrap();
    format!("{v}")
}

/// Kernel source for the regularity search beyond the band-pass ladder,
/// e.g. annihilators of exponential growth. Returns None where it has nothing.
pub type KernelProvider = Arc<dyn Fn(f64, f64) -> Result<Option<TestKernel>> + Send + Sync>;

#[derive(Clone)]
pub struct RegisteredKernel {
    pub id: String,
    pub family: Family,
    pub provider: KernelProvider,
}

impl std::fmt::Debug for RegisteredKernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "RegisteredKernel({})", self.id)
    }
}

#[derive(Clone, Debug)]
pub struct ReducedOptions {
    pub class: FunctionClass,
    pub family: Family,
    pub delta_seq: Vec<f64>,
    pub classes: ClassConfig,
    /// Spacing of the convolved samples handed to the detectors.
    pub output_step: f64,
    /// Band-pass half-width in units of 1/δ, capped at a quarter of the record.
    pub width_factor: f64,
    pub registered: Vec<RegisteredKernel>,
    /// Reference size for tolerances; ‖F‖∞ when None.
    pub scale: Option<f64>,
}

impl ReducedOptions {
    pub fn new(class: FunctionClass, family: Family) -> Self {
        ReducedOptions {
            class,
            family,
            delta_seq: vec![1.0, 0.5, 0.25],
            classes: ClassConfig::default(),
            output_step: 0.1,
            width_factor: 16.0,
            registered: Vec::new(),
            scale: None,
        }
    }
}

/// Regularity tester bound to one signal; band-pass kernels are built once
/// per δ and modulated to each ω.
pub struct ReducedEngine<'a> {
    f: &'a SampledSignal,
    opts: ReducedOptions,
    base: Vec<(f64, TestKernel)>,
    scale: f64,
    stride: usize,
}

impl<'a> ReducedEngine<'a> {
    pub fn new(f: &'a SampledSignal, opts: ReducedOptions) -> Result<Self> {
        if f.growth_exponent().is_none() && opts.family != Family::D {
            return Err(Error::Growth("no polynomial growth bound: only compactly supported kernels (family D) apply".into()));
        }
        let span = f.t_end() - f.t0();
        let mut base = Vec::new();
        for &d in &opts.delta_seq {
            let hw = (opts.width_factor / d).min(span / 4.0);
            base.push((d, bandpass_kernel_with_width(0.0, d, f.dt(), hw)?));
        }
        let scale = opts.scale.unwrap_or_else(|| f.sup_norm());
        let stride = lattice_steps(opts.output_step, f.dt()).filter(|s| *s >= 1).unwrap_or(1) as usize;
        Ok(ReducedEngine { f, opts, base, scale, stride })
    }

    fn convolved(&self, k: &TestKernel) -> Result<SampledSignal> {
        let g = convolve_with(&self.f.extended(), k, ConvOptions { stride: self.stride, range: None })?;
        match self.f.domain() {
            Domain::HalfLine => restrict_half_line(g.signal()),
            Domain::FullLine => Ok(g.signal().clone()),
        }
    }

    fn attempt(&self, k: &TestKernel, omega: f64, delta: Option<f64>, band: (f64, f64)) -> Result<(Attempt, SampledSignal)> {
        let ft = k.ft_quadrature(omega).norm();
        let g = self.convolved(k)?;
        let report = detect(&g, self.opts.class, &self.opts.classes, self.scale, band);
        Ok((Attempt { kernel: KernelUse { id: k.id().to_string(), delta, ft_at_omega: ft }, report }, g))
    }

    pub fn test(&self, omega: f64) -> RegularityCertificate {
        let mut attempts: Vec<Attempt> = Vec::new();
        let mut last_g: Option<(f64, SampledSignal)> = None;
        let mut errors = Vec::new();
        for (d, k) in &self.base {
            let km = k.modulate(omega);
            match self.attempt(&km, omega, Some(*d), (omega - 2.0 * d, omega + 2.0 * d)) {
                Ok((a, g)) => {
                    if a.kernel.ft_at_omega < 0.5 {
                        errors.push(format!("kernel {} has |φ̂(ω)| < 1/2", a.kernel.id));
                        continue;
                    }
                    if a.report.is_yes() {
                        let ku = a.kernel.clone();
                        attempts.push(a);
                        return RegularityCertificate {
                            omega,
                            status: Status::Regular,
                            kernel_used: Some(ku),
                            evidence: CertEvidence::Reduced { attempts, localized: None },
                            reason: None,
                        };
                    }
                    attempts.push(a);
                    last_g = Some((*d, g));
                }
                Err(e) => errors.push(e.to_string()),
            }
        }
        for r in &self.opts.registered {
            if self.opts.family == Family::D && r.family != Family::D {
                continue;
            }
            let k = match (r.provider)(omega, self.f.dt()) {
                Ok(Some(k)) => k,
                Ok(None) => continue,
                Err(e) => {
                    errors.push(e.to_string());
                    continue;
                }
            };
            let f0 = k.ft(omega);
            if f0.norm() < 1e-12 {
                continue;
            }
            let k = k.scaled(f0.inv());
            match self.attempt(&k, omega, None, (omega - 1.0, omega + 1.0)) {
                Ok((a, _)) => {
                    if a.kernel.ft_at_omega < 0.5 {
                        continue;
                    }
                    let yes = a.report.is_yes();
                    let ku = a.kernel.clone();
                    attempts.push(a);
                    if yes {
                        return RegularityCertificate {
                            omega,
                            status: Status::Regular,
                            kernel_used: Some(ku),
                            evidence: CertEvidence::Reduced { attempts, localized: None },
                            reason: None,
                        };
                    }
                }
                Err(e) => errors.push(e.to_string()),
            }
        }
        let ladder: Vec<&Attempt> = attempts.iter().filter(|a| a.kernel.delta.is_some()).collect();
        let all_no = !ladder.is_empty() && ladder.len() == self.base.len() && ladder.iter().all(|a| a.report.member == Membership::No);
        let mut localized = None;
        let mut reason = None;
        if all_no {
            // G = 𝔉*φ for the narrowest band: an AP part at ν* plus a C₀ rest
            // pins the obstruction to ν*
            let (d, g) = last_g.unwrap();
            let tol = self.opts.classes.tol_bohr * self.scale;
            let found = bohr_scan(&g, omega - 2.0 * d, omega + 2.0 * d, 0.02, tol, 4);
            if let Some(top) = found.iter().max_by(|a, b| a.norm().total_cmp(&b.norm())) {
                let cands: Vec<f64> = found.iter().map(|b| b.omega).collect();
                let (_, _, aap) = ap_decompose_scaled(&g, &cands, None, &self.opts.classes, self.scale);
                if aap.is_yes() {
                    localized = Some(top.omega);
                }
            }
            let dmin = self.base.iter().map(|b| b.0).fold(f64::INFINITY, f64::min);
            if let Some(nu) = localized {
                if (nu - omega).abs() <= dmin {
                    return RegularityCertificate {
                        omega,
                        status: Status::Singular,
                        kernel_used: None,
                        evidence: CertEvidence::Reduced { attempts, localized },
                        reason: None,
                    };
                }
                reason = Some(format!("obstruction localized at {nu:.4}, farther than δ_min from ω"));
            } else {
                reason = Some("no persistent frequency found in the narrowest band".into());
            }
        } else if !errors.is_empty() {
            reason = Some(errors.join("; "));
        }
        RegularityCertificate {
            omega,
            status: Status::Undecided,
            kernel_used: None,
            evidence: CertEvidence::Reduced { attempts, localized },
            reason: reason.or_else(|| Some("finite kernel search found no certificate".into())),
        }
    }

    pub fn spectrum(&self, grid: &FrequencyGrid) -> SpectrumEstimate {
        let certificates = grid.points().into_iter().map(|w| self.test(w)).collect();
        SpectrumEstimate {
            kind: SpectrumKind::Reduced { class: self.opts.class, family: self.opts.family },
            grid: *grid,
            certificates,
            kernels: self.base.iter().map(|(_, k)| k.sidecar_json()).collect(),
        }
    }
}

/// Regularity test at one ω with the default band-pass ladder.
pub fn test_regular(f: &SampledSignal, omega: f64, class: FunctionClass, family: Family, delta_seq: &[f64]) -> RegularityCertificate {
    let mut opts = ReducedOptions::new(class, family);
    opts.delta_seq = delta_seq.to_vec();
    match ReducedEngine::new(f, opts) {
        Ok(e) => e.test(omega),
        Err(e) => RegularityCertificate::undecided(omega, e.to_string()),
    }
}

pub fn reduced_spectrum(f: &SampledSignal, grid: &FrequencyGrid, opts: ReducedOptions) -> SpectrumEstimate {
    let kind = SpectrumKind::Reduced { class: opts.class, family: opts.family };
    match ReducedEngine::new(f, opts) {
        Ok(e) => e.spectrum(grid),
        Err(e) => SpectrumEstimate {
            kind,
            grid: *grid,
            certificates: grid.points().into_iter().map(|w| RegularityCertificate::undecided(w, e.to_string())).collect(),
            kernels: vec![],
        },
    }
}

/// Beurling spectrum: class {0}, kernels in L¹.
pub fn beurling_spectrum(f: &SampledSignal, grid: &FrequencyGrid) -> SpectrumEstimate {
    let mut s = reduced_spectrum(f, grid, ReducedOptions::new(FunctionClass::Zero, Family::L1));
    s.kind = SpectrumKind::Beurling;
    s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformOptions {
    pub a_seq: Vec<f64>,
    pub blowup_thresh: f64,
    pub tol_match_rel: f64,
    pub tol_analytic_rel: f64,
    pub disk_nodes: usize,
    pub disk_radius: f64,
    pub eps: Vec<f64>,
}

impl Default for TransformOptions {
    fn default() -> Self {
        TransformOptions {
            a_seq: vec![0.4, 0.2, 0.1, 0.05, 0.025],
            blowup_thresh: 10.0,
            tol_match_rel: 1e-3,
            tol_analytic_rel: 1e-3,
            disk_nodes: 64,
            disk_radius: 0.9,
            eps: vec![0.25, 0.5],
        }
    }
}

/// Polynomial extrapolation of (x_i, y_i) to x = 0 (Neville).
pub fn neville_at_zero(x: &[f64], y: &[Vec<C64>]) -> Vec<C64> {
    let n = x.len();
    let d = y[0].len();
    let mut p: Vec<Vec<C64>> = y.to_vec();
    for m in 1..n {
        for i in 0..n - m {
            let (xi, xj) = (x[i], x[i + m]);
            for c in 0..d {
                p[i][c] = (xj * p[i][c] - xi * p[i + 1][c]) / (xj - xi);
            }
        }
    }
    p[0].clone()
}

fn vnorm(v: &[C64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn vdiff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.retain(|x| x.is_finite());
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Gap between the extrapolations to a = 0 from all valid a's and from one
/// fewer (the largest dropped).
fn extrapolation(a: &[f64], v: &[Vec<C64>]) -> (Vec<C64>, f64) {
    let all = neville_at_zero(a, v);
    let fewer = neville_at_zero(&a[1..], &v[1..]);
    let gap = vdiff(&all, &fewer);
    (all, gap)
}

struct Side1 {
    a: Vec<f64>,
    dropped: Vec<f64>,
    vals: Vec<Vec<C64>>,
    norms: Vec<f64>,
}

fn collect_side(a_seq: &[f64], rows: &[Vec<TransformValue>], j: usize) -> Side1 {
    let mut s = Side1 { a: vec![], dropped: vec![], vals: vec![], norms: vec![] };
    for (k, row) in rows.iter().enumerate() {
        let v = &row[j];
        if v.tail.ok {
            s.a.push(a_seq[k]);
            s.norms.push(vnorm(&v.value));
            s.vals.push(v.value.clone());
        } else {
            s.dropped.push(a_seq[k]);
        }
    }
    s
}

fn side_scale(a_seq: &[f64], rows: &[Vec<TransformValue>], n: usize) -> f64 {
    median((0..n).filter_map(|j| collect_side(a_seq, rows, j).norms.last().copied()).collect())
}

/// The last two steps each grow by at least 5%: poles double per halving of
/// a, logarithmic singularities gain a fixed amount, bounded values stall.
fn growing(norms: &[f64]) -> bool {
    let k = norms.len();
    k >= 3 && norms[k - 1] > 1.05 * norms[k - 2] && norms[k - 2] > 1.05 * norms[k - 3]
}

/// Cauchy-integral check: ℒF at a/2 + iω rebuilt from the circle |λ − (a+iω)| = r·a.
/// With c = a + iω the rebuild error is Σ w_n F_n e^{−c t_n} E_a(t_n), where
/// E_a(t) = (1/M)Σ_m e^{−ρ_m t} ρ_m/(ρ_m + a/2) − e^{at/2}, ρ_m = r·a·e^{iθ_m}.
fn disk_errors(f: &SampledSignal, points: &[(f64, f64)], opts: &TransformOptions) -> Result<Vec<f64>> {
    let x = forward_part(f)?;
    let n = x[0].len();
    let dt = f.dt();
    let m = opts.disk_nodes;
    let mut out = vec![0.0; points.len()];
    let mut by_a: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (i, p) in points.iter().enumerate() {
        by_a.entry(p.0.to_bits()).or_default().push(i);
    }
    for (bits, idx) in by_a {
        let a = f64::from_bits(bits);
        let rho: Vec<C64> = (0..m).map(|q| C64::from_polar(opts.disk_radius * a, 2.0 * PI * q as f64 / m as f64)).collect();
        let mut e = vec![C64::new(0.0, 0.0); n];
        for r in &rho {
            let g = r / (r + 0.5 * a) / m as f64;
            let step = (-r * dt).exp();
            let mut z = C64::new(1.0, 0.0);
            for (i, v) in e.iter_mut().enumerate() {
                if i % 512 == 0 {
                    z = (-r * (i as f64 * dt)).exp();
                }
                *v += g * z;
                z *= step;
            }
        }
        for (i, v) in e.iter_mut().enumerate() {
            *v -= (0.5 * a * i as f64 * dt).exp();
        }
        let y: Vec<Vec<C64>> = x.iter().map(|c| c.iter().zip(&e).map(|(u, w)| u * w).collect()).collect();
        let lams: Vec<C64> = idx.iter().map(|&i| C64::new(a, points[i].1)).collect();
        for (k, (v, _)) in exp_sums(&y, dt, &lams).into_iter().enumerate() {
            out[idx[k]] = vnorm(&v);
        }
    }
    Ok(out)
}

fn forward_part(f: &SampledSignal) -> Result<Vec<Vec<C64>>> {
    let k0 = lattice_steps(-f.t0(), f.dt())
        .filter(|k| *k >= 0 && (*k as usize) < f.len())
        .ok_or_else(|| Error::Horizon("record does not contain t = 0".into()))? as usize;
    Ok(f.channels().iter().map(|c| c[k0..].to_vec()).collect())
}

fn need_half_line(f: &SampledSignal, what: &str) -> Result<()> {
    if f.domain() != Domain::HalfLine {
        return Err(Error::Domain(format!("{what} needs a half-line signal")));
    }
    Ok(())
}

fn failed(kind: SpectrumKind, grid: &FrequencyGrid, e: Error) -> SpectrumEstimate {
    SpectrumEstimate {
        kind,
        grid: *grid,
        certificates: grid.points().into_iter().map(|w| RegularityCertificate::undecided(w, e.to_string())).collect(),
        kernels: vec![],
    }
}

pub fn laplace_spectrum(f: &SampledSignal, grid: &FrequencyGrid, opts: &TransformOptions) -> Result<SpectrumEstimate> {
    need_half_line(f, "Laplace spectrum")?;
    let omegas = grid.points();
    let scan = half_plane_scan(f, &omegas, &opts.a_seq, Side::Right)?;
    let scale = side_scale(&opts.a_seq, &scan.right, omegas.len());
    let tol_match = opts.tol_match_rel * scale;
    let mut certs = Vec::new();
    let mut disk_points = Vec::new();
    for (j, &w) in omegas.iter().enumerate() {
        let s = collect_side(&opts.a_seq, &scan.right, j);
        let mut ev = TransformEvidence {
            a_used: s.a.clone(),
            a_dropped: s.dropped.clone(),
            norms: s.norms.clone(),
            scale,
            peak_ratio: s.norms.iter().copied().fold(0.0, f64::max) / scale.max(1e-300),
            extrapolation_gap: f64::NAN,
            tol_match,
            jumps: vec![],
            jump_extrapolated: None,
            disk_error: None,
        };
        if s.a.len() < 4 {
            certs.push(RegularityCertificate {
                omega: w,
                status: Status::Undecided,
                kernel_used: None,
                evidence: CertEvidence::Transform(ev),
                reason: Some(format!("tail check left {} usable a values (need 4)", s.a.len())),
            });
            continue;
        }
        let (_, gap) = extrapolation(&s.a, &s.vals);
        ev.extrapolation_gap = gap;
        let status = if ev.peak_ratio > opts.blowup_thresh && growing(&s.norms) {
            Status::Singular
        } else if gap <= tol_match {
            let k = s.a.len();
            disk_points.push((certs.len(), [(s.a[k - 2], w), (s.a[k - 1], w)]));
            Status::Regular
        } else {
            Status::Undecided
        };
        certs.push(RegularityCertificate { omega: w, status, kernel_used: None, evidence: CertEvidence::Transform(ev), reason: None });
    }
    let pts: Vec<(f64, f64)> = disk_points.iter().flat_map(|(_, p)| p.iter().copied()).collect();
    if !pts.is_empty() {
        let errs = disk_errors(f, &pts, opts)?;
        let tol_an = opts.tol_analytic_rel * scale;
        for (i, (idx, _)) in disk_points.iter().enumerate() {
            let e = errs[2 * i].max(errs[2 * i + 1]);
            let c = &mut certs[*idx];
            if let CertEvidence::Transform(t) = &mut c.evidence {
                t.disk_error = Some(e);
            }
            if e > tol_an {
                c.status = Status::Undecided;
                c.reason = Some(format!("Cauchy-integral continuation error {e:.3e} above {tol_an:.3e}"));
            }
        }
    }
    Ok(SpectrumEstimate { kind: SpectrumKind::Laplace, grid: *grid, certificates: certs, kernels: vec![] })
}

/// Carleman spectrum; a half-line record stands for its zero extension.
pub fn carleman_spectrum(f: &SampledSignal, grid: &FrequencyGrid, opts: &TransformOptions) -> Result<SpectrumEstimate> {
    let omegas = grid.points();
    let full = match f.domain() {
        Domain::FullLine => f.clone(),
        Domain::HalfLine => f.extend_by_zero(-f.t_end())?.signal().clone(),
    };
    let scan: HalfPlaneGrid = half_plane_scan(&full, &omegas, &opts.a_seq, Side::Both)?;
    let scale = median(
        (0..omegas.len())
            .filter_map(|j| {
                let r = collect_side(&opts.a_seq, &scan.right, j).norms.last().copied()?;
                let l = collect_side(&opts.a_seq, &scan.left, j).norms.last().copied()?;
                Some(r.max(l))
            })
            .collect(),
    );
    let tol_match = opts.tol_match_rel * scale;
    let mut certs = Vec::new();
    for (j, &w) in omegas.iter().enumerate() {
        let r = collect_side(&opts.a_seq, &scan.right, j);
        let l = collect_side(&opts.a_seq, &scan.left, j);
        // a values usable on both sides
        let common: Vec<f64> = r.a.iter().copied().filter(|a| l.a.contains(a)).collect();
        let pick = |s: &Side1| -> Vec<Vec<C64>> {
            common.iter().map(|a| s.vals[s.a.iter().position(|x| x == a).unwrap()].clone()).collect()
        };
        let (rv, lv) = (pick(&r), pick(&l));
        let norms: Vec<f64> = rv.iter().zip(&lv).map(|(x, y)| vnorm(x).max(vnorm(y))).collect();
        let jumps: Vec<f64> = rv.iter().zip(&lv).map(|(x, y)| vdiff(x, y)).collect();
        let mut ev = TransformEvidence {
            a_used: common.clone(),
            a_dropped: opts.a_seq.iter().copied().filter(|a| !common.contains(a)).collect(),
            norms: norms.clone(),
            scale,
            peak_ratio: norms.iter().copied().fold(0.0, f64::max) / scale.max(1e-300),
            extrapolation_gap: f64::NAN,
            tol_match,
            jumps: jumps.clone(),
            jump_extrapolated: None,
            disk_error: None,
        };
        if common.len() < 4 {
            certs.push(RegularityCertificate {
                omega: w,
                status: Status::Undecided,
                kernel_used: None,
                evidence: CertEvidence::Transform(ev),
                reason: Some(format!("tail check left {} usable a values (need 4)", common.len())),
            });
            continue;
        }
        let (er, gr) = extrapolation(&common, &rv);
        let (el, gl) = extrapolation(&common, &lv);
        let jump0 = vdiff(&er, &el);
        ev.extrapolation_gap = gr.max(gl);
        ev.jump_extrapolated = Some(jump0);
        let jk = *jumps.last().unwrap();
        let blowup = ev.peak_ratio > opts.blowup_thresh && growing(&norms);
        let jump_persists = jump0 > 0.5 * jk && jk > 100.0 * tol_match;
        let status = if blowup || jump_persists {
            Status::Singular
        } else if gr <= tol_match && gl <= tol_match && jump0 <= 2.0 * tol_match {
            Status::Regular
        } else {
            Status::Undecided
        };
        certs.push(RegularityCertificate { omega: w, status, kernel_used: None, evidence: CertEvidence::Transform(ev), reason: None });
    }
    Ok(SpectrumEstimate { kind: SpectrumKind::Carleman, grid: *grid, certificates: certs, kernels: vec![] })
}

/// ℒF(a + iν) on ν_min + jΔν by one FFT of the damped, pre-modulated record
/// folded modulo M = 2π/(dt·Δν).
fn laplace_line(x: &[Vec<C64>], dt: f64, a: f64, nu_min: f64, m: usize) -> Vec<Vec<C64>> {
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(m);
    let n = x[0].len();
    x.iter()
        .map(|ch| {
            let mut buf = vec![C64::new(0.0, 0.0); m];
            for (i, v) in ch.iter().enumerate() {
                let t = i as f64 * dt;
                let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
                buf[i % m] += v * w * C64::from_polar((-a * t).exp(), -nu_min * t) * dt;
            }
            fft.process(&mut buf);
            buf
        })
        .collect()
}

pub fn weak_laplace_spectrum(f: &SampledSignal, grid: &FrequencyGrid, opts: &TransformOptions) -> Result<SpectrumEstimate> {
    need_half_line(f, "weak Laplace spectrum")?;
    let omegas = grid.points();
    let dt = f.dt();
    // tails judged on the coarse grid
    let coarse: Vec<Vec<TransformValue>> = opts
        .a_seq
        .iter()
        .map(|&a| laplace_many(f, &omegas.iter().map(|&w| C64::new(a, w)).collect::<Vec<_>>()))
        .collect::<Result<_>>()?;
    let mut a_used = Vec::new();
    for (k, row) in coarse.iter().enumerate() {
        if row.iter().all(|v| v.tail.ok) {
            a_used.push(opts.a_seq[k]);
        }
    }
    let scale = side_scale(&opts.a_seq, &coarse, omegas.len());
    if a_used.len() < 4 {
        let e = Error::Tail(format!("only {} a values pass the tail check (need 4)", a_used.len()));
        return Ok(failed(SpectrumKind::WeakLaplace, grid, e));
    }
    let eps_max = opts.eps.iter().copied().fold(0.0, f64::max);
    let eps_min = opts.eps.iter().copied().fold(f64::INFINITY, f64::min);
    let a_min = *a_used.last().unwrap();
    let dnu_target = (a_min / 5.0).min(eps_min / 25.0);
    let m = ((2.0 * PI / (dt * dnu_target)).ceil() as usize).next_power_of_two();
    let dnu = 2.0 * PI / (m as f64 * dt);
    let nu_min = grid.min - eps_max - dnu;
    let x = forward_part(f)?;
    let lines: Vec<Vec<Vec<C64>>> = a_used.iter().map(|&a| laplace_line(&x, dt, a, nu_min, m)).collect();
    let d = f.dim();
    let value = |k: usize, j: usize| -> Vec<C64> { (0..d).map(|c| lines[k][c][j]).collect() };
    let mut certs = Vec::new();
    for &w in &omegas {
        let mut windows = Vec::new();
        for &eps in &opts.eps {
            let j0 = ((w - eps - nu_min) / dnu).ceil() as usize;
            let j1 = ((w + eps - nu_min) / dnu).floor() as usize;
            let l1: Vec<f64> = (0..a_used.len())
                .map(|k| (j0..=j1).map(|j| vnorm(&value(k, j))).sum::<f64>() * dnu)
                .collect();
            let mut gap = 0.0;
            for j in j0..=j1 {
                let vals: Vec<Vec<C64>> = (0..a_used.len()).map(|k| value(k, j)).collect();
                let (_, g) = extrapolation(&a_used, &vals);
                gap += g * dnu;
            }
            let nk = *l1.last().unwrap();
            let tol = 1e-3 * nk.max(2.0 * eps * scale);
            let k = l1.len();
            let (d1, d2) = (l1[k - 2] - l1[k - 3], l1[k - 1] - l1[k - 2]);
            let diverging = d1 > 0.02 * nk && d2 >= 0.7 * d1 && d2 > 0.05 * nk;
            let status = if gap <= tol {
                Status::Regular
            } else if diverging {
                Status::Singular
            } else {
                Status::Undecided
            };
            windows.push(WindowEvidence { eps, l1_norms: l1, extrapolation_gap: gap, tol, status });
        }
        let first = windows[0].status;
        let agree = windows.iter().all(|x| x.status == first);
        let status = if agree { first } else { Status::Undecided };
        let reason = (!agree).then(|| "window widths disagree".to_string());
        certs.push(RegularityCertificate {
            omega: w,
            status,
            kernel_used: None,
            evidence: CertEvidence::WeakLaplace { a_used: a_used.clone(), windows },
            reason,
        });
    }
    Ok(SpectrumEstimate { kind: SpectrumKind::WeakLaplace, grid: *grid, certificates: certs, kernels: vec![] })
}

/// Status per grid point for several estimates on the same grid.
pub fn status_table(estimates: &[&SpectrumEstimate]) -> BTreeMap<i64, Vec<Status>> {
    let mut out = BTreeMap::new();
    for e in estimates {
        for c in &e.certificates {
            out.entry((c.omega * 1e6).round() as i64).or_insert_with(Vec::new).push(c.status);
        }
    }
    out
}
