//! Detectors for the function classes {0}, C₀, bounded, UC, ergodic, AP,
//! AAP and slowly oscillating, on finite records.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::bump;
use crate::signal::{cumulative_trapezoid, Domain, Mean, SampledSignal};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FunctionClass {
    Zero,
    C0,
    Bounded,
    UC,
    Ergodic,
    ErgodicMeanZero,
    AP,
    AAP,
    SlowlyOscillating,
}

impl FunctionClass {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "zero" | "0" => FunctionClass::Zero,
            "c0" => FunctionClass::C0,
            "bounded" => FunctionClass::Bounded,
            "uc" => FunctionClass::UC,
            "ergodic" => FunctionClass::Ergodic,
            "ergodicmeanzero" | "e0" => FunctionClass::ErgodicMeanZero,
            "ap" => FunctionClass::AP,
            "aap" => FunctionClass::AAP,
            "so" | "slowlyoscillating" => FunctionClass::SlowlyOscillating,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    Yes,
    No,
    Undecided,
}

/// A sample that violates a defining bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub t: f64,
    pub value: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BohrCoefficient {
    pub omega: f64,
    pub a: Vec<C64>,
}

impl BohrCoefficient {
    pub fn norm(&self) -> f64 {
        self.a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Sup of ‖F‖ over one distance band from the origin of the record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub lo: f64,
    pub hi: f64,
    pub sup: f64,
    pub t_at: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Evidence {
    Sup { sup: f64, t_at: f64 },
    Tail { checkpoints: Vec<f64>, tail_sups: Vec<f64>, blocks: Vec<Block>, decay_exponent: Option<f64>, fit_r2: Option<f64> },
    Growth { blocks: Vec<Block>, slope: Option<f64> },
    Ergodic { horizons: Vec<f64>, deviations: Vec<f64>, mean: Vec<C64>, window: (f64, f64) },
    Modulus { lags: Vec<f64>, modulus: Vec<f64>, block_lipschitz: Vec<f64> },
    Bohr { coefficients: Vec<BohrCoefficient>, remainder: Box<ClassReport> },
    Split { h: f64, split_time: f64, u: Box<ClassReport>, xi: Box<ClassReport> },
}

/// Absolute tolerances in force for one report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub scale: f64,
    pub tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub class: FunctionClass,
    pub member: Membership,
    pub evidence: Evidence,
    pub tolerances: Tolerances,
    pub witness: Option<Witness>,
    pub note: Option<String>,
}

impl ClassReport {
    pub fn is_yes(&self) -> bool {
        self.member == Membership::Yes
    }
    pub fn is_no(&self) -> bool {
        self.member == Membership::No
    }
}

/// Relative tolerances (multiples of ‖F‖∞) and record-truncation choices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassConfig {
    pub tol_c0: f64,
    pub tol_erg: f64,
    pub tol_bohr: f64,
    pub tol_uc: f64,
    /// Checkpoints as fractions of the record reach.
    pub checkpoint_fractions: Vec<f64>,
    /// Ergodic horizons; defaults to reach·{1/8, 1/4, 1/2}.
    pub ergodic_horizons: Option<Vec<f64>>,
    /// Mollifier width for the slowly-oscillating split.
    pub so_h: f64,
}

impl Default for ClassConfig {
    fn default() -> Self {
        ClassConfig {
            tol_c0: 1e-3,
            tol_erg: 1e-2,
            tol_bohr: 1e-2,
            tol_uc: 1e-2,
            checkpoint_fractions: vec![0.125, 0.25, 0.5, 0.75],
            ergodic_horizons: None,
            so_h: 0.5,
        }
    }
}

/// Origin and reach of a record: distances are measured from 0 on the half
/// line and from the record centre on the full line (both tails).
fn geometry(f: &SampledSignal) -> (f64, f64) {
    match f.domain() {
        Domain::HalfLine => (f.t0(), f.t_end() - f.t0()),
        Domain::FullLine => {
            let c = 0.5 * (f.t0() + f.t_end());
            (c, 0.5 * (f.t_end() - f.t0()))
        }
    }
}

fn distance(f: &SampledSignal, origin: f64, t: f64) -> f64 {
    match f.domain() {
        Domain::HalfLine => t - origin,
        Domain::FullLine => (t - origin).abs(),
    }
}

/// Block sups between consecutive radii.
pub fn blocks(f: &SampledSignal, radii: &[f64]) -> Vec<Block> {
    let (origin, _) = geometry(f);
    let mut out: Vec<Block> = radii.windows(2).map(|w| Block { lo: w[0], hi: w[1], sup: 0.0, t_at: f64::NAN }).collect();
    for i in 0..f.len() {
        let t = f.t(i);
        let r = distance(f, origin, t);
        // the last block is closed on the right
        let idx = out.iter().position(|b| r >= b.lo && (r < b.hi || (b.hi == radii[radii.len() - 1] && r <= b.hi + 1e-9)));
        if let Some(k) = idx {
            let v = f.norm_at(i);
            if v > out[k].sup || out[k].t_at.is_nan() {
                out[k].sup = v;
                out[k].t_at = t;
            }
        }
    }
    out
}

/// Least-squares slope and R² of log y against log x.
fn loglog_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).filter(|(a, b)| **a > 0.0 && **b > 0.0).map(|(a, b)| (a.ln(), b.ln())).collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r2 = if syy <= 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Some((slope, r2))
}

fn report(class: FunctionClass, member: Membership, evidence: Evidence, scale: f64, tol: f64) -> ClassReport {
    ClassReport { class, member, evidence, tolerances: Tolerances { scale, tol }, witness: None, note: None }
}

/// Sup of ‖F‖ over [T, t_end] (both tails for full-line records), one per checkpoint.
pub fn tail_sup(f: &SampledSignal, checkpoints: &[f64]) -> Result<Vec<f64>> {
    let (origin, reach) = geometry(f);
    if let Some(&m) = checkpoints.iter().find(|&&c| c > reach + 1e-9) {
        return Err(Error::Horizon(format!("checkpoint {m} beyond record reach {reach}")));
    }
    let mut out = vec![0.0f64; checkpoints.len()];
    for i in 0..f.len() {
        let r = distance(f, origin, f.t(i));
        let v = f.norm_at(i);
        for (k, &c) in checkpoints.iter().enumerate() {
            if r >= c - 1e-12 {
                out[k] = out[k].max(v);
            }
        }
    }
    Ok(out)
}

pub fn is_c0(f: &SampledSignal, cfg: &ClassConfig) -> ClassReport {
    is_c0_scaled(f, cfg, f.sup_norm())
}

/// C₀ test with tolerances relative to `scale` (normally ‖F‖∞ of the
/// signal being analysed, not of a convolved copy).
pub fn is_c0_scaled(f: &SampledSignal, cfg: &ClassConfig, scale: f64) -> ClassReport {
    let (_, reach) = geometry(f);
    let tol = cfg.tol_c0 * scale;
    let checkpoints: Vec<f64> = cfg.checkpoint_fractions.iter().map(|q| q * reach).collect();
    let mut radii = checkpoints.clone();
    radii.push(reach);
    let bl = blocks(f, &radii);
    let tails = tail_sup(f, &checkpoints).unwrap_or_default();
    let mids: Vec<f64> = bl.iter().map(|b| (b.lo.max(1e-9) * b.hi).sqrt()).collect();
    let sups: Vec<f64> = bl.iter().map(|b| b.sup).collect();
    let fit = loglog_fit(&mids, &sups);
    let ev = Evidence::Tail {
        checkpoints: checkpoints.clone(),
        tail_sups: tails.clone(),
        blocks: bl.clone(),
        decay_exponent: fit.map(|f| -f.0),
        fit_r2: fit.map(|f| f.1),
    };
    if scale == 0.0 || tails.last().copied().unwrap_or(0.0) <= tol {
        return report(FunctionClass::C0, Membership::Yes, ev, scale, tol);
    }
    let strictly_decreasing = sups.windows(2).all(|w| w[1] < w[0]);
    let last = *sups.last().unwrap();
    let first = sups[0];
    if let Some((slope, r2)) = fit {
        if strictly_decreasing && slope <= -0.5 && r2 >= 0.9 && last <= 0.1 * scale {
            let mut r = report(FunctionClass::C0, Membership::Yes, ev, scale, tol);
            r.note = Some(format!("tail decays like t^{slope:.2}; extrapolated below tolerance"));
            return r;
        }
    }
    if last > 2.0 * tol && last >= 0.5 * first {
        let b = bl.last().unwrap();
        let mut r = report(FunctionClass::C0, Membership::No, ev, scale, tol);
        r.witness = Some(Witness { t: b.t_at, value: b.sup, bound: tol });
        return r;
    }
    report(FunctionClass::C0, Membership::Undecided, ev, scale, tol)
}

pub fn is_zero_scaled(f: &SampledSignal, cfg: &ClassConfig, scale: f64) -> ClassReport {
    let tol = cfg.tol_c0 * scale;
    let (mut sup, mut t_at) = (0.0, f.t0());
    for i in 0..f.len() {
        let v = f.norm_at(i);
        if v > sup {
            sup = v;
            t_at = f.t(i);
        }
    }
    let ev = Evidence::Sup { sup, t_at };
    if sup <= tol {
        report(FunctionClass::Zero, Membership::Yes, ev, scale, tol)
    } else if sup > 2.0 * tol {
        let mut r = report(FunctionClass::Zero, Membership::No, ev, scale, tol);
        r.witness = Some(Witness { t: t_at, value: sup, bound: tol });
        r
    } else {
        report(FunctionClass::Zero, Membership::Undecided, ev, scale, tol)
    }
}

fn growth_blocks(f: &SampledSignal) -> (Vec<Block>, Option<(f64, f64)>) {
    let (_, reach) = geometry(f);
    let radii: Vec<f64> = (0..=8).map(|k| reach * k as f64 / 8.0).collect();
    let bl = blocks(f, &radii);
    let mids: Vec<f64> = bl.iter().map(|b| 0.5 * (b.lo + b.hi)).collect();
    let sups: Vec<f64> = bl.iter().map(|b| b.sup).collect();
    (bl, loglog_fit(&mids[1..], &sups[1..]))
}

pub fn is_bounded(f: &SampledSignal) -> ClassReport {
    let (bl, fit) = growth_blocks(f);
    let scale = f.sup_norm();
    let ev = Evidence::Growth { blocks: bl.clone(), slope: fit.map(|x| x.0) };
    let first_half = bl[..4].iter().map(|b| b.sup).fold(0.0, f64::max);
    let second_half = bl[4..].iter().map(|b| b.sup).fold(0.0, f64::max);
    if let Some((slope, _)) = fit {
        if slope >= 0.5 && bl[7].sup >= 2.0 * bl[1].sup {
            let mut r = report(FunctionClass::Bounded, Membership::No, ev, scale, first_half);
            r.witness = Some(Witness { t: bl[7].t_at, value: bl[7].sup, bound: 2.0 * bl[1].sup });
            return r;
        }
    }
    if second_half <= 1.25 * first_half.max(1e-300) || scale == 0.0 {
        report(FunctionClass::Bounded, Membership::Yes, ev, scale, first_half)
    } else {
        report(FunctionClass::Bounded, Membership::Undecided, ev, scale, first_half)
    }
}

/// Windowed means (1/T)∫₀^T F(t+s) ds on the window [t0, t0 + T_sup] and the
/// sup deviation from the mean over the longest available horizon.
pub fn ergodic_mean(f: &SampledSignal, horizons: Option<&[f64]>, cfg: &ClassConfig) -> Result<(Mean, Vec<f64>, ClassReport)> {
    ergodic_mean_scaled(f, horizons, cfg, f.sup_norm())
}

pub fn ergodic_mean_scaled(
    f: &SampledSignal,
    horizons: Option<&[f64]>,
    cfg: &ClassConfig,
    scale: f64,
) -> Result<(Mean, Vec<f64>, ClassReport)> {
    let span = f.t_end() - f.t0();
    let default: Vec<f64> = cfg.ergodic_horizons.clone().unwrap_or_else(|| vec![span / 8.0, span / 4.0, span / 2.0]);
    let hs: Vec<f64> = horizons.map(|h| h.to_vec()).unwrap_or(default);
    let t_sup = span / 2.0;
    let tmax = hs.iter().copied().fold(0.0, f64::max);
    if tmax + t_sup > span + 1e-9 {
        return Err(Error::Horizon(format!("ergodic horizon {tmax} plus window {t_sup} exceeds record span {span}")));
    }
    let dt = f.dt();
    let p: Vec<Vec<C64>> = f.channels().iter().map(|c| cumulative_trapezoid(c, dt)).collect();
    let n = f.len();
    let mean: Vec<C64> = p.iter().map(|c| c[n - 1] / span).collect();
    let win = (t_sup / dt).round() as usize;
    let mut devs = Vec::new();
    let mut wit = Vec::new();
    for &h in &hs {
        let m = (h / dt).round() as usize;
        let mut best = (0.0, f.t0());
        for i in 0..=win.min(n - 1 - m) {
            let d2: f64 = p.iter().zip(&mean).map(|(c, mu)| ((c[i + m] - c[i]) / h - mu).norm_sqr()).sum();
            let d = d2.sqrt();
            if d > best.0 {
                best = (d, f.t(i));
            }
        }
        devs.push(best.0);
        wit.push(best.1);
    }
    let ev = Evidence::Ergodic { horizons: hs.clone(), deviations: devs.clone(), mean: mean.clone(), window: (f.t0(), f.t0() + t_sup) };
    // oscillating terms make the deviations wobble in T; only a material rise counts
    let tol = cfg.tol_erg * scale;
    let decreasing = *devs.last().unwrap() <= devs[0] * 1.25 + 1e-15;
    let last = *devs.last().unwrap();
    let power_law = devs.windows(2).all(|w| w[1] < w[0])
        && last <= 0.1 * scale
        && loglog_fit(&hs, &devs).map_or(false, |(s, r2)| s <= -0.5 && r2 >= 0.9);
    let r = if decreasing && last <= tol {
        report(FunctionClass::Ergodic, Membership::Yes, ev, scale, tol)
    } else if power_law {
        let mut r = report(FunctionClass::Ergodic, Membership::Yes, ev, scale, tol);
        r.note = Some("deviations decay like a power of the horizon; extrapolated below tolerance".into());
        r
    } else if last > 2.0 * tol && last >= 0.5 * devs[0] {
        let mut r = report(FunctionClass::Ergodic, Membership::No, ev, scale, tol);
        r.witness = Some(Witness { t: *wit.last().unwrap(), value: last, bound: tol });
        r
    } else {
        report(FunctionClass::Ergodic, Membership::Undecided, ev, scale, tol)
    };
    Ok((Mean { value: mean }, devs, r))
}

/// modulus(s) = sup_t ‖F(t+s) − F(t)‖ for each lag.
pub fn uc_modulus(f: &SampledSignal, lags: &[f64]) -> Result<Vec<f64>> {
    lags.iter().map(|&s| f.difference(s).map(|d| d.sup_norm())).collect()
}

pub fn is_uc(f: &SampledSignal, cfg: &ClassConfig) -> ClassReport {
    is_uc_scaled(f, cfg, f.sup_norm())
}

pub fn is_uc_scaled(f: &SampledSignal, cfg: &ClassConfig, scale: f64) -> ClassReport {
    let dt = f.dt();
    let lags: Vec<f64> = [1.0, 2.0, 4.0, 8.0, 16.0].iter().map(|k| k * dt).collect();
    let tol = cfg.tol_uc * scale;
    let modulus = uc_modulus(f, &lags).unwrap_or_default();
    let diff = match f.difference(dt) {
        Ok(d) => d,
        Err(_) => {
            let ev = Evidence::Modulus { lags, modulus, block_lipschitz: vec![] };
            return report(FunctionClass::UC, Membership::Undecided, ev, scale, tol);
        }
    };
    let (_, reach) = geometry(&diff);
    let radii: Vec<f64> = (0..=8).map(|k| reach * k as f64 / 8.0).collect();
    let bl = blocks(&diff, &radii);
    let lip: Vec<f64> = bl.iter().map(|b| b.sup / dt).collect();
    let ev = Evidence::Modulus { lags: lags.clone(), modulus: modulus.clone(), block_lipschitz: lip.clone() };
    let m0 = modulus.first().copied().unwrap_or(0.0);
    let early = lip[..4].iter().copied().fold(0.0, f64::max);
    let late = lip[4..].iter().copied().fold(0.0, f64::max);
    if m0 <= tol || (late <= 1.5 * early && m0 <= 0.1 * scale) {
        return report(FunctionClass::UC, Membership::Yes, ev, scale, tol);
    }
    let mids: Vec<f64> = bl.iter().map(|b| 0.5 * (b.lo + b.hi)).collect();
    let growing = loglog_fit(&mids[1..], &lip[1..]).map(|(s, _)| s >= 0.5).unwrap_or(false) && lip[7] >= 4.0 * lip[1];
    let saturated = bl[7].sup >= 0.5 * scale && bl[7].sup > 2.0 * tol;
    if growing || saturated {
        let b = &bl[7];
        let mut r = report(FunctionClass::UC, Membership::No, ev, scale, tol);
        r.witness = Some(Witness { t: b.t_at, value: b.sup, bound: tol });
        return r;
    }
    report(FunctionClass::UC, Membership::Undecided, ev, scale, tol)
}

/// F = u + ξ with ξ = (F − M_h F)·1_{t<T_s} and u = F − ξ; T_s is the first
/// checkpoint after which F itself is uniformly continuous.
pub fn is_slowly_oscillating(f: &SampledSignal, cfg: &ClassConfig) -> ClassReport {
    let scale = f.sup_norm();
    let uc = is_uc_scaled(f, cfg, scale);
    if uc.is_yes() {
        let xi = is_zero_scaled(&f.map(|_, _| C64::new(0.0, 0.0)), cfg, scale);
        let ev = Evidence::Split { h: 0.0, split_time: f.t0(), u: Box::new(uc), xi: Box::new(xi) };
        return report(FunctionClass::SlowlyOscillating, Membership::Yes, ev, scale, cfg.tol_uc * scale);
    }
    let h = cfg.so_h;
    let Ok(mh) = f.mollify(h) else {
        return report(FunctionClass::SlowlyOscillating, Membership::Undecided, uc.evidence.clone(), scale, cfg.tol_uc * scale);
    };
    let (origin, reach) = geometry(f);
    let n = mh.len();
    let fs = f.slice(0, n);
    let mut last = None;
    for q in cfg.checkpoint_fractions.iter().filter(|q| **q <= 0.25) {
        let ts = q * reach;
        // u = M_h F before the split, F after it
        let u = fs.map_channels(|c, t, v| {
            if distance(f, origin, t) < ts {
                mh.channel(c)[((t - f.t0()) / f.dt()).round() as usize]
            } else {
                v
            }
        });
        let xi = fs.sub(&u).expect("same grid").with_growth(None);
        let ru = is_uc_scaled(&u, cfg, scale);
        let rx = is_c0_scaled(&xi, cfg, scale);
        let yes = ru.is_yes() && rx.is_yes();
        let ev = Evidence::Split { h, split_time: origin + ts, u: Box::new(ru), xi: Box::new(rx) };
        if yes {
            return report(FunctionClass::SlowlyOscillating, Membership::Yes, ev, scale, cfg.tol_uc * scale);
        }
        last = Some(ev);
    }
    // u = M_h F is uniformly continuous for bounded F; then F ∈ SO as soon
    // as the local L¹ means of F − M_h F vanish at infinity
    if is_bounded(f).is_yes() {
        if let Some(ev) = mollifier_split(f, &mh, cfg, scale) {
            return report(FunctionClass::SlowlyOscillating, Membership::Yes, ev, scale, cfg.tol_uc * scale);
        }
    }
    let ev = last.unwrap_or(uc.evidence.clone());
    let mut r = report(FunctionClass::SlowlyOscillating, if uc.is_no() { Membership::Undecided } else { uc.member }, ev, scale, cfg.tol_uc * scale);
    r.note = Some("no split with a UC part and a C₀ remainder found at this horizon".into());
    r
}

fn mollifier_split(f: &SampledSignal, mh: &SampledSignal, cfg: &ClassConfig, scale: f64) -> Option<Evidence> {
    let n = mh.len();
    let xi = f.slice(0, n).sub(mh).ok()?.with_growth(None);
    let local = xi.map(|_, v| C64::new(v.norm(), 0.0)).mollify(1.0).ok()?;
    let ru = is_uc_scaled(mh, cfg, scale);
    let rx = is_c0_scaled(&local, cfg, scale);
    (ru.is_yes() && rx.is_yes()).then(|| Evidence::Split { h: cfg.so_h, split_time: f.t_end(), u: Box::new(ru), xi: Box::new(rx) })
}

/// Windows used for Bohr means: the last half of a half-line record, the two
/// outer quarters of a full-line record.
fn bohr_windows(f: &SampledSignal) -> Vec<(usize, usize)> {
    let n = f.len();
    match f.domain() {
        Domain::HalfLine => vec![(n / 2, n)],
        Domain::FullLine => vec![(0, n / 4), (n - n / 4, n)],
    }
}

/// Bump-weighted tail samples, prepared once for many Bohr means.
pub struct BohrWindow {
    segments: Vec<(f64, Vec<Vec<C64>>)>,
    dt: f64,
    wsum: f64,
}

impl BohrWindow {
    pub fn new(f: &SampledSignal) -> Self {
        let mut segments = Vec::new();
        let mut wsum = 0.0;
        for (lo, hi) in bohr_windows(f) {
            let len = (hi - lo) as f64;
            let w: Vec<f64> = (lo..hi).map(|i| bump(2.0 * ((i - lo) as f64 + 0.5) / len - 1.0)).collect();
            wsum += w.iter().sum::<f64>();
            let chans = f.channels().iter().map(|c| c[lo..hi].iter().zip(&w).map(|(v, w)| v * w).collect()).collect();
            segments.push((f.t(lo), chans));
        }
        BohrWindow { segments, dt: f.dt(), wsum }
    }

    pub fn coefficient(&self, omega: f64) -> BohrCoefficient {
        let d = self.segments[0].1.len();
        let mut acc = vec![C64::new(0.0, 0.0); d];
        let step = C64::from_polar(1.0, -omega * self.dt);
        for (t0, chans) in &self.segments {
            let n = chans[0].len();
            let mut z = C64::from_polar(1.0, -omega * t0);
            for i in 0..n {
                if i % 256 == 0 {
                    z = C64::from_polar(1.0, -omega * (t0 + i as f64 * self.dt));
                }
                for c in 0..d {
                    acc[c] += chans[c][i] * z;
                }
                z *= step;
            }
        }
        BohrCoefficient { omega, a: acc.into_iter().map(|a| a / self.wsum).collect() }
    }

    /// Local maximum of |a(ν)| within ±r of ν0 (scan, then golden section).
    pub fn refine(&self, nu0: f64, r: f64) -> BohrCoefficient {
        let n = 20;
        let mut best = self.coefficient(nu0);
        for k in 0..=n {
            let b = self.coefficient(nu0 - r + 2.0 * r * k as f64 / n as f64);
            if b.norm() > best.norm() {
                best = b;
            }
        }
        let h = 2.0 * r / n as f64;
        let (mut a, mut b) = (best.omega - h, best.omega + h);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let mut fc = self.coefficient(c).norm();
        let mut fd = self.coefficient(d).norm();
        for _ in 0..30 {
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = self.coefficient(c).norm();
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = self.coefficient(d).norm();
            }
        }
        let cand = self.coefficient(0.5 * (a + b));
        if cand.norm() >= best.norm() {
            cand
        } else {
            best
        }
    }
}

/// Smooth-window mean of γ_{−ω}F over the tail windows.
pub fn bohr_coefficient(f: &SampledSignal, omega: f64) -> BohrCoefficient {
    BohrWindow::new(f).coefficient(omega)
}

/// Local maximum of |a(ν)| within ±r of ν0.
pub fn refine_frequency(f: &SampledSignal, nu0: f64, r: f64) -> BohrCoefficient {
    BohrWindow::new(f).refine(nu0, r)
}

/// AP part Σ a(ω)γ_ω over candidates with ‖a‖ > tol_bohr, remainder, and
/// the AAP report (remainder tested for C₀).
pub fn ap_decompose(
    f: &SampledSignal,
    candidates: &[f64],
    refine: Option<f64>,
    cfg: &ClassConfig,
) -> (SampledSignal, SampledSignal, ClassReport) {
    ap_decompose_scaled(f, candidates, refine, cfg, f.sup_norm())
}

pub fn ap_decompose_scaled(
    f: &SampledSignal,
    candidates: &[f64],
    refine: Option<f64>,
    cfg: &ClassConfig,
    scale: f64,
) -> (SampledSignal, SampledSignal, ClassReport) {
    let tol_b = cfg.tol_bohr * scale;
    let mut coeffs: Vec<BohrCoefficient> = Vec::new();
    let mut rem = f.clone();
    for &w in candidates {
        let b = match refine {
            Some(r) => refine_frequency(&rem, w, r),
            None => bohr_coefficient(&rem, w),
        };
        if b.norm() > tol_b {
            let a = b.a.clone();
            let nu = b.omega;
            rem = rem.map_channels(|c, t, v| v - a[c] * C64::from_polar(1.0, nu * t));
            coeffs.push(b);
        }
    }
    let ap = f.sub(&rem).expect("same grid");
    let rc0 = is_c0_scaled(&rem, cfg, scale);
    let member = rc0.member;
    let ev = Evidence::Bohr { coefficients: coeffs, remainder: Box::new(rc0) };
    (ap, rem, report(FunctionClass::AAP, member, ev, scale, tol_b))
}

/// Greedy Bohr scan of F over [lo, hi]: frequencies whose coefficient stays
/// above `tol_bohr` after removing the stronger ones.
pub fn bohr_scan(f: &SampledSignal, lo: f64, hi: f64, step: f64, tol: f64, max_terms: usize) -> Vec<BohrCoefficient> {
    let mut rem = f.clone();
    let mut found = Vec::new();
    let n = ((hi - lo) / step).ceil().max(1.0) as usize;
    for _ in 0..max_terms {
        let win = BohrWindow::new(&rem);
        let mut best: Option<BohrCoefficient> = None;
        for k in 0..=n {
            let nu = lo + (hi - lo) * k as f64 / n as f64;
            let b = win.coefficient(nu);
            if best.as_ref().map_or(true, |x| b.norm() > x.norm()) {
                best = Some(b);
            }
        }
        let Some(b) = best else { break };
        if b.norm() <= 0.5 * tol {
            break;
        }
        let b = win.refine(b.omega, step);
        if b.norm() <= tol {
            break;
        }
        let (a, nu) = (b.a.clone(), b.omega);
        rem = rem.map_channels(|c, t, v| v - a[c] * C64::from_polar(1.0, nu * t));
        found.push(b);
    }
    found
}

/// AAP test with frequencies found by a Bohr scan over [lo, hi].
pub fn is_aap_scan(f: &SampledSignal, lo: f64, hi: f64, cfg: &ClassConfig, scale: f64) -> ClassReport {
    let found = bohr_scan(f, lo, hi, 0.02, cfg.tol_bohr * scale, 8);
    let cands: Vec<f64> = found.iter().map(|b| b.omega).collect();
    ap_decompose_scaled(f, &cands, None, cfg, scale).2
}

/// AP test: the AAP remainder must be small on the whole record.
pub fn is_ap_scan(f: &SampledSignal, lo: f64, hi: f64, cfg: &ClassConfig, scale: f64) -> ClassReport {
    let found = bohr_scan(f, lo, hi, 0.02, cfg.tol_bohr * scale, 8);
    let cands: Vec<f64> = found.iter().map(|b| b.omega).collect();
    let (_, rem, mut r) = ap_decompose_scaled(f, &cands, None, cfg, scale);
    r.class = FunctionClass::AP;
    let z = is_zero_scaled(&rem, &ClassConfig { tol_c0: cfg.tol_bohr, ..cfg.clone() }, scale);
    r.member = match (r.member, z.member) {
        (Membership::Yes, Membership::Yes) => Membership::Yes,
        (_, Membership::No) | (Membership::No, _) => {
            r.witness = z.witness.clone();
            Membership::No
        }
        _ => Membership::Undecided,
    };
    r
}

/// Dispatch to the detector of `class`; `band` bounds the Bohr scan for AP/AAP.
pub fn detect(f: &SampledSignal, class: FunctionClass, cfg: &ClassConfig, scale: f64, band: (f64, f64)) -> ClassReport {
    match class {
        FunctionClass::Zero => is_zero_scaled(f, cfg, scale),
        FunctionClass::C0 => is_c0_scaled(f, cfg, scale),
        FunctionClass::Bounded => is_bounded(f),
        FunctionClass::UC => is_uc_scaled(f, cfg, scale),
        FunctionClass::Ergodic | FunctionClass::ErgodicMeanZero => match ergodic_mean_scaled(f, None, cfg, scale) {
            Ok((m, _, mut r)) => {
                if class == FunctionClass::ErgodicMeanZero {
                    r.class = class;
                    let mn = m.value.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
                    if r.is_yes() && mn > cfg.tol_erg * scale {
                        r.member = Membership::No;
                        r.witness = Some(Witness { t: f.t0(), value: mn, bound: cfg.tol_erg * scale });
                    }
                }
                r
            }
            Err(e) => {
                let mut r = is_zero_scaled(f, cfg, scale);
                r.class = class;
                r.member = Membership::Undecided;
                r.note = Some(e.to_string());
                r
            }
        },
        FunctionClass::AP => is_ap_scan(f, band.0, band.1, cfg, scale),
        FunctionClass::AAP => is_aap_scan(f, band.0, band.1, cfg, scale),
        FunctionClass::SlowlyOscillating => is_slowly_oscillating(f, cfg),
    }
}
