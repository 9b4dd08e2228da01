//! Laplace transform ℒF(λ) = ∫₀^∞ e^{−λt}F(t) dt and Carleman transform
//! 𝒞F = ℒ⁺F on Re λ > 0, ℒ⁻F(λ) = −∫₀^∞ e^{λt}F(−t) dt on Re λ < 0,
//! by the trapezoid rule on the record with a truncation-tail check.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::integrate;
use crate::signal::{lattice_steps, Domain, SampledSignal};

/// Truncation-tail estimates for ∫_T^∞.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailInfo {
    /// Growth-aware bound C∫_T^∞ e^{−at}(1+t²)^k dt (infinite without a growth exponent).
    pub analytic: f64,
    /// Fluctuation of the partial integrals over the last quarter of the record.
    pub empirical: f64,
    pub tol: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformValue {
    pub lambda: C64,
    pub value: Vec<C64>,
    pub tail: TailInfo,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Right,
    Left,
    Both,
}

/// Relative tail tolerance: tol_tail = TAIL_REL·‖F‖∞.
pub const TAIL_REL: f64 = 1e-4;

/// Index of t = 0 in the record.
fn origin_index(f: &SampledSignal) -> Result<usize> {
    lattice_steps(-f.t0(), f.dt())
        .filter(|k| *k >= 0 && (*k as usize) < f.len())
        .map(|k| k as usize)
        .ok_or_else(|| Error::Horizon("record does not contain t = 0 on its grid".into()))
}

/// One-sided sequences starting at t = 0: forward (t ≥ 0) and backward (t ≤ 0, reversed).
struct Sides {
    fwd: Vec<Vec<C64>>,
    bwd: Vec<Vec<C64>>,
}

fn sides(f: &SampledSignal) -> Result<Sides> {
    let k0 = origin_index(f)?;
    let fwd = f.channels().iter().map(|c| c[k0..].to_vec()).collect();
    let bwd = f.channels().iter().map(|c| c[..=k0].iter().rev().copied().collect()).collect();
    Ok(Sides { fwd, bwd })
}

/// Trapezoid sums dt·Σ' e^{−λ t_n} x_n over t_n = n·dt for many λ at once,
/// with the last-quarter fluctuation of the partial sums.
pub(crate) fn exp_sums(x: &[Vec<C64>], dt: f64, lambdas: &[C64]) -> Vec<(Vec<C64>, f64)> {
    let n = x.first().map_or(0, |c| c.len());
    let d = x.len();
    let m = lambdas.len();
    if n < 2 {
        return vec![(vec![C64::new(0.0, 0.0); d], 0.0); m];
    }
    let step: Vec<C64> = lambdas.iter().map(|l| (-l * dt).exp()).collect();
    let mut z: Vec<C64> = vec![C64::new(1.0, 0.0); m];
    let mut acc = vec![C64::new(0.0, 0.0); m * d];
    let q0 = 3 * (n - 1) / 4;
    let every = ((n - 1 - q0) / 32).max(1);
    let mut partial: Vec<Vec<C64>> = Vec::new();
    for i in 0..n {
        let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        if i % 512 == 0 && i > 0 {
            let t = i as f64 * dt;
            for (zj, l) in z.iter_mut().zip(lambdas) {
                *zj = (-l * t).exp();
            }
        }
        for c in 0..d {
            let v = x[c][i] * w;
            let a = &mut acc[c * m..(c + 1) * m];
            for j in 0..m {
                a[j] += v * z[j];
            }
        }
        for j in 0..m {
            z[j] *= step[j];
        }
        if i >= q0 && (i - q0) % every == 0 {
            partial.push(acc.clone());
        }
    }
    (0..m)
        .map(|j| {
            let val: Vec<C64> = (0..d).map(|c| acc[c * m + j] * dt).collect();
            let fl = partial
                .iter()
                .map(|p| (0..d).map(|c| ((p[c * m + j] - acc[c * m + j]) * dt).norm_sqr()).sum::<f64>().sqrt())
                .fold(0.0, f64::max);
            (val, fl)
        })
        .collect()
}

/// C·∫_T^∞ e^{−at}(1+t²)^k dt with C = max ‖F(t)‖/(1+t²)^k on the record.
fn analytic_tail(x: &[Vec<C64>], dt: f64, growth: Option<u32>, a: f64) -> f64 {
    let Some(k) = growth else { return f64::INFINITY };
    let n = x[0].len();
    let big_t = (n - 1) as f64 * dt;
    let w = |t: f64| (1.0 + t * t).powi(k as i32);
    let c = (0..n)
        .map(|i| {
            let t = i as f64 * dt;
            x.iter().map(|ch| ch[i].norm_sqr()).sum::<f64>().sqrt() / w(t)
        })
        .fold(0.0, f64::max);
    if k == 0 {
        return c * (-a * big_t).exp() / a;
    }
    let upper = big_t + (60.0 + 4.0 * k as f64 * (1.0 + big_t).ln()) / a;
    c * integrate(&|t| (-a * (t - big_t)).exp() * w(t), big_t, upper, 1e-12) * (-a * big_t).exp()
}

fn one_sided(x: &[Vec<C64>], dt: f64, growth: Option<u32>, lambdas: &[C64], sup: f64, sign: f64) -> Vec<TransformValue> {
    let tol = TAIL_REL * sup;
    let big_t = (x[0].len() - 1) as f64 * dt;
    exp_sums(x, dt, lambdas)
        .into_iter()
        .zip(lambdas)
        .map(|((v, fl), &l)| {
            let a = l.re.abs();
            let an = analytic_tail(x, dt, growth, a);
            let ok = (a * big_t >= 30.0 && growth == Some(0)) || an <= tol || fl <= tol;
            TransformValue {
                lambda: l,
                value: v.into_iter().map(|c| c * sign).collect(),
                tail: TailInfo { analytic: an, empirical: fl, tol, ok },
            }
        })
        .collect()
}

fn check_re(l: C64) -> Result<()> {
    if l.re == 0.0 || !l.re.is_finite() {
        return Err(Error::Domain(format!("transform needs Re λ ≠ 0, got {l}")));
    }
    Ok(())
}

fn tail_error(v: &TransformValue) -> Error {
    Error::Tail(format!(
        "λ = {}: tail bound {:.3e} and tail fluctuation {:.3e} exceed {:.3e}",
        v.lambda, v.tail.analytic, v.tail.empirical, v.tail.tol
    ))
}

/// ℒF(λ) for Re λ > 0 on a half-line record (or the t ≥ 0 part of a full-line one).
pub fn laplace_transform(f: &SampledSignal, lambda: C64) -> Result<TransformValue> {
    check_re(lambda)?;
    if lambda.re < 0.0 {
        return Err(Error::Domain(format!("Laplace transform needs Re λ > 0, got {lambda}")));
    }
    let v = laplace_many(f, &[lambda])?.pop().unwrap();
    if !v.tail.ok {
        return Err(tail_error(&v));
    }
    Ok(v)
}

/// ℒF at many λ with Re λ > 0; tail failures are reported, not raised.
pub fn laplace_many(f: &SampledSignal, lambdas: &[C64]) -> Result<Vec<TransformValue>> {
    for l in lambdas {
        check_re(*l)?;
    }
    let s = sides(f)?;
    Ok(one_sided(&s.fwd, f.dt(), f.growth_exponent(), lambdas, f.sup_norm(), 1.0))
}

/// 𝒞F(λ): ℒ⁺ for Re λ > 0 and ℒ⁻ for Re λ < 0. A half-line record stands for
/// its zero extension, so ℒ⁻ vanishes.
pub fn carleman_transform(f: &SampledSignal, lambda: C64) -> Result<TransformValue> {
    check_re(lambda)?;
    let v = carleman_many(f, &[lambda])?.pop().unwrap();
    if !v.tail.ok {
        return Err(tail_error(&v));
    }
    Ok(v)
}

pub fn carleman_many(f: &SampledSignal, lambdas: &[C64]) -> Result<Vec<TransformValue>> {
    for l in lambdas {
        check_re(*l)?;
    }
    let s = sides(f)?;
    let (right, left): (Vec<(usize, C64)>, Vec<(usize, C64)>) = lambdas.iter().copied().enumerate().partition(|(_, l)| l.re > 0.0);
    let mut out: Vec<Option<TransformValue>> = vec![None; lambdas.len()];
    let sup = f.sup_norm();
    let rl: Vec<C64> = right.iter().map(|p| p.1).collect();
    for ((i, _), v) in right.iter().zip(one_sided(&s.fwd, f.dt(), f.growth_exponent(), &rl, sup, 1.0)) {
        out[*i] = Some(v);
    }
    // ℒ⁻F(λ) = −Σ e^{−(−λ)t}F(−t)
    let ll: Vec<C64> = left.iter().map(|p| -p.1).collect();
    let left_vals = if f.domain() == Domain::HalfLine || s.bwd[0].len() < 2 {
        ll.iter()
            .map(|&l| TransformValue {
                lambda: -l,
                value: vec![C64::new(0.0, 0.0); f.dim()],
                tail: TailInfo { analytic: 0.0, empirical: 0.0, tol: TAIL_REL * sup, ok: true },
            })
            .collect()
    } else {
        one_sided(&s.bwd, f.dt(), f.growth_exponent(), &ll, sup, -1.0)
            .into_iter()
            .map(|mut v| {
                v.lambda = -v.lambda;
                v
            })
            .collect::<Vec<_>>()
    };
    for ((i, _), v) in left.iter().zip(left_vals) {
        out[*i] = Some(v);
    }
    Ok(out.into_iter().map(|v| v.unwrap()).collect())
}

/// Transform values on {±a_k + iω_j}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfPlaneGrid {
    pub a_seq: Vec<f64>,
    pub omegas: Vec<f64>,
    pub side: Side,
    /// [a][ω] values on Re λ = +a_k.
    pub right: Vec<Vec<TransformValue>>,
    /// [a][ω] values on Re λ = −a_k.
    pub left: Vec<Vec<TransformValue>>,
}

fn check_a_seq(a_seq: &[f64]) -> Result<()> {
    if a_seq.is_empty() || a_seq.iter().any(|a| !(*a > 0.0)) || a_seq.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Config("a_seq must be positive and strictly decreasing".into()));
    }
    Ok(())
}

/// Laplace (Right) or Carleman (Left/Both) values on the grid.
pub fn half_plane_scan(f: &SampledSignal, omegas: &[f64], a_seq: &[f64], side: Side) -> Result<HalfPlaneGrid> {
    check_a_seq(a_seq)?;
    if side != Side::Right && f.domain() != Domain::FullLine {
        return Err(Error::Domain("left half-plane values need a full-line signal".into()));
    }
    let mut right = Vec::new();
    let mut left = Vec::new();
    for &a in a_seq {
        if side != Side::Left {
            let ls: Vec<C64> = omegas.iter().map(|&w| C64::new(a, w)).collect();
            right.push(carleman_many(f, &ls)?);
        }
        if side != Side::Right {
            let ls: Vec<C64> = omegas.iter().map(|&w| C64::new(-a, w)).collect();
            left.push(carleman_many(f, &ls)?);
        }
    }
    Ok(HalfPlaneGrid { a_seq: a_seq.to_vec(), omegas: omegas.to_vec(), side, right, left })
}

/// ∫₀^s e^{−λt}F(t) dt by the trapezoid rule; s must be a grid point.
pub fn partial_laplace(f: &SampledSignal, lambda: C64, s: f64) -> Result<Vec<C64>> {
    let k0 = origin_index(f)?;
    let m = lattice_steps(s, f.dt()).filter(|m| *m >= 0).ok_or_else(|| Error::GridMismatch(format!("s = {s} is off the grid")))? as usize;
    if k0 + m >= f.len() {
        return Err(Error::Horizon(format!("s = {s} beyond the record")));
    }
    let x: Vec<Vec<C64>> = f.channels().iter().map(|c| c[k0..=k0 + m].to_vec()).collect();
    Ok(exp_sums(&x, f.dt(), &[lambda]).pop().unwrap().0)
}

/// Residual of the shift identity ℒF_s(λ) = e^{λs}ℒF(λ) − e^{λs}∫₀^s e^{−λt}F dt.
/// Both records end at the same time, so the trapezoid sums satisfy it exactly.
pub fn shift_identity_residual(f: &SampledSignal, s: f64, lambda: C64) -> Result<f64> {
    let fs = f.translate(s)?;
    let lfs = laplace_many(&fs, &[lambda])?.pop().unwrap().value;
    let lf = laplace_many(f, &[lambda])?.pop().unwrap().value;
    let p = partial_laplace(f, lambda, s)?;
    let e = (lambda * s).exp();
    Ok(lfs.iter().zip(&lf).zip(&p).map(|((a, b), c)| (a - e * (b - c)).norm_sqr()).sum::<f64>().sqrt())
}

/// Trapezoid counterpart of ℒM_hF(λ) = g(λh)ℒF(λ) − (1/h)∫₀^h e^{λs}∫₀^s e^{−λt}F dt ds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MollifierIdentity {
    pub lhs: Vec<C64>,
    pub laplace: Vec<C64>,
    /// Discrete g_d, → (e^{λh} − 1)/(λh) as dt → 0.
    pub g_discrete: C64,
    pub g_analytic: C64,
    /// Uses F on [0, h] only.
    pub correction: Vec<C64>,
    pub residual: f64,
    pub residual_analytic_g: f64,
}

pub fn mollifier_identity(f: &SampledSignal, h: f64, lambda: C64) -> Result<MollifierIdentity> {
    if f.domain() != Domain::HalfLine {
        return Err(Error::Domain("mollifier identity is stated on the half line".into()));
    }
    let dt = f.dt();
    let m = lattice_steps(h, dt).filter(|m| *m > 0).ok_or_else(|| Error::GridMismatch(format!("h = {h} is off the grid")))? as usize;
    if m + 1 >= f.len() {
        return Err(Error::Horizon(format!("h = {h} exceeds the record")));
    }
    let mh = f.mollify(h)?;
    let lhs = laplace_many(&mh, &[lambda])?.pop().unwrap().value;
    let laplace = laplace_many(f, &[lambda])?.pop().unwrap().value;
    let q = (-lambda * dt).exp();
    let qm = q.powu(m as u32).inv();
    let g_discrete = (dt / h) * (qm - 1.0) * (1.0 + q) / (2.0 * (1.0 - q));
    let lh = lambda * h;
    let g_analytic = if lh.norm() < 1e-8 { C64::new(1.0, 0.0) } else { (lh.exp() - 1.0) / lh };
    let mut correction = Vec::new();
    for c in 0..f.dim() {
        let x = &f.channel(c)[..=m];
        let p = crate::signal::cumulative_trapezoid(x, dt);
        let mut head = C64::new(0.0, 0.0);
        let mut z = C64::new(1.0, 0.0);
        for v in p.iter().take(m) {
            head += v * z;
            z *= q;
        }
        correction.push((dt / h) * ((qm - 1.0) * (dt / 4.0) * x[0] + qm * head + 0.5 * p[m]));
    }
    let res = |g: C64| -> f64 {
        lhs.iter().zip(&laplace).zip(&correction).map(|((a, l), c)| (a - (g * l - c)).norm_sqr()).sum::<f64>().sqrt()
    };
    let residual = res(g_discrete);
    let residual_analytic_g = res(g_analytic);
    Ok(MollifierIdentity { lhs, laplace, g_discrete, g_analytic, correction, residual, residual_analytic_g })
}
