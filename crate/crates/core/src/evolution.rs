//! Mild solutions of du/dt = Au + φ(t) on ℝ₊ for a d×d complex matrix A.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::signal::{growth_slope, Domain, SampledSignal};

#[derive(Clone, Debug)]
pub struct EvolutionProblem {
    pub a: DMatrix<C64>,
    pub phi: SampledSignal,
    pub u0: Vec<C64>,
}

impl EvolutionProblem {
    pub fn new(a: DMatrix<C64>, phi: SampledSignal, u0: Vec<C64>) -> Result<Self> {
        let d = a.nrows();
        if a.ncols() != d || d == 0 {
            return Err(Error::InvalidSignal("A must be square".into()));
        }
        if phi.dim() != d || u0.len() != d {
            return Err(Error::InvalidSignal(format!(
                "dimension mismatch: A is {d}×{d}, φ has {} channels, u0 has {}",
                phi.dim(),
                u0.len()
            )));
        }
        if phi.domain() != Domain::HalfLine {
            return Err(Error::Domain("φ must be a half-line signal".into()));
        }
        if phi.len() < 4 {
            return Err(Error::Horizon("need at least 4 samples".into()));
        }
        Ok(EvolutionProblem { a, phi, u0 })
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }
}

/// Inverse Vandermonde for the cubic through nodes `o` (in units of h):
/// p(s) = Σ_k coef[k]·(s/h)^k.
fn vandermonde_inverse(o: [f64; 4]) -> DMatrix<f64> {
    let v = DMatrix::from_fn(4, 4, |i, k| o[i].powi(k as i32));
    v.try_inverse().expect("distinct nodes")
}

/// e^{hA} and Φ_k = ∫₀^h e^{(h−s)A} s^k/k! ds for k = 0..3, from one block
/// exponential.
fn step_matrices(a: &DMatrix<C64>, h: f64) -> (DMatrix<C64>, [DMatrix<C64>; 4]) {
    let d = a.nrows();
    let n = 5 * d;
    let mut m = DMatrix::<C64>::zeros(n, n);
    m.view_mut((0, 0), (d, d)).copy_from(&(a * C64::new(h, 0.0)));
    for b in 0..4 {
        for i in 0..d {
            m[(b * d + i, (b + 1) * d + i)] = C64::new(h, 0.0);
        }
    }
    let e = m.exp();
    let blk = |b: usize| e.view((0, b * d), (d, d)).into_owned();
    (blk(0), [blk(1), blk(2), blk(3), blk(4)])
}

/// Exponential integrator: φ is replaced on each step by the cubic through
/// four neighbouring samples, which is then integrated exactly.
pub fn solve_evolution(p: &EvolutionProblem) -> Result<SampledSignal> {
    let d = p.dim();
    let dt = p.phi.dt();
    let n = p.phi.len();
    let (ea, phis) = step_matrices(&p.a, dt);
    // stencils: left edge, interior, right edge
    let stencils = [[0.0, 1.0, 2.0, 3.0], [-1.0, 0.0, 1.0, 2.0], [-2.0, -1.0, 0.0, 1.0]];
    let vinv: Vec<DMatrix<f64>> = stencils.iter().map(|o| vandermonde_inverse(*o)).collect();
    let fact = [1.0, 1.0, 2.0, 6.0];
    let mut u = DVector::from_vec(p.u0.clone());
    let mut out: Vec<Vec<C64>> = vec![Vec::with_capacity(n); d];
    for (c, v) in u.iter().enumerate() {
        out[c].push(*v);
    }
    for i in 0..n - 1 {
        let (si, base) = if i == 0 {
            (0, 0)
        } else if i + 2 < n {
            (1, i - 1)
        } else {
            (2, n - 4)
        };
        let mut next = &ea * &u;
        for (k, phik) in phis.iter().enumerate() {
            // k-th derivative at t_i of the interpolating cubic
            let scale = fact[k] / dt.powi(k as i32);
            let ck = DVector::from_fn(d, |c, _| {
                let ch = p.phi.channel(c);
                (0..4).map(|j| ch[base + j] * vinv[si][(k, j)]).sum::<C64>() * scale
            });
            next += phik * ck;
        }
        u = next;
        for (c, v) in u.iter().enumerate() {
            out[c].push(*v);
        }
    }
    let s = SampledSignal::from_channels(Domain::HalfLine, 0.0, dt, out, None)?;
    let growth = declared_growth(&s);
    Ok(s.with_growth(growth))
}

/// Polynomial growth exponent read off the samples; None for faster growth.
fn declared_growth(s: &SampledSignal) -> Option<u32> {
    match growth_slope(s) {
        Some(k) if k > 8.0 => None,
        Some(k) => Some((k - 0.25).ceil().max(0.0) as u32),
        None => Some(0),
    }
}

/// Cumulative trapezoid with the Euler–Maclaurin end correction
/// −dt²/12·(f′(t) − f′(0)), derivatives by one-sided fourth-order differences.
pub fn corrected_cumulative(v: &[C64], dt: f64) -> Vec<C64> {
    let n = v.len();
    let mut out = crate::signal::cumulative_trapezoid(v, dt);
    if n < 5 {
        return out;
    }
    let w = [25.0, -48.0, 36.0, -16.0, 3.0];
    let fwd = |i: usize| (0..5).map(|j| v[i + j] * w[j]).sum::<C64>() / (-12.0 * dt);
    let bwd = |i: usize| (0..5).map(|j| v[i - j] * w[j]).sum::<C64>() / (12.0 * dt);
    let d0 = fwd(0);
    for i in 1..n {
        let di = if i >= 4 { bwd(i) } else { fwd(i) };
        out[i] -= dt * dt / 12.0 * (di - d0);
    }
    out
}

/// sup_t ‖u(t) − u0 − A·Pu(t) − Pφ(t)‖.
pub fn integrated_residual(p: &EvolutionProblem, u: &SampledSignal) -> f64 {
    let d = p.dim();
    let dt = u.dt();
    let pu: Vec<Vec<C64>> = (0..d).map(|c| corrected_cumulative(u.channel(c), dt)).collect();
    let pf: Vec<Vec<C64>> = (0..d).map(|c| corrected_cumulative(p.phi.channel(c), dt)).collect();
    let mut worst = 0.0f64;
    for i in 0..u.len() {
        let mut r2 = 0.0;
        for r in 0..d {
            let mut v = u.channel(r)[i] - p.u0[r] - pf[r][i];
            for c in 0..d {
                v -= p.a[(r, c)] * pu[c][i];
            }
            r2 += v.norm_sqr();
        }
        worst = worst.max(r2.sqrt());
    }
    worst
}

/// Residual tolerance 1e−5·(1 + ‖u‖∞).
pub fn ode_tolerance(u: &SampledSignal) -> f64 {
    1e-5 * (1.0 + u.sup_norm())
}

/// Eigenvalues of A by the complex Schur form.
pub fn eigenvalues(a: &DMatrix<C64>) -> Result<Vec<C64>> {
    a.clone()
        .schur()
        .eigenvalues()
        .map(|v| v.iter().copied().collect())
        .ok_or_else(|| Error::Domain("Schur iteration did not converge".into()))
}

/// Imaginary parts of the eigenvalues on iℝ (|Re μ| ≤ tol).
pub fn imaginary_axis_frequencies(a: &DMatrix<C64>, tol: f64) -> Result<Vec<f64>> {
    Ok(eigenvalues(a)?.into_iter().filter(|m| m.re.abs() <= tol).map(|m| m.im).collect())
}

/// A random bounded instance together with the data used to build it.
#[derive(Clone, Debug)]
pub struct RandomInstance {
    pub problem: EvolutionProblem,
    pub eigenvalues: Vec<C64>,
    /// Frequencies of the exponential sum φ.
    pub forcing: Vec<f64>,
    pub seed: u64,
}

/// A = S·D·S⁻¹ with D diagonal: eigenvalues on iℝ (distinct, so A is
/// semisimple there) or with Re μ ∈ [−2, −0.5]. φ is a finite exponential
/// sum whose frequencies stay ≥ 0.5 away from the imaginary eigenvalues, so
/// the mild solution is bounded.
pub fn random_bounded_problem(seed: u64, tmax: f64, dt: f64) -> Result<RandomInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rng.gen_range(1..=4usize);
    let mut eigs: Vec<C64> = Vec::with_capacity(d);
    while eigs.len() < d {
        let im = (rng.gen_range(-3.5..3.5f64) * 10.0).round() / 10.0;
        let mu = if rng.gen_bool(0.5) {
            C64::new(0.0, im)
        } else {
            C64::new(rng.gen_range(-2.0..-0.5), im)
        };
        if eigs.iter().all(|e| (e - mu).norm() > 0.6) {
            eigs.push(mu);
        }
    }
    let s = loop {
        let m = DMatrix::from_fn(d, d, |i, j| {
            let z = C64::new(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3));
            if i == j {
                z + 1.0
            } else {
                z
            }
        });
        if let Some(inv) = m.clone().try_inverse() {
            if inv.norm() < 10.0 {
                break (m, inv);
            }
        }
    };
    let dm = DMatrix::from_diagonal(&DVector::from_vec(eigs.clone()));
    let a = &s.0 * dm * &s.1;
    let imag: Vec<f64> = eigs.iter().filter(|m| m.re == 0.0).map(|m| m.im).collect();
    let n_terms = rng.gen_range(1..=2usize);
    let mut forcing = Vec::new();
    while forcing.len() < n_terms {
        let nu = (rng.gen_range(-3.5..3.5f64) * 10.0).round() / 10.0;
        if imag.iter().all(|m| (m - nu).abs() >= 0.5) && forcing.iter().all(|f: &f64| (f - nu).abs() > 0.3) {
            forcing.push(nu);
        }
    }
    let amps: Vec<Vec<C64>> = forcing
        .iter()
        .map(|_| (0..d).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
        .collect();
    let n = crate::signal::lattice_steps(tmax, dt)
        .ok_or_else(|| Error::GridMismatch(format!("tmax = {tmax} is not a multiple of dt = {dt}")))? as usize
        + 1;
    let channels: Vec<Vec<C64>> = (0..d)
        .map(|c| {
            (0..n)
                .map(|i| {
                    let t = i as f64 * dt;
                    forcing.iter().zip(&amps).map(|(nu, amp)| amp[c] * C64::from_polar(1.0, nu * t)).sum()
                })
                .collect()
        })
        .collect();
    let phi = SampledSignal::from_channels(Domain::HalfLine, 0.0, dt, channels, Some(0))?;
    let u0: Vec<C64> = (0..d).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    Ok(RandomInstance { problem: EvolutionProblem::new(a, phi, u0)?, eigenvalues: eigs, forcing, seed })
}
