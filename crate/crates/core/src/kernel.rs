//! Test kernels: the bump ψ = φ̂², approximate identities, band-pass
//! plateaus, Wiener division, boxes s_h and exponentials f_λ.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{bump, bump_cdf, bump_ft, bump_mass, bump_normalization, integrate_c, taper};
use crate::signal::{lattice_steps, Domain, SampledSignal};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    D,
    S,
    L1,
}

pub type FtFn = Arc<dyn Fn(f64) -> C64 + Send + Sync>;

/// Sampled kernel with its Fourier transform k̂(ω) = ∫ e^{−iωt} k(t) dt.
#[derive(Clone)]
pub struct TestKernel {
    id: String,
    samples: SampledSignal,
    ft_grid: Vec<f64>,
    ft_samples: Vec<C64>,
    ft_support: (f64, f64),
    family: Family,
    cut_mass: f64,
    ft: FtFn,
}

impl fmt::Debug for TestKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestKernel")
            .field("id", &self.id)
            .field("family", &self.family)
            .field("ft_support", &self.ft_support)
            .field("cut_mass", &self.cut_mass)
            .field("taps", &self.samples.len())
            .finish()
    }
}

/// Anything that can be applied by `convolve`: weighted taps c_j = w_j·k(j·dt)
/// starting at index `first`.
pub trait ConvKernel {
    fn taps(&self, dt: f64) -> Result<(i64, Vec<C64>)>;
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxKernel {
    pub h: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpKernel {
    pub lambda: C64,
}

/// Half-width beyond which |k| < 1e-14·max, scanning outward in `step`.
fn natural_width(f: &dyn Fn(f64) -> f64, step: f64, max: f64) -> f64 {
    let peak = f(0.0).abs().max(1e-300);
    let mut last = step;
    let mut t = step;
    while t <= max {
        if f(t).abs() >= 1e-14 * peak || f(-t).abs() >= 1e-14 * peak {
            last = t;
        }
        t += step;
    }
    last + step
}

fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}

impl TestKernel {
    /// Assemble a kernel from a real-time sampler, tapering beyond `half_width/2`.
    /// `tail` is how far past the taper the cut mass is accounted for.
    #[allow(clippy::too_many_arguments)]
    fn build(
        id: String,
        dt: f64,
        half_width: f64,
        tapered: bool,
        k: &dyn Fn(f64) -> C64,
        ft: FtFn,
        ft_support: (f64, f64),
        ft_grid: Vec<f64>,
        family: Family,
        tail: f64,
    ) -> Result<Self> {
        let m = (half_width / dt).ceil() as i64;
        let w = m as f64 * dt;
        let mut vals = Vec::with_capacity(2 * m as usize + 1);
        let mut cut = 0.0;
        for j in -m..=m {
            let t = j as f64 * dt;
            let v = k(t);
            let tp = if tapered { taper(t, w) } else { 1.0 };
            cut += v.norm() * (1.0 - tp) * dt;
            vals.push(v * tp);
        }
        // mass cut off entirely beyond the stored support
        let mut t = w + dt;
        while t <= w + tail {
            cut += (k(t).norm() + k(-t).norm()) * dt;
            t += dt;
        }
        let samples = SampledSignal::from_channels(Domain::FullLine, -(m as f64) * dt, dt, vec![vals], Some(0))?;
        let ft_samples = ft_grid.iter().map(|&w| ft(w)).collect();
        Ok(TestKernel { id, samples, ft_grid, ft_samples, ft_support, family, cut_mass: cut, ft })
    }

    pub fn id(&self) -> &str {
        &self.id
    }
    pub fn samples(&self) -> &SampledSignal {
        &self.samples
    }
    pub fn family(&self) -> Family {
        self.family
    }
    pub fn ft_support(&self) -> (f64, f64) {
        self.ft_support
    }
    pub fn cut_mass(&self) -> f64 {
        self.cut_mass
    }
    pub fn ft_grid(&self) -> &[f64] {
        &self.ft_grid
    }
    pub fn ft_samples(&self) -> &[C64] {
        &self.ft_samples
    }
    pub fn half_width(&self) -> f64 {
        self.samples.t_end().max(-self.samples.t0())
    }
    pub fn dt(&self) -> f64 {
        self.samples.dt()
    }

    /// Stored (closed-form) Fourier transform of the untruncated kernel.
    pub fn ft(&self, w: f64) -> C64 {
        (self.ft)(w)
    }

    /// Fourier transform of the stored samples by the trapezoid rule.
    pub fn ft_quadrature(&self, w: f64) -> C64 {
        let s = &self.samples;
        let c = s.channel(0);
        let rot = C64::from_polar(1.0, -w * s.dt());
        let mut z = C64::from_polar(1.0, -w * s.t0());
        let mut acc = C64::new(0.0, 0.0);
        for (j, v) in c.iter().enumerate() {
            acc += v * z;
            z *= rot;
            if j % 512 == 511 {
                z = C64::from_polar(1.0, -w * s.t(j + 1));
            }
        }
        acc * s.dt()
    }

    /// ∫|k| of the stored samples.
    pub fn mass(&self) -> f64 {
        self.samples.channel(0).iter().map(|v| v.norm()).sum::<f64>() * self.samples.dt()
    }

    /// Allowed Fourier mismatch between the samples and the stored transform.
    pub fn ft_tolerance(&self, tol_ft: f64) -> f64 {
        tol_ft * (1.0 + self.mass()) + self.cut_mass
    }

    /// Largest |quadrature FT − stored FT| over the frequency grid.
    pub fn fourier_consistency_error(&self) -> f64 {
        self.ft_grid
            .iter()
            .zip(&self.ft_samples)
            .map(|(&w, v)| (self.ft_quadrature(w) - v).norm())
            .fold(0.0, f64::max)
    }

    /// e^{iω0 t}·k(t): shifts the transform by ω0.
    pub fn modulate(&self, w0: f64) -> TestKernel {
        let ft = self.ft.clone();
        TestKernel {
            id: format!("{}·γ({w0})", self.id),
            samples: self.samples.modulate(w0),
            ft_grid: self.ft_grid.iter().map(|w| w + w0).collect(),
            ft_samples: self.ft_samples.clone(),
            ft_support: (self.ft_support.0 + w0, self.ft_support.1 + w0),
            family: self.family,
            cut_mass: self.cut_mass,
            ft: Arc::new(move |w| ft(w - w0)),
        }
    }

    /// k′ by spectral differentiation of the samples; transform iω·k̂(ω).
    pub fn derivative(&self) -> Result<TestKernel> {
        use rustfft::FftPlanner;
        let s = &self.samples;
        let n = s.len();
        let size = (2 * n).next_power_of_two();
        let mut buf: Vec<C64> = s.channel(0).to_vec();
        buf.resize(size, C64::new(0.0, 0.0));
        let mut planner = FftPlanner::new();
        planner.plan_fft_forward(size).process(&mut buf);
        let dw = 2.0 * PI / (size as f64 * s.dt());
        for (j, v) in buf.iter_mut().enumerate() {
            let jj = if j <= size / 2 { j as f64 } else { j as f64 - size as f64 };
            if j == size / 2 {
                *v = C64::new(0.0, 0.0);
            } else {
                *v *= C64::new(0.0, jj * dw);
            }
        }
        planner.plan_fft_inverse(size).process(&mut buf);
        let vals: Vec<C64> = buf[..n].iter().map(|v| v / size as f64).collect();
        let ft = self.ft.clone();
        let ft: FtFn = Arc::new(move |w| C64::new(0.0, w) * ft(w));
        let ft_samples = self.ft_grid.iter().map(|&w| ft(w)).collect();
        Ok(TestKernel {
            id: format!("{}′", self.id),
            samples: SampledSignal::from_channels(Domain::FullLine, s.t0(), s.dt(), vec![vals], Some(0))?,
            ft_grid: self.ft_grid.clone(),
            ft_samples,
            ft_support: self.ft_support,
            family: self.family,
            cut_mass: self.cut_mass * self.ft_support.0.abs().max(self.ft_support.1.abs()),
            ft,
        })
    }

    /// Scale the kernel by a constant (used to normalize k̂(ω) = 1).
    pub fn scaled(&self, c: C64) -> TestKernel {
        let ft = self.ft.clone();
        TestKernel {
            id: self.id.clone(),
            samples: self.samples.scale(c),
            ft_grid: self.ft_grid.clone(),
            ft_samples: self.ft_samples.iter().map(|v| v * c).collect(),
            ft_support: self.ft_support,
            family: self.family,
            cut_mass: self.cut_mass * c.norm(),
            ft: Arc::new(move |w| ft(w) * c),
        }
    }

    /// CSV samples plus the JSON sidecar {family, ft_support, cut_mass}.
    pub fn sidecar_json(&self) -> serde_json::Value {
        serde_json::json!({
            "family": self.family,
            "ft_support": [self.ft_support.0, self.ft_support.1],
            "cut_mass": self.cut_mass,
        })
    }
}

impl ConvKernel for TestKernel {
    fn taps(&self, dt: f64) -> Result<(i64, Vec<C64>)> {
        if (dt - self.dt()).abs() > 1e-12 * dt {
            return Err(Error::GridMismatch(format!("kernel dt {} vs signal dt {dt}", self.dt())));
        }
        let first = lattice_steps(self.samples.t0(), dt)
            .ok_or_else(|| Error::GridMismatch("kernel grid is off the lattice".into()))?;
        let c = self.samples.channel(0);
        let n = c.len();
        let taps = c
            .iter()
            .enumerate()
            .map(|(j, v)| if j == 0 || j == n - 1 { v * (0.5 * dt) } else { v * dt })
            .collect();
        Ok((first, taps))
    }
}

impl ConvKernel for BoxKernel {
    fn taps(&self, dt: f64) -> Result<(i64, Vec<C64>)> {
        let m = lattice_steps(self.h, dt)
            .filter(|m| *m > 0)
            .ok_or_else(|| Error::GridMismatch(format!("h = {} is not a positive multiple of dt", self.h)))?;
        let w = dt / self.h;
        let taps = (0..=m)
            .map(|j| C64::new(if j == 0 || j == m { 0.5 * w } else { w }, 0.0))
            .collect();
        Ok((-m, taps))
    }
}

impl ConvKernel for ExpKernel {
    fn taps(&self, dt: f64) -> Result<(i64, Vec<C64>)> {
        let k = self.to_test_kernel(dt)?;
        k.taps(dt)
    }
}

/// φ̂ for the bump φ = a·b: φ̂(t) = a·(∫b)·Bc(t).
fn bump_phi_hat(t: f64) -> f64 {
    bump_normalization() * bump_mass() * bump_ft(t)
}

/// ψ̂(ω) = 2π(φ*φ)(ω), supported in [−2, 2].
pub fn bump_psi_hat(w: f64) -> f64 {
    if w.abs() >= 2.0 {
        return 0.0;
    }
    let a = bump_normalization();
    let lo = (w - 1.0).max(-1.0);
    let hi = (w + 1.0).min(1.0);
    let i = integrate_c(&|x| C64::new(bump(x) * bump(w - x), 0.0), lo, hi, 1e-16).re;
    2.0 * PI * a * a * i
}

/// ψ = φ̂² with ψ̂(0) = 1 and ψ̂ supported in [−2, 2].
pub fn bump_kernel(dt: f64) -> Result<TestKernel> {
    approximate_identity(1, dt)
}

/// ψ_n(t) = nψ(nt); ψ̂_n(ω) = ψ̂(ω/n).
pub fn approximate_identity(n: u32, dt: f64) -> Result<TestKernel> {
    if n == 0 {
        return Err(Error::Domain("approximate identity index must be ≥ 1".into()));
    }
    let nf = n as f64;
    let k = move |t: f64| nf * bump_phi_hat(nf * t).powi(2);
    let w = natural_width(&k, 0.5 / nf, 400.0 / nf);
    let ft: FtFn = Arc::new(move |w| C64::new(bump_psi_hat(w / nf), 0.0));
    let g = grid(-2.5 * nf, 2.5 * nf, 250);
    TestKernel::build(
        format!("bump(n={n})"),
        dt,
        w,
        false,
        &|t| C64::new(k(t), 0.0),
        ft,
        (-2.0 * nf, 2.0 * nf),
        g,
        Family::S,
        0.0,
    )
}

/// Plateau P with P = 1 on [−δ, δ], support [−2δ, 2δ]: the indicator of
/// [−1.5δ, 1.5δ] smoothed by the unit-mass bump of radius δ/2.
pub fn plateau(w: f64, delta: f64) -> f64 {
    let r = 0.5 * delta;
    bump_cdf((w + 1.5 * delta) / r) - bump_cdf((w - 1.5 * delta) / r)
}

/// Inverse transform of the plateau: sin(1.5δt)/(πt)·Bc(δt/2).
fn plateau_time(t: f64, delta: f64) -> f64 {
    let sinc = if t.abs() < 1e-12 { 1.5 * delta / PI } else { (1.5 * delta * t).sin() / (PI * t) };
    sinc * bump_ft(0.5 * delta * t)
}

/// Default stored half-width for band-pass kernels.
pub fn default_bandpass_width(delta: f64) -> f64 {
    64.0 / delta
}

/// Band-pass kernel with ψ̂ = 1 on [ω0−δ, ω0+δ] and support [ω0−2δ, ω0+2δ].
pub fn bandpass_kernel(w0: f64, delta: f64, dt: f64) -> Result<TestKernel> {
    bandpass_kernel_with_width(w0, delta, dt, default_bandpass_width(delta))
}

/// As [`bandpass_kernel`] with the time support capped at `max_half_width`
/// (smoothly tapered from half of it); the removed mass is recorded.
pub fn bandpass_kernel_with_width(w0: f64, delta: f64, dt: f64, max_half_width: f64) -> Result<TestKernel> {
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("bandwidth must be positive, got {delta}")));
    }
    let base = move |t: f64| plateau_time(t, delta);
    let w = max_half_width;
    let ft: FtFn = Arc::new(move |w| C64::new(plateau(w - w0, delta), 0.0));
    let g = grid(w0 - 2.5 * delta, w0 + 2.5 * delta, 250);
    TestKernel::build(
        format!("bandpass(ω0={w0},δ={delta})"),
        dt,
        w,
        true,
        &|t| C64::from_polar(base(t), w0 * t),
        ft,
        (w0 - 2.0 * delta, w0 + 2.0 * delta),
        g,
        Family::S,
        3.0 * w,
    )
}

/// Lemma 1.1 surrogate: g with ĝ = χ/f̂, χ a plateau equal to 1 on K.
pub fn wiener_divide(f: &TestKernel, k: (f64, f64), eps_div: f64) -> Result<TestKernel> {
    let (k1, k2) = k;
    if !(k2 > k1) {
        return Err(Error::Domain("K must be a non-degenerate interval".into()));
    }
    let min_on = |a: f64, b: f64| {
        grid(a, b, 400).into_iter().map(|w| f.ft(w).norm()).fold(f64::INFINITY, f64::min)
    };
    let m = min_on(k1, k2);
    if m < eps_div {
        return Err(Error::Division { min: m, eps: eps_div });
    }
    // enlargement η of K on which f̂ stays away from 0
    let mut eta = 0.25 * (k2 - k1).max(1.0);
    while min_on(k1 - eta, k2 + eta) < eps_div {
        eta *= 0.5;
        if eta < 1e-3 * (k2 - k1) {
            return Err(Error::Division { min: min_on(k1 - eta, k2 + eta), eps: eps_div });
        }
    }
    let (lo, hi) = (k1 - eta, k2 + eta);
    let chi = move |w: f64| {
        let r = 0.5 * eta;
        bump_cdf((w - (k1 - r)) / r) - bump_cdf((w - (k2 + r)) / r)
    };
    let fft = f.ft.clone();
    let ghat: FtFn = Arc::new(move |w| {
        let c = chi(w);
        if c == 0.0 {
            C64::new(0.0, 0.0)
        } else {
            c / fft(w)
        }
    });
    // inverse transform on a fine frequency grid
    let half_width = 560.0 / eta;
    let nw = ((hi - lo) / (PI / (4.0 * half_width))).ceil() as usize;
    let nodes = grid(lo, hi, nw);
    let dw = (hi - lo) / nw as f64;
    let gvals: Vec<C64> = nodes.iter().map(|&w| ghat(w)).collect();
    let sampler = |t: f64| -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        let rot = C64::from_polar(1.0, dw * t);
        let mut z = C64::new(1.0, 0.0);
        for (j, (w, g)) in nodes.iter().zip(&gvals).enumerate() {
            if j % 256 == 0 {
                z = C64::from_polar(1.0, w * t);
            }
            acc += g * z;
            z *= rot;
        }
        acc * dw / (2.0 * PI)
    };
    let kg = grid(lo - 0.25 * eta, hi + 0.25 * eta, 250);
    let g = TestKernel::build(
        format!("wiener({},[{k1},{k2}])", f.id),
        f.dt(),
        half_width,
        true,
        &sampler,
        ghat.clone(),
        (lo, hi),
        kg,
        Family::S,
        0.0,
    )?;
    let err = grid(k1, k2, 400)
        .into_iter()
        .map(|w| (ghat(w) * f.ft(w) - 1.0).norm())
        .fold(0.0, f64::max);
    if err > 1e-8 {
        return Err(Error::Division { min: m, eps: eps_div });
    }
    Ok(g)
}

pub fn box_kernel(h: f64) -> Result<BoxKernel> {
    if !(h > 0.0) {
        return Err(Error::Domain(format!("box width must be positive, got {h}")));
    }
    Ok(BoxKernel { h })
}

impl BoxKernel {
    /// ŝ_h(ω) = (e^{iωh} − 1)/(iωh).
    pub fn ft(&self, w: f64) -> C64 {
        let z = C64::new(0.0, w * self.h);
        if z.norm() < 1e-8 {
            return 1.0 + z / 2.0;
        }
        (z.exp() - 1.0) / z
    }

    pub fn to_test_kernel(&self, dt: f64) -> Result<TestKernel> {
        let (first, taps) = self.taps(dt)?;
        let vals: Vec<C64> = taps
            .iter()
            .enumerate()
            .map(|(j, v)| if j == 0 || j == taps.len() - 1 { v * (2.0 / dt) } else { v / dt })
            .collect();
        let h = self.h;
        let ft: FtFn = Arc::new(move |w| BoxKernel { h }.ft(w));
        let g = grid(-10.0, 10.0, 400);
        let ft_samples = g.iter().map(|&w| ft(w)).collect();
        Ok(TestKernel {
            id: format!("box(h={h})"),
            samples: SampledSignal::from_channels(Domain::FullLine, first as f64 * dt, dt, vec![vals], Some(0))?,
            ft_grid: g,
            ft_samples,
            ft_support: (f64::NEG_INFINITY, f64::INFINITY),
            family: Family::L1,
            cut_mass: 0.0,
            ft,
        })
    }
}

pub fn exp_kernel(lambda: C64) -> Result<ExpKernel> {
    if lambda.re == 0.0 {
        return Err(Error::Domain(format!("f_λ needs Re λ ≠ 0 (f_λ ∉ L¹ for λ = {lambda})")));
    }
    Ok(ExpKernel { lambda })
}

impl ExpKernel {
    /// f̂_λ(ω) = 1/(λ + iω) on both sides.
    pub fn ft(&self, w: f64) -> C64 {
        1.0 / (self.lambda + C64::new(0.0, w))
    }

    /// f_λ(t): e^{−λt} on t ≥ 0 for Re λ > 0, −e^{−λt} on t ≤ 0 for Re λ < 0.
    pub fn eval(&self, t: f64) -> C64 {
        let l = self.lambda;
        if l.re > 0.0 {
            if t >= 0.0 {
                (-l * t).exp()
            } else {
                C64::new(0.0, 0.0)
            }
        } else if t <= 0.0 {
            -(-l * t).exp()
        } else {
            C64::new(0.0, 0.0)
        }
    }

    /// Sampled f_λ cut where |f_λ| < 1e-14; the jump at 0 gets weight ½.
    pub fn to_test_kernel(&self, dt: f64) -> Result<TestKernel> {
        let l = self.lambda;
        let len = (14.0 * 10f64.ln() / l.re.abs() / dt).ceil() as i64;
        let right = l.re > 0.0;
        let vals: Vec<C64> = (0..=len)
            .map(|j| {
                let t = if right { j as f64 * dt } else { (j - len) as f64 * dt };
                self.eval(t)
            })
            .collect();
        let first = if right { 0 } else { -len };
        let cut = (-(l.re.abs()) * len as f64 * dt).exp() / l.re.abs();
        let lam = l;
        let ft: FtFn = Arc::new(move |w| 1.0 / (lam + C64::new(0.0, w)));
        let g = grid(-10.0, 10.0, 400);
        let ft_samples = g.iter().map(|&w| ft(w)).collect();
        Ok(TestKernel {
            id: format!("exp(λ={l})"),
            samples: SampledSignal::from_channels(Domain::FullLine, first as f64 * dt, dt, vec![vals], Some(0))?,
            ft_grid: g,
            ft_samples,
            ft_support: (f64::NEG_INFINITY, f64::INFINITY),
            family: Family::L1,
            cut_mass: cut,
            ft,
        })
    }
}

/// Unit-mass bump b(t)/∫b on [−1, 1]: a kernel in 𝒟.
pub fn compact_bump(dt: f64) -> Result<TestKernel> {
    let z = bump_mass();
    let ft: FtFn = Arc::new(|w| C64::new(bump_ft(w), 0.0));
    TestKernel::build(
        "compact-bump".into(),
        dt,
        1.0,
        false,
        &|t| C64::new(bump(t) / z, 0.0),
        ft,
        (f64::NEG_INFINITY, f64::INFINITY),
        grid(-10.0, 10.0, 400),
        Family::D,
        0.0,
    )
}

/// The kernel f annihilating e^t: f = φ on t ≥ 0 and f(t) = −e^{2t}φ(−t)
/// for t < 0, with φ a unit-mass bump on [0, a].
pub fn exp_annihilator(a: f64, dt: f64) -> Result<TestKernel> {
    let z = bump_mass();
    let phi = move |t: f64| if t <= 0.0 || t >= a { 0.0 } else { bump(2.0 * t / a - 1.0) * 2.0 / (a * z) };
    let f = move |t: f64| if t >= 0.0 { phi(t) } else { -(2.0 * t).exp() * phi(-t) };
    let ft: FtFn = Arc::new(move |w| {
        integrate_c(
            &|s| C64::new(phi(s), 0.0) * (C64::from_polar(1.0, -w * s) - C64::from_polar((-2.0 * s).exp(), w * s)),
            0.0,
            a,
            1e-15,
        )
    });
    TestKernel::build(
        format!("exp-annihilator(a={a})"),
        dt,
        a,
        false,
        &|t| C64::new(f(t), 0.0),
        ft,
        (f64::NEG_INFINITY, f64::INFINITY),
        grid(-5.0, 5.0, 100),
        Family::D,
        0.0,
    )
}

/// Support length a used for the annihilator at frequency ω: a < π/(2|ω|).
pub fn annihilator_support(w: f64) -> f64 {
    (1.0f64).min(PI / (4.0 * w.abs().max(1e-9)))
}
