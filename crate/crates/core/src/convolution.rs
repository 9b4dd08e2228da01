//! Convolution F*k(t) = ∫ F(t−s) k(s) ds by direct summation, or by FFT
//! for long kernels.

use std::cell::RefCell;

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::kernel::ConvKernel;
use crate::signal::{lattice_steps, Domain, ExtendedSignal, SampledSignal};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvOptions {
    /// Evaluate every `stride`-th grid point.
    pub stride: usize,
    /// Requested output window; clipped to points whose quadrature window is
    /// covered by data (or by the known zero tail).
    pub range: Option<(f64, f64)>,
}

impl Default for ConvOptions {
    fn default() -> Self {
        ConvOptions { stride: 1, range: None }
    }
}

fn dot(fr: &[f64], fi: &[f64], cr: &[f64], ci: &[f64]) -> (f64, f64) {
    let mut ar = [0.0f64; 4];
    let mut ai = [0.0f64; 4];
    let n = fr.len() / 4 * 4;
    for q in (0..n).step_by(4) {
        for l in 0..4 {
            let (a, b, c, d) = (fr[q + l], fi[q + l], cr[q + l], ci[q + l]);
            ar[l] += a * c - b * d;
            ai[l] += a * d + b * c;
        }
    }
    let mut re = ar.iter().sum::<f64>();
    let mut im = ai.iter().sum::<f64>();
    for q in n..fr.len() {
        re += fr[q] * cr[q] - fi[q] * ci[q];
        im += fr[q] * ci[q] + fi[q] * cr[q];
    }
    (re, im)
}

/// 𝔉*k on the part of the grid where the quadrature window lies inside the
/// record (or its known zero tail). Returns a full-line record.
pub fn convolve(h: &ExtendedSignal, k: &dyn ConvKernel) -> Result<ExtendedSignal> {
    convolve_with(h, k, ConvOptions::default())
}

pub fn convolve_with(h: &ExtendedSignal, k: &dyn ConvKernel, opts: ConvOptions) -> Result<ExtendedSignal> {
    let f = h.signal();
    let dt = f.dt();
    let (first, taps) = k.taps(dt)?;
    let stride = opts.stride.max(1) as i64;
    let n = f.len() as i64;
    let l = taps.len() as i64;
    // output index i (relative to f.t0) needs f indices i−first−(l−1) ..= i−first
    let hi_valid = n - 1 + first;
    let lo_valid = if h.zero_left() { i64::MIN / 4 } else { first + l - 1 };
    let (mut lo, mut hi) = (lo_valid, hi_valid);
    match opts.range {
        Some((a, b)) => {
            let ia = ((a - f.t0()) / dt - 1e-9).ceil() as i64;
            let ib = ((b - f.t0()) / dt + 1e-9).floor() as i64;
            lo = lo.max(ia);
            hi = hi.min(ib);
        }
        None => {
            if h.zero_left() {
                lo = 0;
            }
        }
    }
    if hi < lo {
        return Err(Error::Horizon(format!(
            "kernel window ({} taps) does not fit inside the record [{}, {}]",
            l,
            f.t0(),
            f.t_end()
        )));
    }
    // FFT roundoff scales with ‖F‖∞ over the whole record; exponentially
    // growing records keep direct summation, whose error is local
    if l >= 64 && f.growth_exponent().is_some() {
        let mut out_channels = Vec::with_capacity(f.dim());
        for ch in f.channels() {
            let full = linear_convolution(ch, &taps);
            let out: Vec<C64> = (lo..=hi)
                .step_by(stride as usize)
                .map(|i| {
                    let p = i - first;
                    if p < 0 || p as usize >= full.len() {
                        C64::new(0.0, 0.0)
                    } else {
                        full[p as usize]
                    }
                })
                .collect();
            out_channels.push(out);
        }
        let t0 = f.t0() + lo as f64 * dt;
        let signal = SampledSignal::from_channels(Domain::FullLine, t0, dt * stride as f64, out_channels, None)?
            .with_growth(f.growth_exponent());
        return Ok(ExtendedSignal::from_parts(signal, Domain::FullLine));
    }
    let cr: Vec<f64> = taps.iter().rev().map(|c| c.re).collect();
    let ci: Vec<f64> = taps.iter().rev().map(|c| c.im).collect();
    let mut out_channels = Vec::with_capacity(f.dim());
    for ch in f.channels() {
        let fr: Vec<f64> = ch.iter().map(|v| v.re).collect();
        let fi: Vec<f64> = ch.iter().map(|v| v.im).collect();
        let mut out = Vec::new();
        let mut i = lo;
        while i <= hi {
            // f index for reversed tap m: i − first − (l−1) + m
            let base = i - first - (l - 1);
            let m0 = (-base).max(0);
            let m1 = (n - 1 - base).min(l - 1);
            let v = if m1 < m0 {
                C64::new(0.0, 0.0)
            } else {
                let (s0, s1) = ((base + m0) as usize, (base + m1) as usize + 1);
                let (re, im) = dot(&fr[s0..s1], &fi[s0..s1], &cr[m0 as usize..=m1 as usize], &ci[m0 as usize..=m1 as usize]);
                C64::new(re, im)
            };
            out.push(v);
            i += stride;
        }
        out_channels.push(out);
    }
    let t0 = f.t0() + lo as f64 * dt;
    let growth = f.growth_exponent();
    let signal = SampledSignal::from_channels(Domain::FullLine, t0, dt * stride as f64, out_channels, None)?
        .with_growth(growth);
    Ok(ExtendedSignal::from_parts(signal, Domain::FullLine))
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// c[p] = Σ_m b[m]·a[p−m], length a.len() + b.len() − 1.
pub fn linear_convolution(a: &[C64], b: &[C64]) -> Vec<C64> {
    let len = a.len() + b.len() - 1;
    let n = len.next_power_of_two();
    let (fwd, inv) = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        (p.plan_fft_forward(n), p.plan_fft_inverse(n))
    });
    let mut x = vec![C64::new(0.0, 0.0); n];
    x[..a.len()].copy_from_slice(a);
    let mut y = vec![C64::new(0.0, 0.0); n];
    y[..b.len()].copy_from_slice(b);
    fwd.process(&mut x);
    fwd.process(&mut y);
    for (u, v) in x.iter_mut().zip(&y) {
        *u *= v / n as f64;
    }
    inv.process(&mut x);
    x.truncate(len);
    x
}

/// The part of a full-line record with t ≥ 0, as a half-line signal.
pub fn restrict_half_line(s: &SampledSignal) -> Result<SampledSignal> {
    let k = lattice_steps(-s.t0(), s.dt())
        .filter(|k| *k >= 0 && (*k as usize) < s.len())
        .ok_or_else(|| Error::Horizon("record does not reach t = 0 on its grid".into()))? as usize;
    SampledSignal::from_channels(
        Domain::HalfLine,
        0.0,
        s.dt(),
        s.channels().iter().map(|c| c[k..].to_vec()).collect(),
        None,
    )
    .map(|x| x.with_growth(s.growth_exponent()))
}
