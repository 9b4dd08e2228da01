//! Sampled signals on ℝ₊ or ℝ and the elementary operations on them.

use std::io::{Read, Write};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    HalfLine,
    FullLine,
}

/// Uniformly sampled function J → ℂ^d, stored channel by channel.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledSignal {
    domain: Domain,
    t0: f64,
    dt: f64,
    channels: Vec<Vec<C64>>,
    growth: Option<u32>,
}

/// Zero extension 𝔉 of a signal: a full-line record that knows whether
/// everything left of the record is exactly zero.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedSignal {
    signal: SampledSignal,
    origin_domain: Domain,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mean {
    pub value: Vec<C64>,
}

/// `x` as an integer multiple of `dt`, if it is one (to 1e-9 relative).
pub fn lattice_steps(x: f64, dt: f64) -> Option<i64> {
    let r = x / dt;
    let k = r.round();
    if (r - k).abs() <= 1e-9 * k.abs().max(1.0) {
        Some(k as i64)
    } else {
        None
    }
}

fn on_lattice(x: f64, dt: f64, what: &str) -> Result<i64> {
    lattice_steps(x, dt)
        .ok_or_else(|| Error::GridMismatch(format!("{what} = {x} is not a multiple of dt = {dt}")))
}

/// Largest (over blocks) ‖F‖ and the log-log slope of block sups against 1+t².
pub(crate) fn growth_slope(s: &SampledSignal) -> Option<f64> {
    let n = s.len();
    if n < 64 {
        return None;
    }
    let blocks = 16;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for b in 0..blocks {
        let lo = b * n / blocks;
        let hi = ((b + 1) * n / blocks).max(lo + 1);
        let mut m: f64 = 0.0;
        let mut tm: f64 = 0.0;
        for i in lo..hi {
            let v = s.norm_at(i);
            if v >= m {
                m = v;
                tm = s.t(i).abs();
            }
        }
        if m > 0.0 && tm >= 1.0 {
            xs.push((1.0 + tm * tm).ln());
            ys.push(m.ln());
        }
    }
    // too little spread in log(1+t²) and block noise dominates the slope
    let spread = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max) - xs.iter().copied().fold(f64::INFINITY, f64::min);
    if xs.len() < 4 || spread < 2.0 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    Some(sxy / sxx)
}

impl SampledSignal {
    /// Build from per-channel sample vectors.
    ///
    /// `growth` is the declared exponent k of ‖F(t)‖ ≤ C(1+t²)^k; `None`
    /// declares a signal that is not polynomially bounded.
    pub fn from_channels(
        domain: Domain,
        t0: f64,
        dt: f64,
        channels: Vec<Vec<C64>>,
        growth: Option<u32>,
    ) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidSignal(format!("dt must be positive, got {dt}")));
        }
        if channels.is_empty() || channels[0].is_empty() {
            return Err(Error::InvalidSignal("empty signal".into()));
        }
        let n = channels[0].len();
        if channels.iter().any(|c| c.len() != n) {
            return Err(Error::InvalidSignal("channels have unequal length".into()));
        }
        if domain == Domain::HalfLine && t0 != 0.0 {
            return Err(Error::InvalidSignal(format!("half-line signal must start at 0, got {t0}")));
        }
        if channels.iter().flatten().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidSignal("non-finite sample".into()));
        }
        let s = SampledSignal { domain, t0, dt, channels, growth };
        if let Some(k) = growth {
            if let Some(slope) = growth_slope(&s) {
                if slope > k as f64 + 0.5 {
                    return Err(Error::Growth(format!(
                        "declared exponent {k} but log‖F‖ grows like (1+t²)^{slope:.2}"
                    )));
                }
            }
        }
        Ok(s)
    }

    /// Build from sample vectors (one ℂ^d vector per time).
    pub fn from_vectors(
        domain: Domain,
        t0: f64,
        dt: f64,
        values: &[Vec<C64>],
        growth: Option<u32>,
    ) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSignal("empty signal".into()));
        }
        let d = values[0].len();
        if d == 0 || values.iter().any(|v| v.len() != d) {
            return Err(Error::InvalidSignal("vectors must share a dimension d ≥ 1".into()));
        }
        let channels = (0..d).map(|c| values.iter().map(|v| v[c]).collect()).collect();
        Self::from_channels(domain, t0, dt, channels, growth)
    }

    /// Sample a scalar function on `n` points starting at `t0`.
    pub fn from_fn(
        domain: Domain,
        t0: f64,
        dt: f64,
        n: usize,
        growth: Option<u32>,
        f: impl Fn(f64) -> C64,
    ) -> Result<Self> {
        let ch = (0..n).map(|i| f(t0 + i as f64 * dt)).collect();
        Self::from_channels(domain, t0, dt, vec![ch], growth)
    }

    /// Half-line record on [0, tmax].
    pub fn half_line(tmax: f64, dt: f64, growth: Option<u32>, f: impl Fn(f64) -> C64) -> Result<Self> {
        let n = on_lattice(tmax, dt, "tmax")? as usize + 1;
        Self::from_fn(Domain::HalfLine, 0.0, dt, n, growth, f)
    }

    /// Full-line record on [−tmax, tmax].
    pub fn full_line(tmax: f64, dt: f64, growth: Option<u32>, f: impl Fn(f64) -> C64) -> Result<Self> {
        let m = on_lattice(tmax, dt, "tmax")?;
        Self::from_fn(Domain::FullLine, -(m as f64) * dt, dt, 2 * m as usize + 1, growth, f)
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }
    pub fn t0(&self) -> f64 {
        self.t0
    }
    pub fn dt(&self) -> f64 {
        self.dt
    }
    pub fn len(&self) -> usize {
        self.channels[0].len()
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    pub fn dim(&self) -> usize {
        self.channels.len()
    }
    pub fn growth_exponent(&self) -> Option<u32> {
        self.growth
    }
    pub fn t(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }
    pub fn t_end(&self) -> f64 {
        self.t(self.len() - 1)
    }
    pub fn channel(&self, c: usize) -> &[C64] {
        &self.channels[c]
    }
    pub fn channels(&self) -> &[Vec<C64>] {
        &self.channels
    }
    pub fn value(&self, i: usize) -> Vec<C64> {
        self.channels.iter().map(|c| c[i]).collect()
    }
    pub fn norm_at(&self, i: usize) -> f64 {
        self.channels.iter().map(|c| c[i].norm_sqr()).sum::<f64>().sqrt()
    }
    /// Index of the sample at time `t`, if `t` is a lattice point of the record.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let k = lattice_steps(t - self.t0, self.dt)?;
        (k >= 0 && (k as usize) < self.len()).then_some(k as usize)
    }

    pub fn sup_norm(&self) -> f64 {
        (0..self.len()).map(|i| self.norm_at(i)).fold(0.0, f64::max)
    }

    /// sup ‖F‖ over samples with t in [a, b].
    pub fn sup_on(&self, a: f64, b: f64) -> (f64, f64) {
        let mut best = (0.0, a);
        for i in 0..self.len() {
            let t = self.t(i);
            if t >= a - 1e-12 && t <= b + 1e-12 {
                let v = self.norm_at(i);
                if v > best.0 {
                    best = (v, t);
                }
            }
        }
        best
    }

    pub fn with_growth(mut self, growth: Option<u32>) -> Self {
        self.growth = growth;
        self
    }

    pub(crate) fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    /// Map every channel sample-wise.
    pub fn map(&self, f: impl Fn(f64, C64) -> C64) -> SampledSignal {
        let channels = self
            .channels
            .iter()
            .map(|c| c.iter().enumerate().map(|(i, &v)| f(self.t(i), v)).collect())
            .collect();
        SampledSignal { channels, ..self.clone() }
    }

    /// Map with the channel index available.
    pub fn map_channels(&self, f: impl Fn(usize, f64, C64) -> C64) -> SampledSignal {
        let channels = self
            .channels
            .iter()
            .enumerate()
            .map(|(k, c)| c.iter().enumerate().map(|(i, &v)| f(k, self.t(i), v)).collect())
            .collect();
        SampledSignal { channels, ..self.clone() }
    }

    /// Pointwise difference of two signals on the same grid.
    pub fn sub(&self, other: &SampledSignal) -> Result<SampledSignal> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// Samples with index in `range`, keeping the domain when it still starts at 0.
    pub fn slice(&self, lo: usize, hi: usize) -> SampledSignal {
        let t0 = self.t(lo);
        let domain = if self.domain == Domain::HalfLine && lo == 0 { Domain::HalfLine } else { Domain::FullLine };
        SampledSignal {
            domain,
            t0,
            dt: self.dt,
            channels: self.channels.iter().map(|c| c[lo..hi].to_vec()).collect(),
            growth: self.growth,
        }
    }

    /// Every `stride`-th sample.
    pub fn decimate(&self, stride: usize) -> SampledSignal {
        SampledSignal {
            dt: self.dt * stride as f64,
            channels: self.channels.iter().map(|c| c.iter().step_by(stride).copied().collect()).collect(),
            ..self.clone()
        }
    }

    /// Pointwise sum of two signals on the same grid.
    pub fn add(&self, other: &SampledSignal) -> Result<SampledSignal> {
        self.check_same_grid(other)?;
        let channels = self
            .channels
            .iter()
            .zip(&other.channels)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect();
        let growth = match (self.growth, other.growth) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
        Ok(SampledSignal { channels, growth, ..self.clone() })
    }

    pub fn scale(&self, c: C64) -> SampledSignal {
        self.map(|_, v| v * c)
    }

    fn check_same_grid(&self, other: &SampledSignal) -> Result<()> {
        if self.len() != other.len()
            || self.dim() != other.dim()
            || (self.t0 - other.t0).abs() > 1e-9 * self.dt
            || (self.dt - other.dt).abs() > 1e-12 * self.dt
        {
            return Err(Error::GridMismatch("signals are on different grids".into()));
        }
        Ok(())
    }

    /// F_s(t) = F(t+s). On the half line a positive shift drops the first
    /// samples and a negative one pads with the zero extension.
    pub fn translate(&self, s: f64) -> Result<SampledSignal> {
        let k = on_lattice(s, self.dt, "shift")?;
        match self.domain {
            Domain::FullLine => Ok(SampledSignal { t0: self.t0 - k as f64 * self.dt, ..self.clone() }),
            Domain::HalfLine => {
                if k >= 0 {
                    let k = k as usize;
                    if k >= self.len() {
                        return Err(Error::Horizon(format!("shift {s} exceeds the record")));
                    }
                    Ok(SampledSignal { t0: self.t0, ..self.slice(k, self.len()).with_domain(Domain::HalfLine) })
                } else {
                    let pad = (-k) as usize;
                    let channels = self
                        .channels
                        .iter()
                        .map(|c| std::iter::repeat(C64::new(0.0, 0.0)).take(pad).chain(c.iter().copied()).collect())
                        .collect();
                    Ok(SampledSignal { channels, ..self.clone() })
                }
            }
        }
    }

    /// γ_ω F with γ_ω(t) = e^{iωt}.
    pub fn modulate(&self, omega: f64) -> SampledSignal {
        self.map(|t, v| v * C64::from_polar(1.0, omega * t))
    }

    /// t ↦ F(−t); full-line records only.
    pub fn reflect(&self) -> Result<SampledSignal> {
        if self.domain != Domain::FullLine {
            return Err(Error::Domain("reflect needs a full-line signal".into()));
        }
        let channels = self.channels.iter().map(|c| c.iter().rev().copied().collect()).collect();
        Ok(SampledSignal { t0: -self.t_end(), channels, ..self.clone() })
    }

    /// Δ_s F = F_s − F on the part of the record where both are known.
    pub fn difference(&self, s: f64) -> Result<SampledSignal> {
        let k = on_lattice(s, self.dt, "lag")?;
        let m = k.unsigned_abs() as usize;
        if m >= self.len() {
            return Err(Error::Horizon(format!("lag {s} exceeds the record")));
        }
        let n = self.len() - m;
        // F(t+s) − F(t) for t with both t and t+s in the record.
        let channels = self
            .channels
            .iter()
            .map(|c| {
                (0..n)
                    .map(|i| if k >= 0 { c[i + m] - c[i] } else { c[i] - c[i + m] })
                    .collect()
            })
            .collect();
        let t0 = if k >= 0 { self.t0 } else { self.t(m) };
        let domain = if k >= 0 { self.domain } else { Domain::FullLine };
        Ok(SampledSignal { domain, t0, channels, ..self.clone() })
    }

    /// M_h F(t) = (1/h)∫₀^h F(t+s) ds by the trapezoid rule, on [t0, t_end − h].
    pub fn mollify(&self, h: f64) -> Result<SampledSignal> {
        if !(h > 0.0) {
            return Err(Error::Domain(format!("mollifier width must be positive, got {h}")));
        }
        let m = on_lattice(h, self.dt, "h")? as usize;
        if m >= self.len() {
            return Err(Error::Horizon(format!("h = {h} exceeds the record")));
        }
        let n = self.len() - m;
        let channels = self
            .channels
            .iter()
            .map(|c| {
                let p = cumulative_trapezoid(c, self.dt);
                (0..n).map(|i| (p[i + m] - p[i]) / h).collect()
            })
            .collect();
        Ok(SampledSignal { channels, ..self.clone() })
    }

    /// PF(t) = ∫₀^t F(s) ds by cumulative trapezoid; 0 must be a grid point.
    pub fn indefinite_integral(&self) -> Result<SampledSignal> {
        let k0 = on_lattice(-self.t0, self.dt, "origin offset")?;
        if k0 < 0 || k0 as usize >= self.len() {
            return Err(Error::Horizon("record does not contain t = 0".into()));
        }
        let k0 = k0 as usize;
        let channels = self
            .channels
            .iter()
            .map(|c| {
                let p = cumulative_trapezoid(c, self.dt);
                let base = p[k0];
                p.into_iter().map(|v| v - base).collect()
            })
            .collect();
        Ok(SampledSignal { channels, ..self.clone() })
    }

    /// Zero extension 𝔉 down to `t_min`.
    pub fn extend_by_zero(&self, t_min: f64) -> Result<ExtendedSignal> {
        if t_min > self.t0 {
            return Err(Error::GridMismatch(format!("t_min = {t_min} lies right of t0 = {}", self.t0)));
        }
        let k = on_lattice(self.t0 - t_min, self.dt, "t_min offset")? as usize;
        match self.domain {
            Domain::FullLine => Ok(ExtendedSignal { signal: self.clone(), origin_domain: Domain::FullLine }),
            Domain::HalfLine => {
                let channels = self
                    .channels
                    .iter()
                    .map(|c| std::iter::repeat(C64::new(0.0, 0.0)).take(k).chain(c.iter().copied()).collect())
                    .collect();
                let signal = SampledSignal { domain: Domain::FullLine, t0: self.t0 - k as f64 * self.dt, channels, ..self.clone() };
                Ok(ExtendedSignal { signal, origin_domain: Domain::HalfLine })
            }
        }
    }

    /// 𝔉 without padding: the record itself plus the knowledge of zero left tails.
    pub fn extended(&self) -> ExtendedSignal {
        ExtendedSignal { signal: self.clone().with_domain(Domain::FullLine), origin_domain: self.domain }
    }

    /// Read `t,re0,im0[,re1,im1,...]`. Records starting at 0 are read as
    /// half-line signals; growth is inferred from the data.
    pub fn read_csv(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::Parse { line: 1, msg: e.to_string() })?.clone();
        let cols: Vec<&str> = headers.iter().collect();
        if cols.len() < 3 || cols.len() % 2 == 0 || cols[0] != "t" {
            return Err(Error::Parse { line: 1, msg: "header must be t,re0,im0[,re1,im1,...]".into() });
        }
        let d = (cols.len() - 1) / 2;
        for c in 0..d {
            if cols[1 + 2 * c] != format!("re{c}") || cols[2 + 2 * c] != format!("im{c}") {
                return Err(Error::Parse { line: 1, msg: format!("expected re{c},im{c}") });
            }
        }
        let mut ts = Vec::new();
        let mut channels: Vec<Vec<C64>> = vec![Vec::new(); d];
        for (row, rec) in rdr.records().enumerate() {
            let line = row + 2;
            let rec = rec.map_err(|e| Error::Parse { line, msg: e.to_string() })?;
            if rec.len() != cols.len() {
                return Err(Error::Parse { line, msg: format!("expected {} fields, got {}", cols.len(), rec.len()) });
            }
            let num = |i: usize| -> Result<f64> {
                rec[i].parse::<f64>().map_err(|e| Error::Parse { line, msg: format!("field {}: {e}", i + 1) })
            };
            ts.push(num(0)?);
            for c in 0..d {
                channels[c].push(C64::new(num(1 + 2 * c)?, num(2 + 2 * c)?));
            }
        }
        if ts.len() < 2 {
            return Err(Error::Parse { line: ts.len() + 1, msg: "need at least two samples".into() });
        }
        let dt = (ts[ts.len() - 1] - ts[0]) / (ts.len() - 1) as f64;
        for i in 1..ts.len() {
            let step = ts[i] - ts[i - 1];
            if ((step - dt) / dt).abs() > 1e-9 {
                return Err(Error::Parse { line: i + 2, msg: format!("non-uniform spacing: step {step} vs {dt}") });
            }
        }
        let domain = if ts[0] == 0.0 { Domain::HalfLine } else { Domain::FullLine };
        let mut s = Self::from_channels(domain, ts[0], dt, channels, None)?;
        s.growth = match growth_slope(&s) {
            Some(slope) if slope > 8.0 => None,
            Some(slope) => Some(slope.max(0.0).ceil() as u32),
            None => Some(0),
        };
        Ok(s)
    }

    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        let mut header = String::from("t");
        for c in 0..self.dim() {
            header.push_str(&format!(",re{c},im{c}"));
        }
        writeln!(w, "{header}")?;
        for i in 0..self.len() {
            let mut line = format!("{}", self.t(i));
            for c in &self.channels {
                line.push_str(&format!(",{},{}", c[i].re, c[i].im));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

impl ExtendedSignal {
    pub(crate) fn from_parts(signal: SampledSignal, origin_domain: Domain) -> Self {
        ExtendedSignal { signal: signal.with_domain(Domain::FullLine), origin_domain }
    }
    pub fn signal(&self) -> &SampledSignal {
        &self.signal
    }
    pub fn origin_domain(&self) -> Domain {
        self.origin_domain
    }
    /// True when values left of the record are known to vanish.
    pub fn zero_left(&self) -> bool {
        self.origin_domain == Domain::HalfLine
    }
    /// Restriction to J: t ≥ 0 for half-line origin, the whole record otherwise.
    pub fn restrict(&self) -> Result<SampledSignal> {
        match self.origin_domain {
            Domain::FullLine => Ok(self.signal.clone()),
            Domain::HalfLine => {
                let k = lattice_steps(-self.signal.t0, self.signal.dt)
                    .filter(|k| *k >= 0)
                    .ok_or_else(|| Error::GridMismatch("origin is not a grid point".into()))?
                    as usize;
                if k >= self.signal.len() {
                    return Err(Error::Horizon("no samples on the half line".into()));
                }
                Ok(self.signal.slice(k, self.signal.len()).with_domain(Domain::HalfLine))
            }
        }
    }
}

/// Cumulative trapezoid ∫ from the first sample.
pub fn cumulative_trapezoid(v: &[C64], dt: f64) -> Vec<C64> {
    let mut out = Vec::with_capacity(v.len());
    let mut acc = C64::new(0.0, 0.0);
    out.push(acc);
    for w in v.windows(2) {
        acc += (w[0] + w[1]) * (0.5 * dt);
        out.push(acc);
    }
    out
}
