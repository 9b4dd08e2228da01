//! Quadrature rules and the C∞ bump b(t) = e^{1/(t²−1)} on (−1, 1).

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64 as C64;

/// Gauss–Legendre nodes and weights on [−1, 1] (Newton on P_n).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pn1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn gl20() -> &'static (Vec<f64>, Vec<f64>) {
    static R: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    R.get_or_init(|| gauss_legendre(20))
}

fn gl_panel(f: &dyn Fn(f64) -> C64, a: f64, b: f64) -> C64 {
    let (x, w) = gl20();
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    x.iter().zip(w).map(|(xi, wi)| f(c + h * xi) * *wi).sum::<C64>() * h
}

/// Adaptive composite Gauss–Legendre for smooth complex integrands.
pub fn integrate_c(f: &dyn Fn(f64) -> C64, a: f64, b: f64, tol: f64) -> C64 {
    fn rec(f: &dyn Fn(f64) -> C64, a: f64, b: f64, whole: C64, tol: f64, depth: u32) -> C64 {
        let m = 0.5 * (a + b);
        let l = gl_panel(f, a, m);
        let r = gl_panel(f, m, b);
        if depth >= 30 || (l + r - whole).norm() <= tol.max(4e-16 * (l + r).norm()) {
            return l + r;
        }
        rec(f, a, m, l, 0.5 * tol, depth + 1) + rec(f, m, b, r, 0.5 * tol, depth + 1)
    }
    if a == b {
        return C64::new(0.0, 0.0);
    }
    // a few initial panels so narrow features are seen
    let k = 8;
    let h = (b - a) / k as f64;
    (0..k)
        .map(|i| {
            let (lo, hi) = (a + i as f64 * h, a + (i + 1) as f64 * h);
            rec(f, lo, hi, gl_panel(f, lo, hi), tol / k as f64, 0)
        })
        .sum()
}

pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    integrate_c(&|x| C64::new(f(x), 0.0), a, b, tol).re
}

/// Unnormalized bump e^{1/(t²−1)} on (−1, 1), zero elsewhere.
pub fn bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (1.0 / (t * t - 1.0)).exp()
    }
}

/// ∫_{−1}^{1} b.
pub fn bump_mass() -> f64 {
    static M: OnceLock<f64> = OnceLock::new();
    *M.get_or_init(|| integrate(&bump, -1.0, 1.0, 1e-16))
}

struct CdfTable {
    x: Vec<f64>,
    c: Vec<f64>,
}

/// Table of the normalized bump CDF on a fine grid; interpolated with a
/// local Taylor step (the density is known exactly).
fn cdf_table() -> &'static CdfTable {
    static T: OnceLock<CdfTable> = OnceLock::new();
    T.get_or_init(|| {
        let n = 4096;
        let z = bump_mass();
        let x: Vec<f64> = (0..=n).map(|i| -1.0 + 2.0 * i as f64 / n as f64).collect();
        let mut c = vec![0.0; n + 1];
        for i in 1..=n {
            c[i] = c[i - 1] + gl_panel(&|t| C64::new(bump(t), 0.0), x[i - 1], x[i]).re / z;
        }
        let last = c[n];
        for v in &mut c {
            *v /= last;
        }
        CdfTable { x, c }
    })
}

/// Normalized bump CDF B(u) = ∫_{−1}^{u} b / ∫ b, a C∞ step from 0 to 1.
pub fn bump_cdf(u: f64) -> f64 {
    if u <= -1.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let t = cdf_table();
    let n = t.x.len() - 1;
    let i = (((u + 1.0) * 0.5 * n as f64).floor() as usize).min(n - 1);
    let z = bump_mass();
    let lo = t.x[i];
    t.c[i] + gl_panel(&|s| C64::new(bump(s), 0.0), lo, u).re / z
}

/// Bc(u) = ∫ b(x) cos(ux) dx / ∫ b: Fourier transform of the unit-mass bump.
/// Trapezoid on a uniform grid; the integrand is flat to all orders at ±1.
pub fn bump_ft(u: f64) -> f64 {
    let nodes = bump_nodes();
    let h = 1.0 / (nodes.len() - 1) as f64;
    let rot = C64::from_polar(1.0, u * h);
    let mut z = C64::new(1.0, 0.0);
    let mut acc = 0.0;
    for (j, &b) in nodes.iter().enumerate() {
        let wgt = if j == 0 { 0.5 } else { 1.0 };
        acc += wgt * b * z.re;
        z *= rot;
        if j % 256 == 255 {
            z = C64::from_polar(1.0, u * h * (j + 1) as f64);
        }
    }
    2.0 * acc * h / bump_mass()
}

/// b(j/N) for j = 0..=N on [0, 1].
fn bump_nodes() -> &'static Vec<f64> {
    static N: OnceLock<Vec<f64>> = OnceLock::new();
    N.get_or_init(|| {
        let n = 4096;
        (0..=n).map(|j| bump(j as f64 / n as f64)).collect()
    })
}

/// Normalization a of φ = a·b so that ψ̂(0) = 2π∫φ² = 1.
pub fn bump_normalization() -> f64 {
    static A: OnceLock<f64> = OnceLock::new();
    *A.get_or_init(|| {
        let i = integrate(&|t| bump(t) * bump(t), -1.0, 1.0, 1e-17);
        (2.0 * PI * i).powf(-0.5)
    })
}

/// C∞ taper: 1 on |t| ≤ w/2, 0 on |t| ≥ w.
pub fn taper(t: f64, w: f64) -> f64 {
    let a = t.abs();
    if a <= 0.5 * w {
        1.0
    } else if a >= w {
        0.0
    } else {
        1.0 - bump_cdf(2.0 * (a - 0.5 * w) / (0.5 * w) - 1.0)
    }
}

/// Trapezoid sum of samples with spacing dt.
pub fn trapezoid(v: &[C64], dt: f64) -> C64 {
    if v.len() < 2 {
        return C64::new(0.0, 0.0);
    }
    let inner: C64 = v.iter().sum();
    (inner - 0.5 * (v[0] + v[v.len() - 1])) * dt
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert!((s - 2.0 / 13.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn cdf_is_a_step() {
        assert_eq!(bump_cdf(-1.0), 0.0);
        assert!((bump_cdf(0.0) - 0.5).abs() < 1e-13);
        assert!((bump_cdf(1.0 - 1e-12) - 1.0).abs() < 1e-13);
        let oracle = integrate(&bump, -1.0, 0.3, 1e-16) / bump_mass();
        assert!((bump_cdf(0.3) - oracle).abs() < 1e-13);
    }

    #[test]
    fn bump_ft_matches_adaptive_oracle() {
        for &u in &[0.0, 0.7, 3.0, 10.0, 40.0] {
            let o = integrate(&|x| bump(x) * (u * x).cos(), -1.0, 1.0, 1e-17) / bump_mass();
            assert!((bump_ft(u) - o).abs() < 1e-13, "u={u}: {} vs {o}", bump_ft(u));
        }
    }
}
