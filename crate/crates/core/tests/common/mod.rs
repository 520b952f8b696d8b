//! Reference computations that share no code with the library.

#![allow(dead_code)]

use nalgebra::DMatrix;

fn simpson_step<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
}

/// Adaptive Simpson quadrature of `f` on `[a, b]`.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    // Split first so narrow features near the centre are not skipped.
    let pieces = 48;
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|k| {
            let (lo, hi) = (a + k as f64 * h, a + (k + 1) as f64 * h);
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
            simpson_step(&f, lo, hi, fa, fm, fb, whole, tol / pieces as f64, 40)
        })
        .sum()
}

/// `E[f(x)]` for `x ~ N(0, 1)`, integrated on `[−12, 12]`.
pub fn gaussian_expectation<F: Fn(f64) -> f64>(f: F) -> f64 {
    let norm = (2.0 * std::f64::consts::PI).sqrt();
    simpson(|x| f(x) * (-0.5 * x * x).exp() / norm, -12.0, 12.0, 1e-10)
}

/// Normalised probabilists' Hermite polynomial from its explicit sum
/// `He_n(x) = n! Σ_m (−1)^m x^{n−2m} / (m! (n−2m)! 2^m)`, divided by `√n!`.
pub fn hermite_explicit(n: usize, x: f64) -> f64 {
    let fact = |k: usize| (1..=k).map(|v| v as f64).product::<f64>();
    let sum: f64 = (0..=n / 2)
        .map(|m| {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            sign * x.powi((n - 2 * m) as i32) / (fact(m) * fact(n - 2 * m) * 2f64.powi(m as i32))
        })
        .sum();
    fact(n) * sum / fact(n).sqrt()
}

/// `log ρ(W)` by Gelfand's formula on `W^(2^k)` with renormalised squaring.
pub fn log_spectral_radius(w: &DMatrix<f64>) -> f64 {
    let mut b = w.clone();
    let mut log_norm = 0.0f64;
    let mut power = 1.0f64;
    for _ in 0..60 {
        let n = b.norm();
        if n == 0.0 {
            return f64::NEG_INFINITY;
        }
        b /= n;
        log_norm += n.ln();
        b = &b * &b;
        log_norm *= 2.0;
        power *= 2.0;
    }
    (log_norm + b.norm().ln()) / power
}

/// Ridge solution via QR of the stacked system `[X; √λ I] W = [Y; 0]`.
pub fn ridge_qr(x: &DMatrix<f64>, y: &DMatrix<f64>, lambda: f64) -> DMatrix<f64> {
    let (n, p) = x.shape();
    let mut a = DMatrix::zeros(n + p, p);
    a.rows_mut(0, n).copy_from(x);
    for i in 0..p {
        a[(n + i, i)] = lambda.sqrt();
    }
    let mut b = DMatrix::zeros(n + p, y.ncols());
    b.rows_mut(0, n).copy_from(y);
    let qr = a.qr();
    let qtb = qr.q().transpose() * b;
    qr.r().solve_upper_triangular(&qtb).expect("full-rank stacked system")
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Series of one-element rows.
pub fn column(values: &[f64]) -> Vec<Vec<f64>> {
    values.iter().map(|&v| vec![v]).collect()
}
