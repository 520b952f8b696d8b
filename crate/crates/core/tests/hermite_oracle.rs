mod common;

use common::{gaussian_expectation, hermite_explicit};
use edgechaos::activations::{published_spectrum, synthesize_hp, ActivationFn, HpDesignProfile};
use edgechaos::hermite::{eval_hermite, eval_hermite_deriv, project, project_default, GaussHermite, HermiteSpectrum};
use proptest::prelude::*;

#[test]
fn recurrence_matches_explicit_sum() {
    for n in 0..=20 {
        for k in -40..=40 {
            let x = k as f64 * 0.1;
            let (a, b) = (eval_hermite(n, x), hermite_explicit(n, x));
            assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0), "n={n} x={x}: {a} vs {b}");
        }
    }
}

#[test]
fn orthonormal_under_independent_integration() {
    for m in 0..=20 {
        for n in m..=20 {
            let ip = gaussian_expectation(|x| eval_hermite::<f64>(m, x) * eval_hermite::<f64>(n, x));
            let want = if m == n { 1.0 } else { 0.0 };
            assert!((ip - want).abs() <= 1e-8, "<H{m},H{n}> = {ip}");
        }
    }
}

#[test]
fn quadrature_inner_products() {
    let rule = GaussHermite::<f64>::new(40).unwrap();
    for m in 0..=20 {
        for n in 0..=20 {
            let want = if m == n { 1.0 } else { 0.0 };
            assert!((rule.inner(m, n) - want).abs() <= 1e-10);
        }
    }
}

#[test]
fn derivative_identity() {
    // H_n' = √n H_{n−1}
    for n in 1..=15 {
        for k in -20..=20 {
            let x = k as f64 * 0.2;
            let want = (n as f64).sqrt() * eval_hermite::<f64>(n - 1, x);
            assert!((eval_hermite_deriv::<f64>(n, x) - want).abs() <= 1e-9 * want.abs().max(1.0));
        }
    }
}

#[test]
fn smooth_projections_match_direct_integration() {
    for act in [ActivationFn::<f64>::sigmoid(), ActivationFn::tanh(), ActivationFn::swish()] {
        let spec = project_default(|x| act.eval(x), 10);
        for n in 0..=10 {
            let want = gaussian_expectation(|x| act.eval(x) * hermite_explicit(n, x));
            assert!((spec.get(n) - want).abs() <= 1e-8, "{act} a{n}: {} vs {want}", spec.get(n));
        }
    }
}

#[test]
fn default_hp_coefficients_recovered() {
    let act = synthesize_hp::<f64>(&HpDesignProfile::default()).unwrap();
    let spec = project(|x| act.eval(x), 6, 20).unwrap();
    let want = [0.62, 0.49, 0.40, 0.0, 0.0, 0.0, 0.0];
    for (n, w) in want.iter().enumerate() {
        assert!((spec.get(n) - w).abs() <= 1e-12);
    }
}

#[test]
fn sigmoid_symmetry() {
    let spec = project_default(|x| ActivationFn::<f64>::sigmoid().eval(x), 12);
    assert!((spec.get(0) - 0.5).abs() <= 1e-14);
    for n in (2..=12).step_by(2) {
        assert!(spec.get(n).abs() <= 1e-14, "a{n} = {}", spec.get(n));
    }
}

fn rbf_published(c: f64, s: f64, order: usize) -> Vec<f64> {
    published_spectrum(ActivationFn::<f64>::rbf(c, s).kind(), order)
        .unwrap()
        .coefficients
        .into_iter()
        .map(Option::unwrap)
        .collect()
}

#[test]
fn rbf_closed_form_matches_quadrature() {
    let rbf = ActivationFn::<f64>::rbf(1.0, 1.0);
    let quad = project(|x| rbf.eval(x), 8, 80).unwrap();
    for (n, c) in rbf_published(1.0, 1.0, 8).iter().enumerate() {
        assert!((c - quad.get(n)).abs() <= 1e-6, "a{n}: closed form {c} vs quadrature {}", quad.get(n));
    }
}

#[test]
fn rbf_closed_form_ratio_law() {
    for (c, s) in [(1.0, 1.0), (0.5, 2.0), (2.0, 0.7)] {
        let a = rbf_published(c, s, 8);
        for n in 2..=8 {
            assert!((a[n] / a[n - 1] - 1.0 / (s * s + 1.0)).abs() <= 1e-10, "c={c} s={s} n={n}");
        }
    }
}

/// Completing the square and the generating function give
/// `a_n = s/√p · e^{−c²/(2p)} · p^{−n/2} He_n(c/√p) / √n!` with `p = s² + 1`.
#[test]
fn rbf_quadrature_matches_gaussian_integral() {
    for (c, s) in [(1.0f64, 1.0f64), (0.5, 2.0), (-1.5, 0.8)] {
        let rbf = ActivationFn::<f64>::rbf(c, s);
        let quad = project(|x| rbf.eval(x), 8, 80).unwrap();
        let p = s * s + 1.0;
        for n in 0..=8 {
            let want = s / p.sqrt() * (-c * c / (2.0 * p)).exp() * hermite_explicit(n, c / p.sqrt()) / p.powf(n as f64 / 2.0);
            assert!((quad.get(n) - want).abs() <= 1e-10, "c={c} s={s} a{n}: {} vs {want}", quad.get(n));
        }
    }
}

proptest! {
    #[test]
    fn polynomial_spectra_round_trip(coeffs in prop::collection::vec(-1.0f64..1.0, 1..7)) {
        let spec = HermiteSpectrum::new(coeffs.clone());
        let back = project(|x| spec.eval(x), coeffs.len() + 2, 24).unwrap();
        for (n, c) in coeffs.iter().enumerate() {
            prop_assert!((back.get(n) - c).abs() <= 1e-11);
        }
        for n in coeffs.len()..=coeffs.len() + 2 {
            prop_assert!(back.get(n).abs() <= 1e-11);
        }
    }

    #[test]
    fn projection_is_linear(a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let s = ActivationFn::<f64>::sigmoid();
        let t = ActivationFn::<f64>::tanh();
        let mix = project_default(|x| a * s.eval(x) + b * t.eval(x), 8);
        let ps = project_default(|x| s.eval(x), 8);
        let pt = project_default(|x| t.eval(x), 8);
        for n in 0..=8 {
            prop_assert!((mix.get(n) - a * ps.get(n) - b * pt.get(n)).abs() <= 1e-12);
        }
    }

    #[test]
    fn energy_matches_second_moment(coeffs in prop::collection::vec(-1.0f64..1.0, 1..6)) {
        let spec = HermiteSpectrum::new(coeffs.clone());
        let moment = gaussian_expectation(|x| spec.eval(x).powi(2));
        prop_assert!((spec.energy() - moment).abs() <= 1e-8 * moment.max(1.0));
    }
}
