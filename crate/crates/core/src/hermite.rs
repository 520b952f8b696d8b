//! Orthonormal probabilists' Hermite basis.
//!
//! `H_n` is normalised so that `E[H_m(x) H_n(x)] = δ_mn` for `x ~ N(0, 1)`.
//! Evaluation always goes through the three-term recurrence
//! `H_{n+1}(x) = x/√(n+1) H_n(x) − √(n/(n+1)) H_{n−1}(x)`.
//!
//! Coefficients of a function `f` are the Gaussian inner products
//! `a_n = E[f(x) H_n(x)]`, computed with a Gauss–Hermite rule whose weights
//! are normalised to the standard normal measure.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Truncation order used when callers do not pick one.
pub const DEFAULT_ORDER: usize = 10;

/// Serialized basis tag.
pub const BASIS_TAG: &str = "probabilists-orthonormal";

/// `H_n(x)`.
pub fn eval_hermite<T: Scalar>(n: usize, x: T) -> T {
    let mut prev = T::zero();
    let mut cur = T::one();
    for k in 0..n {
        let next = step(k, x, cur, prev);
        prev = cur;
        cur = next;
    }
    cur
}

#[inline]
fn step<T: Scalar>(k: usize, x: T, cur: T, prev: T) -> T {
    let kp1 = T::of_usize(k + 1);
    x / kp1.sqrt() * cur - (T::of_usize(k) / kp1).sqrt() * prev
}

/// `[H_0(x), …, H_n(x)]` in one pass.
pub fn eval_hermite_all<T: Scalar>(max_order: usize, x: T) -> Vec<T> {
    let mut out = Vec::with_capacity(max_order + 1);
    out.push(T::one());
    let mut prev = T::zero();
    let mut cur = T::one();
    for k in 0..max_order {
        let next = step(k, x, cur, prev);
        out.push(next);
        prev = cur;
        cur = next;
    }
    out
}

/// `H_n'(x) = √n H_{n−1}(x)`.
pub fn eval_hermite_deriv<T: Scalar>(n: usize, x: T) -> T {
    if n == 0 {
        return T::zero();
    }
    T::of_usize(n).sqrt() * eval_hermite(n - 1, x)
}

/// `H_n(0)` from its closed form: zero for odd `n`, otherwise
/// `(−1)^{n/2} (n−1)!! / √(n!)`.
///
/// The ratio `(n−1)!!/√(n!)` is accumulated as `∏_{k=1}^{n/2} √((2k−1)/(2k))`
/// so it stays finite far past the point where `n!` overflows.
pub fn hermite_at_zero<T: Scalar>(n: usize) -> T {
    if n % 2 == 1 {
        return T::zero();
    }
    let mut magnitude = 1.0f64;
    for k in 1..=n / 2 {
        magnitude *= ((2 * k - 1) as f64 / (2 * k) as f64).sqrt();
    }
    let sign = if (n / 2) % 2 == 0 { 1.0 } else { -1.0 };
    T::of(sign * magnitude)
}

/// Basis truncated at `max_order`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HermiteBasis {
    pub max_order: usize,
}

impl HermiteBasis {
    pub fn new(max_order: usize) -> Self {
        Self { max_order }
    }

    pub fn eval<T: Scalar>(&self, x: T) -> Vec<T> {
        eval_hermite_all(self.max_order, x)
    }

    /// `[H_0'(x), …, H_N'(x)]`.
    pub fn eval_deriv<T: Scalar>(&self, x: T) -> Vec<T> {
        let values = eval_hermite_all(self.max_order, x);
        let mut out = Vec::with_capacity(values.len());
        out.push(T::zero());
        for n in 1..=self.max_order {
            out.push(T::of_usize(n).sqrt() * values[n - 1]);
        }
        out
    }

    /// Default node count: `max(64, 4(N+1))`.
    pub fn default_quad_points(&self) -> usize {
        default_quad_points(self.max_order)
    }
}

pub fn default_quad_points(max_order: usize) -> usize {
    64.max(4 * (max_order + 1))
}

/// Gauss–Hermite rule for `E_{x~N(0,1)}[g(x)]`; weights sum to one.
#[derive(Debug, Clone)]
pub struct GaussHermite<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> GaussHermite<T> {
    /// Golub–Welsch on the Jacobi matrix of the orthonormal recurrence,
    /// followed by Newton polishing of each node. Exact for polynomials of
    /// degree `≤ 2·points − 1`.
    pub fn new(points: usize) -> Result<Self> {
        if points == 0 {
            return Err(Error::param("quad_points", "must be at least 1"));
        }
        let jacobi = DMatrix::<f64>::from_fn(points, points, |i, j| {
            if i + 1 == j {
                (j as f64).sqrt()
            } else if j + 1 == i {
                (i as f64).sqrt()
            } else {
                0.0
            }
        });
        let mut nodes: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
        nodes.sort_by(|a, b| a.total_cmp(b));

        let mut weights = Vec::with_capacity(points);
        for x in nodes.iter_mut() {
            for _ in 0..3 {
                let h = eval_hermite_all(points, *x);
                let deriv = (points as f64).sqrt() * h[points - 1];
                if deriv == 0.0 || !deriv.is_finite() {
                    break;
                }
                let dx = h[points] / deriv;
                *x -= dx;
                if dx.abs() <= 1e-15 * x.abs().max(1.0) {
                    break;
                }
            }
            // Christoffel weight 1 / Σ_{k<n} H_k(x)².
            let h = eval_hermite_all(points - 1, *x);
            let denom: f64 = h.iter().map(|v| v * v).sum();
            weights.push(1.0 / denom);
        }
        // Symmetrise: the rule is exactly symmetric about the origin.
        for i in 0..points / 2 {
            let j = points - 1 - i;
            let x = 0.5 * (nodes[j] - nodes[i]);
            let w = 0.5 * (weights[i] + weights[j]);
            nodes[i] = -x;
            nodes[j] = x;
            weights[i] = w;
            weights[j] = w;
        }
        if points % 2 == 1 {
            nodes[points / 2] = 0.0;
        }
        let total: f64 = weights.iter().sum();
        Ok(Self {
            nodes: nodes.into_iter().map(T::of).collect(),
            weights: weights.into_iter().map(|w| T::of(w / total)).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// `E[g(x)]` under the standard normal.
    pub fn expect<F: Fn(T) -> T>(&self, g: F) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (&x, &w)| acc + w * g(x))
    }

    /// Gaussian inner product of `H_m` and `H_n`.
    pub fn inner(&self, m: usize, n: usize) -> T {
        self.expect(|x| eval_hermite(m, x) * eval_hermite(n, x))
    }
}

/// Coefficients `a_0..a_N` in the orthonormal basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    into = "SpectrumWire",
    try_from = "SpectrumWire",
    bound = "T: Scalar"
)]
pub struct HermiteSpectrum<T> {
    coefficients: Vec<T>,
}

#[derive(Serialize, Deserialize)]
struct SpectrumWire {
    basis: String,
    order: usize,
    coefficients: Vec<f64>,
}

impl<T: Scalar> From<HermiteSpectrum<T>> for SpectrumWire {
    fn from(s: HermiteSpectrum<T>) -> Self {
        SpectrumWire {
            basis: BASIS_TAG.to_string(),
            order: s.order(),
            coefficients: s.coefficients.iter().map(|c| c.as_f64()).collect(),
        }
    }
}

impl<T: Scalar> TryFrom<SpectrumWire> for HermiteSpectrum<T> {
    type Error = String;

    fn try_from(w: SpectrumWire) -> std::result::Result<Self, String> {
        if w.basis != BASIS_TAG {
            return Err(format!("unsupported basis `{}`", w.basis));
        }
        if w.coefficients.len() != w.order + 1 {
            return Err(format!(
                "order {} needs {} coefficients, found {}",
                w.order,
                w.order + 1,
                w.coefficients.len()
            ));
        }
        if w.coefficients.iter().any(|c| !c.is_finite()) {
            return Err("non-finite coefficient".into());
        }
        Ok(HermiteSpectrum::new(w.coefficients.into_iter().map(T::of).collect()))
    }
}

impl<T: Scalar> HermiteSpectrum<T> {
    /// Panics on an empty coefficient list; a spectrum always has `a_0`.
    pub fn new(coefficients: Vec<T>) -> Self {
        assert!(!coefficients.is_empty(), "spectrum needs at least a_0");
        Self { coefficients }
    }

    pub fn zeros(order: usize) -> Self {
        Self::new(vec![T::zero(); order + 1])
    }

    /// Spectrum with a single unit coefficient at `order`.
    pub fn unit(order: usize) -> Self {
        let mut s = Self::zeros(order);
        s.coefficients[order] = T::one();
        s
    }

    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficients(&self) -> &[T] {
        &self.coefficients
    }

    pub fn get(&self, n: usize) -> T {
        self.coefficients.get(n).copied().unwrap_or_else(T::zero)
    }

    pub fn basis(&self) -> HermiteBasis {
        HermiteBasis::new(self.order())
    }

    /// Σ a_n H_n(x).
    pub fn eval(&self, x: T) -> T {
        reconstruct(self, x)
    }

    /// Σ a_n √n H_{n−1}(x).
    pub fn eval_deriv(&self, x: T) -> T {
        let h = eval_hermite_all(self.order(), x);
        self.coefficients
            .iter()
            .enumerate()
            .skip(1)
            .fold(T::zero(), |acc, (n, &a)| acc + a * T::of_usize(n).sqrt() * h[n - 1])
    }

    /// Σ a_n², the Gaussian-measure energy captured by the truncation.
    pub fn energy(&self) -> T {
        self.coefficients.iter().fold(T::zero(), |acc, &a| acc + a * a)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spectrum serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Truncated series value `Σ a_n H_n(x)`.
pub fn reconstruct<T: Scalar>(spec: &HermiteSpectrum<T>, x: T) -> T {
    let mut prev = T::zero();
    let mut cur = T::one();
    let mut acc = spec.coefficients[0];
    for (k, &a) in spec.coefficients.iter().enumerate().skip(1) {
        let next = step(k - 1, x, cur, prev);
        prev = cur;
        cur = next;
        acc = acc + a * cur;
    }
    acc
}

/// Projects `f` onto `H_0..H_N` with a `quad_points`-node Gauss–Hermite rule.
pub fn project<T: Scalar, F: Fn(T) -> T>(
    f: F,
    max_order: usize,
    quad_points: usize,
) -> Result<HermiteSpectrum<T>> {
    if quad_points < max_order + 1 {
        return Err(Error::UnderResolved {
            points: quad_points,
            max_order,
        });
    }
    let rule = GaussHermite::new(quad_points)?;
    Ok(project_with(f, max_order, &rule))
}

/// Projection against a prebuilt rule. The caller guarantees resolution.
pub fn project_with<T: Scalar, F: Fn(T) -> T>(
    f: F,
    max_order: usize,
    rule: &GaussHermite<T>,
) -> HermiteSpectrum<T> {
    let mut coefficients = vec![T::zero(); max_order + 1];
    for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
        let fx = w * f(x);
        for (a, h) in coefficients.iter_mut().zip(eval_hermite_all(max_order, x)) {
            *a = *a + fx * h;
        }
    }
    HermiteSpectrum::new(coefficients)
}

/// Projection with the default node count.
pub fn project_default<T: Scalar, F: Fn(T) -> T>(f: F, max_order: usize) -> HermiteSpectrum<T> {
    project(f, max_order, default_quad_points(max_order)).expect("default rule resolves")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_orders() {
        assert_eq!(eval_hermite(0, 3.7), 1.0);
        assert_eq!(eval_hermite(1, 2.0), 2.0);
        let h2 = eval_hermite(2, 0.0f64);
        assert!((h2 + 1.0 / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn deriv_special_cases() {
        assert_eq!(eval_hermite_deriv(0, 5.0), 0.0);
        assert_eq!(eval_hermite_deriv(1, 5.0), 1.0);
    }

    #[test]
    fn deriv_matches_central_difference() {
        let h = 1e-5;
        let x = 0.7f64;
        let fd = (eval_hermite(3, x + h) - eval_hermite(3, x - h)) / (2.0 * h);
        assert!((eval_hermite_deriv(3, x) - fd).abs() < 1e-6);
    }

    #[test]
    fn value_at_zero() {
        assert_eq!(hermite_at_zero::<f64>(1), 0.0);
        assert_eq!(hermite_at_zero::<f64>(0), 1.0);
        for n in 0..=30 {
            let closed: f64 = hermite_at_zero(n);
            assert!((closed - eval_hermite(n, 0.0)).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn rule_is_symmetric_and_normalised() {
        let rule = GaussHermite::<f64>::new(64).unwrap();
        let total: f64 = rule.weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-14);
        for i in 0..32 {
            assert_eq!(rule.nodes()[i], -rule.nodes()[63 - i]);
        }
        // E[x^4] = 3
        assert!((rule.expect(|x| x.powi(4)) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn identity_projects_to_h1() {
        let s = project(|x: f64| x, 3, 64).unwrap();
        for (n, &a) in s.coefficients().iter().enumerate() {
            let expected = if n == 1 { 1.0 } else { 0.0 };
            assert!((a - expected).abs() < 1e-13, "a_{n} = {a}");
        }
    }

    #[test]
    fn under_resolved_rule_rejected() {
        assert!(matches!(
            project(|x: f64| x, 10, 10),
            Err(Error::UnderResolved { points: 10, max_order: 10 })
        ));
        assert!(project(|x: f64| x, 10, 11).is_ok());
    }

    #[test]
    fn reconstruct_trivial() {
        let mut c = vec![0.0f64; 3];
        c[1] = 1.0;
        let s = HermiteSpectrum::new(c);
        assert!((reconstruct(&s, 4.2) - 4.2).abs() < 1e-15);
        assert_eq!(reconstruct(&HermiteSpectrum::<f64>::zeros(5), 1.3), 0.0);
    }

    #[test]
    fn json_contract() {
        let s = HermiteSpectrum::new(vec![0.5, 0.25, 0.0]);
        let v: serde_json::Value = serde_json::from_str(&s.to_json()).unwrap();
        assert_eq!(v["basis"], "probabilists-orthonormal");
        assert_eq!(v["order"], 2);
        assert_eq!(v["coefficients"][1], 0.25);
        let back = HermiteSpectrum::<f64>::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
        let bad = r#"{"basis":"physicists","order":0,"coefficients":[1.0]}"#;
        assert!(HermiteSpectrum::<f64>::from_json(bad).is_err());
        let short = r#"{"basis":"probabilists-orthonormal","order":2,"coefficients":[1.0]}"#;
        assert!(HermiteSpectrum::<f64>::from_json(short).is_err());
    }

    #[test]
    fn f32_instantiation() {
        let s = project(|x: f32| x * x, 2, 64).unwrap();
        // x² = 1 + √2 H_2
        assert!((s.get(0) - 1.0f32).abs() < 1e-5);
        assert!((s.get(2) - 2f32.sqrt()).abs() < 1e-5);
    }
}
