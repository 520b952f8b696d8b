//! Activation functions, their Hermite spectra, and HP synthesis.
//!
//! Spectra come from two routes that are kept apart: [`published_spectrum`]
//! holds the published closed forms verbatim, [`verified_spectrum`] projects
//! the activation numerically and reports where the two disagree. The
//! numerical route is authoritative.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermite::{self, default_quad_points, HermiteSpectrum};
use crate::scalar::Scalar;

/// Which nonlinearity an [`ActivationFn`] evaluates.
#[derive(Debug, Clone, PartialEq)]
pub enum ActivationKind<T> {
    Identity,
    Sigmoid,
    Tanh,
    Relu,
    Step,
    /// `exp(−(x−c)²/(2s²))`.
    Rbf { center: T, scale: T },
    Swish,
    /// Truncated Hermite series `Σ a_n H_n(x)`.
    Hp(HermiteSpectrum<T>),
}

impl<T> ActivationKind<T> {
    pub fn label(&self) -> &'static str {
        match self {
            ActivationKind::Identity => "identity",
            ActivationKind::Sigmoid => "sigmoid",
            ActivationKind::Tanh => "tanh",
            ActivationKind::Relu => "relu",
            ActivationKind::Step => "step",
            ActivationKind::Rbf { .. } => "rbf",
            ActivationKind::Swish => "swish",
            ActivationKind::Hp(_) => "hp",
        }
    }

    /// Kinds whose derivative is discontinuous somewhere.
    pub fn is_kinked(&self) -> bool {
        matches!(self, ActivationKind::Relu | ActivationKind::Step)
    }
}

/// An evaluatable nonlinearity with its derivative and a display name.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationFn<T> {
    kind: ActivationKind<T>,
    name: String,
}

#[inline]
fn logistic<T: Scalar>(x: T) -> T {
    // Split by sign so exp never overflows.
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

impl<T: Scalar> ActivationFn<T> {
    pub fn new(kind: ActivationKind<T>) -> Self {
        let name = match &kind {
            ActivationKind::Rbf { center, scale } => format!("rbf:c={center},s={scale}"),
            ActivationKind::Hp(s) => format!(
                "hp:[{}]",
                s.coefficients()
                    .iter()
                    .map(|c| format!("{c}"))
                    .collect::<Vec<_>>()
                    .join(",")
            ),
            k => k.label().to_string(),
        };
        Self { kind, name }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn identity() -> Self {
        Self::new(ActivationKind::Identity)
    }
    pub fn sigmoid() -> Self {
        Self::new(ActivationKind::Sigmoid)
    }
    pub fn tanh() -> Self {
        Self::new(ActivationKind::Tanh)
    }
    pub fn relu() -> Self {
        Self::new(ActivationKind::Relu)
    }
    pub fn step() -> Self {
        Self::new(ActivationKind::Step)
    }
    pub fn swish() -> Self {
        Self::new(ActivationKind::Swish)
    }
    pub fn rbf(center: T, scale: T) -> Self {
        Self::new(ActivationKind::Rbf { center, scale })
    }
    pub fn hp(spectrum: HermiteSpectrum<T>) -> Self {
        Self::new(ActivationKind::Hp(spectrum))
    }

    pub fn kind(&self) -> &ActivationKind<T> {
        &self.kind
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, x: T) -> T {
        match &self.kind {
            ActivationKind::Identity => x,
            ActivationKind::Sigmoid => logistic(x),
            ActivationKind::Tanh => x.tanh(),
            ActivationKind::Relu => x.max(T::zero()),
            ActivationKind::Step => {
                if x > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            ActivationKind::Rbf { center, scale } => {
                let d = x - *center;
                (-(d * d) / (T::of(2.0) * *scale * *scale)).exp()
            }
            ActivationKind::Swish => x * logistic(x),
            ActivationKind::Hp(s) => s.eval(x),
        }
    }

    /// Derivative; `ReLU'(0) = 0` and `Step' ≡ 0`.
    pub fn eval_deriv(&self, x: T) -> T {
        match &self.kind {
            ActivationKind::Identity => T::one(),
            ActivationKind::Sigmoid => {
                let s = logistic(x);
                s * (T::one() - s)
            }
            ActivationKind::Tanh => {
                let t = x.tanh();
                T::one() - t * t
            }
            ActivationKind::Relu => {
                if x > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            ActivationKind::Step => T::zero(),
            ActivationKind::Rbf { center, scale } => {
                let d = x - *center;
                let s2 = *scale * *scale;
                -d / s2 * (-(d * d) / (T::of(2.0) * s2)).exp()
            }
            ActivationKind::Swish => {
                let s = logistic(x);
                s + x * s * (T::one() - s)
            }
            ActivationKind::Hp(s) => s.eval_deriv(x),
        }
    }

    pub fn map(&self, xs: &[T]) -> Vec<T> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }

    /// Canonical string form accepted by [`FromStr`].
    pub fn spec_string(&self) -> String {
        match &self.kind {
            ActivationKind::Rbf { center, scale } => format!("rbf:c={center},s={scale}"),
            _ => self.name.clone(),
        }
    }
}

impl<T: Scalar> fmt::Display for ActivationFn<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Parses `sigmoid`, `tanh`, `relu`, `step`, `swish`, `identity`,
/// `rbf:c=1,s=1` and `hp:max=0.62,min=0.40,gap=0.13,n=3[,layout=odd]`.
impl<T: Scalar> FromStr for ActivationFn<T> {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let bad = |reason: &str| Error::ActivationSpec {
            spec: spec.to_string(),
            reason: reason.to_string(),
        };
        let (head, params) = match spec.split_once(':') {
            Some((h, p)) => (h.trim(), Some(p)),
            None => (spec.trim(), None),
        };
        let head = head.to_ascii_lowercase();
        let kv = |p: Option<&str>| -> Result<Vec<(String, String)>> {
            let Some(p) = p else { return Ok(Vec::new()) };
            p.split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|pair| {
                    pair.split_once('=')
                        .map(|(k, v)| (k.trim().to_ascii_lowercase(), v.trim().to_string()))
                        .ok_or_else(|| bad("expected key=value"))
                })
                .collect()
        };
        let num = |v: &str| -> Result<f64> {
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| bad("not a finite number"))
        };
        let simple = |a: Self| -> Result<Self> {
            if params.is_some() {
                Err(bad("takes no parameters"))
            } else {
                Ok(a)
            }
        };
        match head.as_str() {
            "identity" | "linear" => simple(Self::identity()),
            "sigmoid" => simple(Self::sigmoid()),
            "tanh" => simple(Self::tanh()),
            "relu" => simple(Self::relu()),
            "step" => simple(Self::step()),
            "swish" => simple(Self::swish()),
            "rbf" => {
                let (mut c, mut s) = (RBF_DEFAULT_CENTER, RBF_DEFAULT_SCALE);
                for (k, v) in kv(params)? {
                    match k.as_str() {
                        "c" => c = num(&v)?,
                        "s" => s = num(&v)?,
                        _ => return Err(bad("unknown rbf key (use c, s)")),
                    }
                }
                if s <= 0.0 {
                    return Err(bad("rbf scale must be positive"));
                }
                Ok(Self::rbf(T::of(c), T::of(s)))
            }
            "hp" if params.is_some_and(|p| p.trim_start().starts_with('[')) => {
                let list = params
                    .unwrap_or_default()
                    .trim()
                    .strip_prefix('[')
                    .and_then(|p| p.strip_suffix(']'))
                    .ok_or_else(|| bad("unterminated coefficient list"))?;
                let coeffs = list
                    .split(',')
                    .map(|v| num(v.trim()).map(T::of))
                    .collect::<Result<Vec<T>>>()?;
                Ok(Self::hp(HermiteSpectrum::new(coeffs)))
            }
            "hp" => {
                let mut profile = HpDesignProfile::default();
                for (k, v) in kv(params)? {
                    match k.as_str() {
                        "max" => profile.max_coeff = num(&v)?,
                        "min" => profile.min_coeff = num(&v)?,
                        "gap" | "spacing" => profile.spacing = num(&v)?,
                        "n" => {
                            profile.num_terms = v.parse().map_err(|_| bad("n must be a count"))?
                        }
                        "layout" => profile.layout = v.parse()?,
                        _ => return Err(bad("unknown hp key (use max, min, gap, n, layout)")),
                    }
                }
                synthesize_hp(&profile)
            }
            _ => Err(bad("unknown activation")),
        }
    }
}

/// Serialized as its spec string.
impl<T: Scalar> Serialize for ActivationFn<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.spec_string())
    }
}

impl<'de, T: Scalar> Deserialize<'de> for ActivationFn<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let spec = String::deserialize(d)?;
        spec.parse().map_err(serde::de::Error::custom)
    }
}

pub const RBF_DEFAULT_CENTER: f64 = 1.0;
pub const RBF_DEFAULT_SCALE: f64 = 1.0;

/// Where a coefficient value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    PublishedClosedForm,
    Quadrature,
}

/// Published coefficients; entries the source does not state are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct PublishedSpectrum<T> {
    pub coefficients: Vec<Option<T>>,
    pub provenance: Provenance,
}

impl<T: Scalar> PublishedSpectrum<T> {
    /// The full spectrum, when every entry is stated.
    pub fn to_spectrum(&self) -> Option<HermiteSpectrum<T>> {
        self.coefficients
            .iter()
            .copied()
            .collect::<Option<Vec<T>>>()
            .map(HermiteSpectrum::new)
    }
}

/// `k!!` with the usual extension `(−1)!! = 1`, `(−3)!! = −1`.
fn double_factorial(k: i64) -> f64 {
    match k {
        -1 | 0 => 1.0,
        -3 => -1.0,
        k if k < -3 => f64::NAN,
        k => (1..=k).rev().step_by(2).map(|v| v as f64).product(),
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|v| v as f64).product()
}

/// Published closed-form coefficients, transcribed as printed.
///
/// * RBF: `a_0 = √(2π) s c e^{−c²/(2s²+2)} / √(s²+1)` and
///   `a_n = √(2π) c e^{−c²/(2s²+2)} / (s (s²+1)^{n+1/2})` for `n ≥ 1`.
/// * Step: `a_0 = 1/√2`; odd `n`: `(n−2)!!/√(2π n!)`; even `n ≥ 2`: 0.
/// * ReLU: `a_1 = 1/√2`; even `n`: `(n−3)!!/√(π n!)`; odd `n ≥ 3`: 0.
/// * Sigmoid: `a_0 = 1/2`, `a_1 = 0.206621`, even `n ≥ 2`: 0.
/// * Swish: `a_0 = 0.292206`, `a_1 = 1/√2`, `a_2 = 0.350845`.
pub fn published_spectrum<T: Scalar>(
    kind: &ActivationKind<T>,
    max_order: usize,
) -> Result<PublishedSpectrum<T>> {
    let orders = 0..=max_order;
    let coefficients: Vec<Option<f64>> = match kind {
        ActivationKind::Rbf { center, scale } => {
            let (c, s) = (center.as_f64(), scale.as_f64());
            let s2p1 = s * s + 1.0;
            let common = (2.0 * std::f64::consts::PI).sqrt() * c * (-c * c / (2.0 * s * s + 2.0)).exp();
            orders
                .map(|n| {
                    Some(if n == 0 {
                        common * s / s2p1.sqrt()
                    } else {
                        common / (s * s2p1.powf(n as f64 + 0.5))
                    })
                })
                .collect()
        }
        ActivationKind::Step => orders
            .map(|n| {
                Some(if n == 0 {
                    std::f64::consts::FRAC_1_SQRT_2
                } else if n % 2 == 1 {
                    double_factorial(n as i64 - 2)
                        / (2.0 * std::f64::consts::PI * factorial(n)).sqrt()
                } else {
                    0.0
                })
            })
            .collect(),
        ActivationKind::Relu => orders
            .map(|n| {
                Some(if n == 1 {
                    std::f64::consts::FRAC_1_SQRT_2
                } else if n % 2 == 0 {
                    double_factorial(n as i64 - 3) / (std::f64::consts::PI * factorial(n)).sqrt()
                } else {
                    0.0
                })
            })
            .collect(),
        ActivationKind::Sigmoid => orders
            .map(|n| match n {
                0 => Some(0.5),
                1 => Some(0.206621),
                n if n % 2 == 0 => Some(0.0),
                _ => None,
            })
            .collect(),
        ActivationKind::Swish => orders
            .map(|n| match n {
                0 => Some(0.292206),
                1 => Some(std::f64::consts::FRAC_1_SQRT_2),
                2 => Some(0.350845),
                _ => None,
            })
            .collect(),
        other => {
            return Err(Error::NoClosedForm {
                kind: other.label().to_string(),
            })
        }
    };
    Ok(PublishedSpectrum {
        coefficients: coefficients.into_iter().map(|c| c.map(T::of)).collect(),
        provenance: Provenance::PublishedClosedForm,
    })
}

/// Quadrature spectrum plus, where a closed form exists, the per-order
/// absolute difference `|quadrature − closed form|`.
#[derive(Debug, Clone)]
pub struct VerifiedSpectrum<T> {
    pub spectrum: HermiteSpectrum<T>,
    pub quad_points: usize,
    pub published: Option<PublishedSpectrum<T>>,
    pub discrepancies: Vec<Option<T>>,
}

impl<T: Scalar> VerifiedSpectrum<T> {
    pub fn max_discrepancy(&self) -> Option<T> {
        self.discrepancies
            .iter()
            .flatten()
            .copied()
            .fold(None, |acc: Option<T>, d| Some(acc.map_or(d, |a| a.max(d))))
    }
}

/// Node count used for an activation: the default rule, doubled for kinks.
pub fn quad_points_for<T>(kind: &ActivationKind<T>, max_order: usize) -> usize {
    let base = default_quad_points(max_order);
    if kind.is_kinked() {
        2 * base
    } else {
        base
    }
}

pub fn verified_spectrum<T: Scalar>(act: &ActivationFn<T>, max_order: usize) -> VerifiedSpectrum<T> {
    let quad_points = quad_points_for(act.kind(), max_order);
    let spectrum = hermite::project(|x| act.eval(x), max_order, quad_points)
        .expect("quad_points_for always resolves the order");
    let published = published_spectrum(act.kind(), max_order).ok();
    let discrepancies = match &published {
        Some(p) => p
            .coefficients
            .iter()
            .zip(spectrum.coefficients())
            .map(|(c, &q)| c.map(|c| (q - c).abs()))
            .collect(),
        None => vec![None; max_order + 1],
    };
    VerifiedSpectrum {
        spectrum,
        quad_points,
        published,
        discrepancies,
    }
}

/// Which Hermite orders receive the designed coefficients.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoefficientLayout {
    /// Orders `0, 1, …, n−1`.
    #[default]
    Consecutive,
    /// Orders `1, 3, 5, …`.
    Odd,
    /// Orders `0, 2, 4, …`.
    Even,
}

impl CoefficientLayout {
    fn order_of(self, i: usize) -> usize {
        match self {
            CoefficientLayout::Consecutive => i,
            CoefficientLayout::Odd => 2 * i + 1,
            CoefficientLayout::Even => 2 * i,
        }
    }
}

impl FromStr for CoefficientLayout {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "consecutive" => Ok(Self::Consecutive),
            "odd" => Ok(Self::Odd),
            "even" | "alternating" => Ok(Self::Even),
            _ => Err(Error::Profile(format!("unknown layout `{s}`"))),
        }
    }
}

/// Arithmetic-descent design targets for an HP activation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HpDesignProfile {
    pub max_coeff: f64,
    pub min_coeff: f64,
    pub spacing: f64,
    pub num_terms: usize,
    #[serde(default)]
    pub layout: CoefficientLayout,
}

impl Default for HpDesignProfile {
    fn default() -> Self {
        Self {
            max_coeff: 0.62,
            min_coeff: 0.40,
            spacing: 0.13,
            num_terms: 3,
            layout: CoefficientLayout::Consecutive,
        }
    }
}

impl HpDesignProfile {
    pub fn validate(&self) -> Result<()> {
        let (hi, lo) = (self.max_coeff, self.min_coeff);
        if !(hi.is_finite() && lo.is_finite() && self.spacing.is_finite()) {
            return Err(Error::Profile("non-finite field".into()));
        }
        if !(0.0 < lo && lo <= hi && hi < 1.0) {
            return Err(Error::Profile(format!(
                "need 0 < min ≤ max < 1, got min={lo}, max={hi}"
            )));
        }
        if self.spacing <= 0.0 {
            return Err(Error::Profile(format!("spacing must be positive, got {}", self.spacing)));
        }
        if self.num_terms == 0 {
            return Err(Error::Profile("num_terms must be at least 1".into()));
        }
        Ok(())
    }

    /// `max − i·spacing` floored at `min`, for `i < num_terms`.
    pub fn coefficients(&self) -> Result<Vec<f64>> {
        self.validate()?;
        Ok((0..self.num_terms)
            .map(|i| (self.max_coeff - i as f64 * self.spacing).max(self.min_coeff))
            .collect())
    }

    pub fn spectrum<T: Scalar>(&self) -> Result<HermiteSpectrum<T>> {
        let values = self.coefficients()?;
        let order = self.layout.order_of(self.num_terms - 1);
        let mut coeffs = vec![T::zero(); order + 1];
        for (i, v) in values.into_iter().enumerate() {
            coeffs[self.layout.order_of(i)] = T::of(v);
        }
        Ok(HermiteSpectrum::new(coeffs))
    }

    pub fn spec_string(&self) -> String {
        let mut s = format!(
            "hp:max={},min={},gap={},n={}",
            self.max_coeff, self.min_coeff, self.spacing, self.num_terms
        );
        if self.layout != CoefficientLayout::Consecutive {
            s.push_str(match self.layout {
                CoefficientLayout::Odd => ",layout=odd",
                _ => ",layout=even",
            });
        }
        s
    }
}

/// HP activation whose spectrum is the profile's arithmetic descent.
pub fn synthesize_hp<T: Scalar>(profile: &HpDesignProfile) -> Result<ActivationFn<T>> {
    let spectrum = profile.spectrum()?;
    Ok(ActivationFn::hp(spectrum).with_name(profile.spec_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn trivial_values() {
        assert_eq!(ActivationFn::<f64>::sigmoid().eval(0.0), 0.5);
        assert_eq!(ActivationFn::<f64>::relu().eval(-3.0), 0.0);
        assert_eq!(ActivationFn::<f64>::swish().eval(0.0), 0.0);
        assert_eq!(ActivationFn::<f64>::sigmoid().eval_deriv(0.0), 0.25);
        assert_eq!(ActivationFn::<f64>::relu().eval_deriv(2.0), 1.0);
    }

    #[test]
    fn kink_conventions() {
        assert_eq!(ActivationFn::<f64>::relu().eval_deriv(0.0), 0.0);
        for x in [-1.0, 0.0, 1.0] {
            assert_eq!(ActivationFn::<f64>::step().eval_deriv(x), 0.0);
        }
    }

    #[test]
    fn sigmoid_is_stable_for_large_inputs() {
        let s = ActivationFn::<f64>::sigmoid();
        assert_eq!(s.eval(-800.0), 0.0);
        assert_eq!(s.eval(800.0), 1.0);
        assert!(s.eval_deriv(-800.0).is_finite());
        assert!(ActivationFn::<f64>::swish().eval(-800.0).is_finite());
    }

    #[test]
    fn hp_derivative_matches_finite_difference() {
        let act: ActivationFn<f64> = synthesize_hp(&HpDesignProfile::default()).unwrap();
        let h = 1e-6;
        for i in -10..=10 {
            let x = i as f64 * 0.45;
            let fd = (act.eval(x + h) - act.eval(x - h)) / (2.0 * h);
            assert!(close(act.eval_deriv(x), fd, 1e-6), "x={x}");
        }
    }

    #[test]
    fn published_sigmoid_and_swish() {
        let s = published_spectrum::<f64>(&ActivationKind::Sigmoid, 2).unwrap().to_spectrum().unwrap();
        assert_eq!(s.coefficients(), &[0.5, 0.206621, 0.0]);
        let w = published_spectrum::<f64>(&ActivationKind::Swish, 2).unwrap().to_spectrum().unwrap();
        assert_eq!(w.coefficients(), &[0.292206, std::f64::consts::FRAC_1_SQRT_2, 0.350845]);
        // Partial: order 3 is not stated for either.
        assert!(published_spectrum::<f64>(&ActivationKind::Swish, 3).unwrap().to_spectrum().is_none());
        assert!(published_spectrum::<f64>(&ActivationKind::Sigmoid, 3).unwrap().coefficients[3].is_none());
    }

    #[test]
    fn published_rbf_a0() {
        let (c, s) = (1.3f64, 0.7f64);
        let p = published_spectrum::<f64>(&ActivationKind::Rbf { center: c, scale: s }, 0).unwrap();
        let expected = (2.0 * std::f64::consts::PI).sqrt() * s * c * (-c * c / (2.0 * s * s + 2.0)).exp()
            / (s * s + 1.0).sqrt();
        assert!(close(p.coefficients[0].unwrap(), expected, 1e-15));
    }

    #[test]
    fn no_closed_form_kinds() {
        assert!(published_spectrum::<f64>(&ActivationKind::Tanh, 3).is_err());
        let hp = ActivationKind::Hp(HermiteSpectrum::new(vec![0.5]));
        assert!(published_spectrum::<f64>(&hp, 3).is_err());
    }

    #[test]
    fn double_factorials() {
        assert_eq!(double_factorial(-1), 1.0);
        assert_eq!(double_factorial(-3), -1.0);
        assert_eq!(double_factorial(5), 15.0);
        assert_eq!(double_factorial(6), 48.0);
    }

    #[test]
    fn synthesize_examples() {
        let p = HpDesignProfile {
            max_coeff: 0.62,
            min_coeff: 0.40,
            spacing: 0.13,
            num_terms: 3,
            layout: CoefficientLayout::Consecutive,
        };
        let c = p.coefficients().unwrap();
        assert!(close(c[0], 0.62, 1e-12) && close(c[1], 0.49, 1e-12) && close(c[2], 0.40, 1e-12));

        let single = HpDesignProfile {
            max_coeff: 0.5,
            min_coeff: 0.5,
            spacing: 0.1,
            num_terms: 1,
            ..Default::default()
        };
        assert_eq!(single.coefficients().unwrap(), vec![0.5]);
    }

    #[test]
    fn default_profile_in_published_bands() {
        let p = HpDesignProfile::default();
        assert!((0.6..=0.65).contains(&p.max_coeff));
        assert!(close(p.min_coeff, 0.4, 1e-12));
        assert!((0.12..=0.14).contains(&p.spacing));
        assert_eq!(p.num_terms, 3);
    }

    #[test]
    fn invalid_profiles() {
        let base = HpDesignProfile::default();
        for bad in [
            HpDesignProfile { min_coeff: 0.0, ..base },
            HpDesignProfile { max_coeff: 1.0, ..base },
            HpDesignProfile { min_coeff: 0.7, ..base },
            HpDesignProfile { spacing: 0.0, ..base },
            HpDesignProfile { num_terms: 0, ..base },
        ] {
            assert!(synthesize_hp::<f64>(&bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn odd_layout_places_coefficients() {
        let p = HpDesignProfile {
            layout: CoefficientLayout::Odd,
            ..Default::default()
        };
        let s: HermiteSpectrum<f64> = p.spectrum().unwrap();
        assert_eq!(s.order(), 5);
        assert_eq!(s.get(0), 0.0);
        assert!(close(s.get(3), 0.49, 1e-12));
    }

    #[test]
    fn parse_round_trip() {
        for spec in ["sigmoid", "tanh", "relu", "swish", "step", "identity"] {
            let a: ActivationFn<f64> = spec.parse().unwrap();
            assert_eq!(a.spec_string(), spec);
        }
        let r: ActivationFn<f64> = "rbf:c=1,s=1".parse().unwrap();
        assert_eq!(r.kind(), &ActivationKind::Rbf { center: 1.0, scale: 1.0 });
        let h: ActivationFn<f64> = "hp:max=0.62,min=0.40,gap=0.13,n=3".parse().unwrap();
        let ActivationKind::Hp(s) = h.kind() else { panic!() };
        assert_eq!(s.order(), 2);
        let again: ActivationFn<f64> = h.spec_string().parse().unwrap();
        assert_eq!(again, h);
        let explicit = ActivationFn::<f64>::hp(HermiteSpectrum::new(vec![0.1, -0.25, 0.3]));
        let back: ActivationFn<f64> = explicit.spec_string().parse().unwrap();
        assert_eq!(back, explicit);
        assert!("hp:[0.1,0.2".parse::<ActivationFn<f64>>().is_err());
        assert!("softplus".parse::<ActivationFn<f64>>().is_err());
        assert!("rbf:c=1,s=0".parse::<ActivationFn<f64>>().is_err());
        assert!("sigmoid:x=1".parse::<ActivationFn<f64>>().is_err());
        assert!("hp:max=1.2".parse::<ActivationFn<f64>>().is_err());
    }
}
