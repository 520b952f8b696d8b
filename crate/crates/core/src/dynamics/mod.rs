//! Forward dynamics of layered networks `x_l = σ(W_l x_{l−1} + b_l)`,
//! layer Jacobians, the Lyapunov criticality measure and recurrence plots.

mod recurrence;

pub use recurrence::{epsilon_from_fraction, recurrence_plot, RecurrencePlot, DEFAULT_EPSILON_FRACTION};

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::activations::ActivationFn;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Half-width of the band around `λ = 0` classified as the edge of chaos.
pub const DEFAULT_EDGE_TOLERANCE: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq)]
pub struct Layer<T: Scalar> {
    pub weights: DMatrix<T>,
    pub bias: DVector<T>,
}

/// Fully connected network sharing one activation across layers.
#[derive(Debug, Clone)]
pub struct LayeredNet<T: Scalar> {
    layers: Vec<Layer<T>>,
    activation: ActivationFn<T>,
}

impl<T: Scalar> LayeredNet<T> {
    pub fn new(layers: Vec<Layer<T>>, activation: ActivationFn<T>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Empty("network has no layers"));
        }
        for (l, layer) in layers.iter().enumerate() {
            if layer.bias.len() != layer.weights.nrows() {
                return Err(Error::Dimension {
                    expected: layer.weights.nrows(),
                    actual: layer.bias.len(),
                    context: "bias length",
                });
            }
            if l > 0 && layer.weights.ncols() != layers[l - 1].weights.nrows() {
                return Err(Error::Dimension {
                    expected: layers[l - 1].weights.nrows(),
                    actual: layer.weights.ncols(),
                    context: "layer input width",
                });
            }
            if layer.weights.iter().chain(layer.bias.iter()).any(|v| !v.is_finite()) {
                return Err(Error::param("weights", format!("non-finite entry in layer {l}")));
            }
        }
        Ok(Self { layers, activation })
    }

    /// `depth` copies of one square layer.
    pub fn repeated(weights: DMatrix<T>, bias: DVector<T>, depth: usize, activation: ActivationFn<T>) -> Result<Self> {
        let layer = Layer { weights, bias };
        Self::new(vec![layer; depth], activation)
    }

    /// Gaussian weights with variance `gain² / fan_in`, zero biases.
    pub fn random(widths: &[usize], gain: f64, activation: ActivationFn<T>, seed: u64) -> Result<Self> {
        if widths.len() < 2 || widths.contains(&0) {
            return Err(Error::param("widths", "need at least two positive widths"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = widths
            .windows(2)
            .map(|w| {
                let std = gain / (w[0] as f64).sqrt();
                let weights = DMatrix::from_fn(w[1], w[0], |_, _| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    T::of(std * z)
                });
                Layer {
                    weights,
                    bias: DVector::zeros(w[1]),
                }
            })
            .collect();
        Self::new(layers, activation)
    }

    pub fn layers(&self) -> &[Layer<T>] {
        &self.layers
    }

    pub fn activation(&self) -> &ActivationFn<T> {
        &self.activation
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].weights.ncols()
    }

    /// `[N_0, N_1, …, N_L]`.
    pub fn widths(&self) -> Vec<usize> {
        std::iter::once(self.input_dim())
            .chain(self.layers.iter().map(|l| l.weights.nrows()))
            .collect()
    }

    fn check_input(&self, x: &DVector<T>, layer: usize) -> Result<()> {
        let expected = self.layers[layer].weights.ncols();
        if x.len() != expected {
            return Err(Error::Dimension {
                expected,
                actual: x.len(),
                context: "layer input",
            });
        }
        Ok(())
    }

    fn preactivation(&self, x: &DVector<T>, layer: usize) -> DVector<T> {
        let l = &self.layers[layer];
        &l.weights * x + &l.bias
    }

    /// `σ(W_l x + b_l)` for a single layer.
    pub fn layer_forward(&self, x: &DVector<T>, layer: usize) -> Result<DVector<T>> {
        self.check_layer(layer)?;
        self.check_input(x, layer)?;
        Ok(self.preactivation(x, layer).map(|z| self.activation.eval(z)))
    }

    /// All states `x_0, …, x_L`.
    pub fn forward(&self, x0: &DVector<T>) -> Result<Vec<DVector<T>>> {
        self.check_input(x0, 0)?;
        let mut states = Vec::with_capacity(self.depth() + 1);
        states.push(x0.clone());
        for l in 0..self.depth() {
            let next = self.preactivation(&states[l], l).map(|z| self.activation.eval(z));
            states.push(next);
        }
        Ok(states)
    }

    /// `diag(σ'(W_l x + b_l)) W_l`, with `x` the input to `layer`.
    pub fn jacobian(&self, x: &DVector<T>, layer: usize) -> Result<DMatrix<T>> {
        self.check_layer(layer)?;
        self.check_input(x, layer)?;
        let gain = self.preactivation(x, layer).map(|z| self.activation.eval_deriv(z));
        let mut j = self.layers[layer].weights.clone();
        for (mut row, g) in j.row_iter_mut().zip(gain.iter()) {
            row *= *g;
        }
        Ok(j)
    }

    fn check_layer(&self, layer: usize) -> Result<()> {
        if layer >= self.depth() {
            return Err(Error::param("layer", format!("index {layer} out of range for depth {}", self.depth())));
        }
        Ok(())
    }
}

/// Serialized network: row-major weight rows per layer plus an activation spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetSpec {
    pub activation: String,
    pub layers: Vec<LayerSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub weights: Vec<Vec<f64>>,
    #[serde(default)]
    pub bias: Option<Vec<f64>>,
}

impl NetSpec {
    pub fn build<T: Scalar>(&self) -> Result<LayeredNet<T>> {
        let activation: ActivationFn<T> = self.activation.parse()?;
        let layers = self
            .layers
            .iter()
            .map(|spec| {
                let rows = spec.weights.len();
                let cols = spec.weights.first().map_or(0, Vec::len);
                if rows == 0 || cols == 0 {
                    return Err(Error::Empty("layer weight matrix"));
                }
                if let Some(bad) = spec.weights.iter().find(|r| r.len() != cols) {
                    return Err(Error::Dimension {
                        expected: cols,
                        actual: bad.len(),
                        context: "weight row length",
                    });
                }
                let weights = DMatrix::from_fn(rows, cols, |i, j| T::of(spec.weights[i][j]));
                let bias = match &spec.bias {
                    Some(b) => DVector::from_iterator(b.len(), b.iter().map(|&v| T::of(v))),
                    None => DVector::zeros(rows),
                };
                Ok(Layer { weights, bias })
            })
            .collect::<Result<Vec<_>>>()?;
        LayeredNet::new(layers, activation)
    }

    pub fn from_net<T: Scalar>(net: &LayeredNet<T>) -> Self {
        Self {
            activation: net.activation().spec_string(),
            layers: net
                .layers()
                .iter()
                .map(|l| LayerSpec {
                    weights: l.weights.row_iter().map(|r| r.iter().map(|v| v.as_f64()).collect()).collect(),
                    bias: Some(l.bias.iter().map(|v| v.as_f64()).collect()),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Stable,
    EdgeOfChaos,
    Chaotic,
}

impl Regime {
    pub fn classify(lambda: f64, edge_tolerance: f64) -> Self {
        if lambda < -edge_tolerance {
            Regime::Stable
        } else if lambda > edge_tolerance {
            Regime::Chaotic
        } else {
            Regime::EdgeOfChaos
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovOptions {
    pub edge_tolerance: f64,
    /// Use singular values for rectangular layers instead of failing.
    pub singular_value_fallback: bool,
}

impl Default for LyapunovOptions {
    fn default() -> Self {
        Self {
            edge_tolerance: DEFAULT_EDGE_TOLERANCE,
            singular_value_fallback: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalityReport {
    pub lyapunov: f64,
    /// Per layer, time-averaged `log|σ|` by descending magnitude rank.
    pub per_layer_log_spectra: Vec<Vec<f64>>,
    pub regime: Regime,
    pub edge_tolerance: f64,
}

fn json_real(v: f64) -> serde_json::Value {
    if v.is_finite() {
        serde_json::json!(v)
    } else if v.is_nan() {
        serde_json::json!("nan")
    } else if v > 0.0 {
        serde_json::json!("inf")
    } else {
        serde_json::json!("-inf")
    }
}

impl CriticalityReport {
    /// `{"lambda", "regime", "edge_tolerance", "per_layer"}`; infinities are
    /// written as the strings `"inf"` / `"-inf"`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "lambda": json_real(self.lyapunov),
            "regime": self.regime,
            "edge_tolerance": self.edge_tolerance,
            "per_layer": self
                .per_layer_log_spectra
                .iter()
                .map(|l| l.iter().map(|&v| json_real(v)).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        })
    }
}

fn magnitudes(j: DMatrix<f64>, layer: usize, fallback: bool) -> Result<Vec<f64>> {
    let mut mags: Vec<f64> = if j.is_square() {
        j.complex_eigenvalues().iter().map(|z| z.norm()).collect()
    } else if fallback {
        j.singular_values().iter().copied().collect()
    } else {
        return Err(Error::NonSquareJacobian {
            layer,
            rows: j.nrows(),
            cols: j.ncols(),
        });
    };
    mags.sort_by(|a, b| b.total_cmp(a));
    Ok(mags)
}

/// Lyapunov measure along a trajectory of network inputs.
///
/// Each input is propagated through the net; layer `l`'s Jacobian is taken at
/// its own input state. Eigenvalue moduli are sorted in descending order and
/// `log|·|` is averaged over time rank by rank. `λ` is the maximum over layers
/// and ranks. A zero modulus yields `−∞`.
pub fn lyapunov<T: Scalar>(
    net: &LayeredNet<T>,
    trajectory: &[DVector<T>],
    options: &LyapunovOptions,
) -> Result<CriticalityReport> {
    if trajectory.is_empty() {
        return Err(Error::Empty("trajectory"));
    }
    let states = trajectory.iter().map(|x0| net.forward(x0)).collect::<Result<Vec<_>>>()?;
    let per_layer = (0..net.depth())
        .into_par_iter()
        .map(|l| {
            let js = states.iter().map(|s| net.jacobian(&s[l], l).map(|j| j.map(|v| v.as_f64())));
            rank_averaged_logs(js, l, options)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(report(per_layer, options))
}

/// Lyapunov measure from precomputed Jacobians, `jacobians[l][t]` being layer
/// `l` at time `t`.
pub fn lyapunov_from_jacobians(jacobians: &[Vec<DMatrix<f64>>], options: &LyapunovOptions) -> Result<CriticalityReport> {
    if jacobians.is_empty() || jacobians.iter().any(|l| l.is_empty()) {
        return Err(Error::Empty("trajectory"));
    }
    let per_layer = jacobians
        .par_iter()
        .enumerate()
        .map(|(l, js)| rank_averaged_logs(js.iter().cloned().map(Ok), l, options))
        .collect::<Result<Vec<_>>>()?;
    Ok(report(per_layer, options))
}

fn rank_averaged_logs(
    jacobians: impl Iterator<Item = Result<DMatrix<f64>>>,
    layer: usize,
    options: &LyapunovOptions,
) -> Result<Vec<f64>> {
    let mut sums: Vec<f64> = Vec::new();
    let mut steps = 0usize;
    for j in jacobians {
        let mags = magnitudes(j?, layer, options.singular_value_fallback)?;
        if sums.is_empty() {
            sums = vec![0.0; mags.len()];
        }
        for (acc, m) in sums.iter_mut().zip(mags) {
            *acc += m.ln();
        }
        steps += 1;
    }
    Ok(sums.into_iter().map(|s| s / steps as f64).collect())
}

fn report(per_layer: Vec<Vec<f64>>, options: &LyapunovOptions) -> CriticalityReport {
    let lambda = per_layer
        .iter()
        .flatten()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    CriticalityReport {
        lyapunov: lambda,
        per_layer_log_spectra: per_layer,
        regime: Regime::classify(lambda, options.edge_tolerance),
        edge_tolerance: options.edge_tolerance,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn net1(w: f64, b: f64, act: ActivationFn<f64>) -> LayeredNet<f64> {
        LayeredNet::new(
            vec![Layer {
                weights: DMatrix::from_element(1, 1, w),
                bias: DVector::from_element(1, b),
            }],
            act,
        )
        .unwrap()
    }

    #[test]
    fn forward_examples() {
        let x0 = DVector::from_vec(vec![0.3, -1.2, 2.0]);
        let id = LayeredNet::repeated(DMatrix::identity(3, 3), DVector::zeros(3), 4, ActivationFn::identity()).unwrap();
        for s in id.forward(&x0).unwrap() {
            assert_eq!(s, x0);
        }
        let sig = LayeredNet::repeated(DMatrix::zeros(3, 3), DVector::zeros(3), 2, ActivationFn::sigmoid()).unwrap();
        let states = sig.forward(&x0).unwrap();
        assert_eq!(states.len(), 3);
        assert!(states[1..].iter().flatten().all(|&v| v == 0.5));
        let relu = net1(2.0, 1.0, ActivationFn::relu());
        assert_eq!(relu.forward(&DVector::from_element(1, -1.0)).unwrap()[1][0], 0.0);
        assert!(matches!(id.forward(&DVector::zeros(2)), Err(Error::Dimension { .. })));
    }

    #[test]
    fn jacobian_examples() {
        let w = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let id = LayeredNet::repeated(w.clone(), DVector::zeros(2), 1, ActivationFn::identity()).unwrap();
        assert_eq!(id.jacobian(&DVector::from_vec(vec![5.0, 6.0]), 0).unwrap(), w);
        let sig = net1(0.5, 0.0, ActivationFn::sigmoid());
        assert_eq!(sig.jacobian(&DVector::zeros(1), 0).unwrap()[(0, 0)], 0.125);
        let zero = LayeredNet::repeated(DMatrix::zeros(2, 2), DVector::zeros(2), 1, ActivationFn::sigmoid()).unwrap();
        assert_eq!(zero.jacobian(&DVector::from_vec(vec![1.0, 1.0]), 0).unwrap(), DMatrix::zeros(2, 2));
    }

    #[test]
    fn rejects_broken_chains() {
        let a = Layer {
            weights: DMatrix::<f64>::zeros(3, 2),
            bias: DVector::zeros(3),
        };
        let b = Layer {
            weights: DMatrix::<f64>::zeros(2, 4),
            bias: DVector::zeros(2),
        };
        assert!(LayeredNet::new(vec![a, b], ActivationFn::tanh()).is_err());
    }

    #[test]
    fn lyapunov_linear_examples() {
        let traj = vec![DVector::from_vec(vec![1.0, 0.0]), DVector::from_vec(vec![-0.5, 2.0])];
        let opts = LyapunovOptions::default();
        let scaled = |s: f64| {
            LayeredNet::repeated(DMatrix::identity(2, 2) * s, DVector::zeros(2), 3, ActivationFn::identity()).unwrap()
        };
        let r = lyapunov(&scaled(0.5), &traj, &opts).unwrap();
        assert_abs_diff_eq!(r.lyapunov, 0.5f64.ln(), epsilon = 1e-12);
        assert_eq!(r.regime, Regime::Stable);
        let r = lyapunov(&scaled(2.0), &traj, &opts).unwrap();
        assert_abs_diff_eq!(r.lyapunov, 2.0f64.ln(), epsilon = 1e-12);
        assert_eq!(r.regime, Regime::Chaotic);

        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let rot = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        let net = LayeredNet::repeated(rot, DVector::zeros(2), 2, ActivationFn::identity()).unwrap();
        let r = lyapunov(&net, &traj, &opts).unwrap();
        assert_abs_diff_eq!(r.lyapunov, 0.0, epsilon = 1e-12);
        assert_eq!(r.regime, Regime::EdgeOfChaos);
    }

    #[test]
    fn zero_jacobian_is_stable_with_negative_infinity() {
        let net = LayeredNet::repeated(DMatrix::<f64>::zeros(2, 2), DVector::zeros(2), 1, ActivationFn::identity()).unwrap();
        let r = lyapunov(&net, &[DVector::zeros(2)], &LyapunovOptions::default()).unwrap();
        assert_eq!(r.lyapunov, f64::NEG_INFINITY);
        assert_eq!(r.regime, Regime::Stable);
        assert_eq!(r.to_json()["lambda"], "-inf");
    }

    #[test]
    fn rectangular_needs_fallback() {
        let net = LayeredNet::random(&[3, 2], 1.0, ActivationFn::<f64>::tanh(), 1).unwrap();
        let traj = [DVector::from_vec(vec![0.1, 0.2, 0.3])];
        let err = lyapunov(&net, &traj, &LyapunovOptions::default()).unwrap_err();
        assert!(matches!(err, Error::NonSquareJacobian { layer: 0, rows: 2, cols: 3 }));
        let opts = LyapunovOptions {
            singular_value_fallback: true,
            ..Default::default()
        };
        let r = lyapunov(&net, &traj, &opts).unwrap();
        assert_eq!(r.per_layer_log_spectra[0].len(), 2);
    }

    #[test]
    fn net_spec_round_trip() {
        let net = LayeredNet::random(&[2, 3, 3], 1.5, ActivationFn::<f64>::tanh(), 9).unwrap();
        let spec = NetSpec::from_net(&net);
        let json = serde_json::to_string(&spec).unwrap();
        let back: NetSpec = serde_json::from_str(&json).unwrap();
        let rebuilt: LayeredNet<f64> = back.build().unwrap();
        assert_eq!(rebuilt.layers(), net.layers());
    }
}
