//! Fully connected classifier trained with mini-batch SGD.
//!
//! Hidden layers share one activation; the output layer is linear, followed
//! by softmax for cross-entropy or compared to one-hot targets for squared
//! error. Weights start Gaussian with variance `1/fan_in`, biases at zero.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::activations::ActivationFn;
use crate::data::ClassificationData;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Loss {
    CrossEntropy,
    SquaredError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MlpConfig {
    pub hidden: Vec<usize>,
    pub activation: ActivationFn<f64>,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub loss: Loss,
    /// Leading samples whose hidden states are recorded every epoch.
    pub probe_size: usize,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            hidden: vec![32, 32],
            activation: ActivationFn::tanh(),
            learning_rate: 0.1,
            batch_size: 32,
            epochs: 50,
            seed: 0,
            loss: Loss::CrossEntropy,
            probe_size: 32,
        }
    }
}

impl MlpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden.contains(&0) {
            return Err(Error::param("hidden", "widths must be at least 1"));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err(Error::param("learning_rate", "must be non-negative"));
        }
        if self.batch_size == 0 {
            return Err(Error::param("batch_size", "must be at least 1"));
        }
        Ok(())
    }
}

/// Network parameters; layer `l` maps `widths[l]` to `widths[l+1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub weights: Vec<DMatrix<f64>>,
    pub biases: Vec<DVector<f64>>,
}

struct Pass {
    /// Pre-activations per layer.
    z: Vec<DMatrix<f64>>,
    /// Layer outputs; `a[0]` is the input batch.
    a: Vec<DMatrix<f64>>,
}

impl Mlp {
    pub fn init(widths: &[usize], rng: &mut ChaCha8Rng) -> Self {
        let mut weights = Vec::with_capacity(widths.len() - 1);
        let mut biases = Vec::with_capacity(widths.len() - 1);
        for w in widths.windows(2) {
            let std = (1.0 / w[0] as f64).sqrt();
            weights.push(DMatrix::from_fn(w[1], w[0], |_, _| {
                let z: f64 = StandardNormal.sample(rng);
                std * z
            }));
            biases.push(DVector::zeros(w[1]));
        }
        Self { weights, biases }
    }

    pub fn num_params(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>() + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    fn forward(&self, x: &DMatrix<f64>, act: &ActivationFn<f64>) -> Pass {
        let depth = self.weights.len();
        let mut z = Vec::with_capacity(depth);
        let mut a = Vec::with_capacity(depth + 1);
        a.push(x.clone());
        for l in 0..depth {
            let mut zl = &self.weights[l] * &a[l];
            for mut col in zl.column_iter_mut() {
                col += &self.biases[l];
            }
            let al = if l + 1 < depth { zl.map(|v| act.eval(v)) } else { zl.clone() };
            z.push(zl);
            a.push(al);
        }
        Pass { z, a }
    }

    /// Hidden activations of each sample (columns of `x`), all hidden layers
    /// concatenated.
    pub fn hidden_states(&self, x: &DMatrix<f64>, act: &ActivationFn<f64>) -> Vec<Vec<f64>> {
        let pass = self.forward(x, act);
        let hidden = &pass.a[1..pass.a.len() - 1];
        (0..x.ncols())
            .map(|j| hidden.iter().flat_map(|h| h.column(j).iter().copied().collect::<Vec<_>>()).collect())
            .collect()
    }

    /// Output scores, one column per sample.
    pub fn outputs(&self, x: &DMatrix<f64>, act: &ActivationFn<f64>) -> DMatrix<f64> {
        self.forward(x, act).a.pop().expect("network has layers")
    }

    /// Mean loss and its gradient with respect to every parameter.
    fn loss_and_grad(&self, x: &DMatrix<f64>, labels: &[usize], act: &ActivationFn<f64>, loss: Loss) -> (f64, Mlp) {
        let pass = self.forward(x, act);
        let depth = self.weights.len();
        let out = &pass.a[depth];
        let (value, mut delta) = output_delta(out, labels, loss);
        let mut gw = vec![DMatrix::zeros(0, 0); depth];
        let mut gb = vec![DVector::zeros(0); depth];
        for l in (0..depth).rev() {
            gw[l] = &delta * pass.a[l].transpose();
            gb[l] = delta.column_sum();
            if l > 0 {
                let back = self.weights[l].transpose() * &delta;
                delta = back.zip_map(&pass.z[l - 1], |g, z| g * act.eval_deriv(z));
            }
        }
        (value, Mlp { weights: gw, biases: gb })
    }

    fn loss(&self, x: &DMatrix<f64>, labels: &[usize], act: &ActivationFn<f64>, loss: Loss) -> f64 {
        let out = self.outputs(x, act);
        output_delta(&out, labels, loss).0
    }

    /// The `k`-th entry in [`Self::params`] order.
    fn param_mut(&mut self, mut k: usize) -> &mut f64 {
        for w in &mut self.weights {
            if k < w.len() {
                return &mut w.as_mut_slice()[k];
            }
            k -= w.len();
        }
        for b in &mut self.biases {
            if k < b.len() {
                return &mut b.as_mut_slice()[k];
            }
            k -= b.len();
        }
        panic!("parameter index out of range")
    }

    fn params(&self) -> impl Iterator<Item = &f64> {
        self.weights.iter().flat_map(|w| w.iter()).chain(self.biases.iter().flat_map(|b| b.iter()))
    }
}

/// Mean loss over the batch and `∂loss/∂z_out`.
fn output_delta(out: &DMatrix<f64>, labels: &[usize], loss: Loss) -> (f64, DMatrix<f64>) {
    let n = out.ncols() as f64;
    let mut delta = DMatrix::zeros(out.nrows(), out.ncols());
    let mut total = 0.0;
    for (j, &y) in labels.iter().enumerate() {
        let col = out.column(j);
        match loss {
            Loss::CrossEntropy => {
                let m = col.max();
                let lse = m + col.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
                total += lse - col[y];
                for k in 0..col.len() {
                    let p = (col[k] - lse).exp();
                    delta[(k, j)] = (p - f64::from(u8::from(k == y))) / n;
                }
            }
            Loss::SquaredError => {
                for k in 0..col.len() {
                    let r = col[k] - f64::from(u8::from(k == y));
                    total += 0.5 * r * r;
                    delta[(k, j)] = r / n;
                }
            }
        }
    }
    (total / n, delta)
}

/// Features as columns.
fn design(data: &ClassificationData, idx: &[usize]) -> DMatrix<f64> {
    let d = data.dim();
    DMatrix::from_fn(d, idx.len(), |i, j| data.inputs[idx[j]][i])
}

fn widths(config: &MlpConfig, data: &ClassificationData) -> Vec<usize> {
    std::iter::once(data.dim())
        .chain(config.hidden.iter().copied())
        .chain(std::iter::once(data.classes))
        .collect()
}

fn check_data(data: &ClassificationData) -> Result<()> {
    if data.is_empty() || data.dim() == 0 {
        return Err(Error::Empty("classification data"));
    }
    if let Some(bad) = data.inputs.iter().find(|r| r.len() != data.dim()) {
        return Err(Error::Dimension {
            expected: data.dim(),
            actual: bad.len(),
            context: "feature row",
        });
    }
    if data.labels.len() != data.len() || data.labels.iter().any(|&y| y >= data.classes) {
        return Err(Error::param("labels", "one label below `classes` per row required"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingTrace {
    /// Full-data loss after each epoch.
    pub losses: Vec<f64>,
    /// Per epoch, hidden states of the probe samples.
    pub hidden: Vec<Vec<Vec<f64>>>,
    pub final_accuracy: f64,
    pub initial_loss: f64,
}

impl TrainingTrace {
    pub fn final_loss(&self) -> f64 {
        *self.losses.last().unwrap_or(&self.initial_loss)
    }

    /// First 1-based epoch whose loss is at most `threshold`.
    pub fn epochs_to(&self, threshold: f64) -> Option<usize> {
        self.losses.iter().position(|&l| l <= threshold).map(|i| i + 1)
    }

    /// Variance of successive loss differences.
    pub fn roughness(&self) -> f64 {
        let diffs: Vec<f64> = self.losses.windows(2).map(|w| w[1] - w[0]).collect();
        if diffs.is_empty() {
            0.0
        } else {
            crate::stats::variance(&diffs)
        }
    }

    /// Probe hidden states flattened into one vector per epoch.
    pub fn hidden_trajectory(&self) -> Vec<Vec<f64>> {
        self.hidden.iter().map(|e| e.iter().flatten().copied().collect()).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,loss\n");
        for (e, l) in self.losses.iter().enumerate() {
            out.push_str(&format!("{},{l}\n", e + 1));
        }
        out
    }
}

pub fn accuracy(net: &Mlp, data: &ClassificationData, act: &ActivationFn<f64>) -> f64 {
    let idx: Vec<usize> = (0..data.len()).collect();
    let out = net.outputs(&design(data, &idx), act);
    let hits = out
        .column_iter()
        .zip(&data.labels)
        .filter(|(c, &y)| c.argmax().0 == y)
        .count();
    hits as f64 / data.len() as f64
}

/// Trains from `config.seed` and returns the trace and final parameters.
pub fn train_model(config: &MlpConfig, data: &ClassificationData) -> Result<(TrainingTrace, Mlp)> {
    config.validate()?;
    check_data(data)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut net = Mlp::init(&widths(config, data), &mut rng);
    let act = &config.activation;
    let all: Vec<usize> = (0..data.len()).collect();
    let x_all = design(data, &all);
    let probe: Vec<usize> = (0..config.probe_size.min(data.len())).collect();
    let x_probe = design(data, &probe);
    let initial_loss = net.loss(&x_all, &data.labels, act, config.loss);
    let mut losses = Vec::with_capacity(config.epochs);
    let mut hidden = Vec::with_capacity(config.epochs);
    let mut order = all.clone();
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            let labels: Vec<usize> = batch.iter().map(|&i| data.labels[i]).collect();
            let (_, grad) = net.loss_and_grad(&design(data, batch), &labels, act, config.loss);
            for (w, g) in net.weights.iter_mut().zip(&grad.weights) {
                *w -= g * config.learning_rate;
            }
            for (b, g) in net.biases.iter_mut().zip(&grad.biases) {
                *b -= g * config.learning_rate;
            }
        }
        let loss = net.loss(&x_all, &data.labels, act, config.loss);
        if !loss.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        losses.push(loss);
        hidden.push(net.hidden_states(&x_probe, act));
    }
    let final_accuracy = accuracy(&net, data, act);
    Ok((
        TrainingTrace {
            losses,
            hidden,
            final_accuracy,
            initial_loss,
        },
        net,
    ))
}

pub fn train(config: &MlpConfig, data: &ClassificationData) -> Result<TrainingTrace> {
    train_model(config, data).map(|(t, _)| t)
}

/// Step used by [`gradient_check`].
pub const GRADIENT_CHECK_STEP: f64 = 1e-5;
/// Denominator floor of the relative error.
pub const GRADIENT_CHECK_FLOOR: f64 = 1e-6;

/// Largest relative difference `|g − ĝ| / max(|g|, |ĝ|, floor)` between
/// backprop and central differences, at the parameters `config.seed`
/// initialises, on the samples `indices`.
pub fn gradient_check(config: &MlpConfig, data: &ClassificationData, indices: &[usize]) -> Result<f64> {
    config.validate()?;
    check_data(data)?;
    if indices.is_empty() || indices.iter().any(|&i| i >= data.len()) {
        return Err(Error::param("indices", "need valid sample indices"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let net = Mlp::init(&widths(config, data), &mut rng);
    Ok(gradient_check_at(&net, config, data, indices))
}

/// As [`gradient_check`] at explicit parameters.
pub fn gradient_check_at(net: &Mlp, config: &MlpConfig, data: &ClassificationData, indices: &[usize]) -> f64 {
    let x = design(data, indices);
    let labels: Vec<usize> = indices.iter().map(|&i| data.labels[i]).collect();
    let act = &config.activation;
    let (_, grad) = net.loss_and_grad(&x, &labels, act, config.loss);
    let analytic: Vec<f64> = grad.params().copied().collect();
    let mut probe = net.clone();
    let mut worst = 0.0f64;
    for (k, &g) in analytic.iter().enumerate() {
        let orig = *probe.param_mut(k);
        *probe.param_mut(k) = orig + GRADIENT_CHECK_STEP;
        let up = probe.loss(&x, &labels, act, config.loss);
        *probe.param_mut(k) = orig - GRADIENT_CHECK_STEP;
        let down = probe.loss(&x, &labels, act, config.loss);
        *probe.param_mut(k) = orig;
        let numeric = (up - down) / (2.0 * GRADIENT_CHECK_STEP);
        let denom = g.abs().max(numeric.abs()).max(GRADIENT_CHECK_FLOOR);
        worst = worst.max((g - numeric).abs() / denom);
    }
    worst
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub config_id: usize,
    pub param_value: f64,
    pub final_loss: Option<f64>,
    pub epochs_to_threshold: Option<usize>,
    pub diverged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// 110% of the best final loss among converged runs.
    pub threshold: Option<f64>,
    pub traces: Vec<Option<TrainingTrace>>,
}

/// Share of the best final loss defining the convergence threshold.
pub const THRESHOLD_FACTOR: f64 = 1.1;

impl SweepResult {
    /// Parameter value with the fewest epochs to threshold; ties go to the
    /// lower final loss, then the lower value.
    pub fn argmin(&self) -> Option<f64> {
        self.rows
            .iter()
            .filter_map(|r| Some((r.epochs_to_threshold?, r.final_loss?, r.param_value)))
            .min_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.total_cmp(&b.2)))
            .map(|t| t.2)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("config_id,param_value,final_loss,epochs_to_threshold,diverged\n");
        for r in &self.rows {
            let fl = r.final_loss.map_or("NA".to_string(), |v| v.to_string());
            let ep = r.epochs_to_threshold.map_or("NA".to_string(), |v| v.to_string());
            out.push_str(&format!("{},{},{fl},{ep},{}\n", r.config_id, r.param_value, r.diverged));
        }
        out
    }
}

/// Trains every `(param_value, config)` pair; divergent runs are recorded,
/// not fatal. Runs are independent, so parallel and serial execution agree.
pub fn sweep(configs: &[(f64, MlpConfig)], data: &ClassificationData) -> Result<SweepResult> {
    for (_, c) in configs {
        c.validate()?;
    }
    check_data(data)?;
    let traces: Vec<Option<TrainingTrace>> = configs
        .par_iter()
        .map(|(_, c)| match train(c, data) {
            Ok(t) if t.losses.iter().all(|l| l.is_finite()) => Ok(Some(t)),
            Ok(_) | Err(Error::Diverged { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let best = traces
        .iter()
        .flatten()
        .map(TrainingTrace::final_loss)
        .fold(f64::INFINITY, f64::min);
    let threshold = best.is_finite().then_some(THRESHOLD_FACTOR * best);
    let rows = configs
        .iter()
        .zip(&traces)
        .enumerate()
        .map(|(id, ((value, _), t))| SweepRow {
            config_id: id,
            param_value: *value,
            final_loss: t.as_ref().map(TrainingTrace::final_loss),
            epochs_to_threshold: t.as_ref().zip(threshold).and_then(|(t, th)| t.epochs_to(th)),
            diverged: t.is_none(),
        })
        .collect();
    Ok(SweepResult { rows, threshold, traces })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activations::{synthesize_hp, HpDesignProfile};
    use crate::data::{blobs, two_moons};

    fn hp() -> ActivationFn<f64> {
        synthesize_hp(&HpDesignProfile::default()).unwrap()
    }

    #[test]
    fn separable_blobs_are_learned() {
        let data = blobs(200, 2, 2, 4.0, 3).unwrap();
        for act in [ActivationFn::sigmoid(), ActivationFn::tanh(), ActivationFn::swish(), hp()] {
            let cfg = MlpConfig {
                hidden: vec![8],
                activation: act,
                epochs: 30,
                ..Default::default()
            };
            let t = train(&cfg, &data).unwrap();
            assert!(t.final_accuracy >= 0.95, "{}: {}", cfg.activation, t.final_accuracy);
            assert_eq!(t.losses.len(), 30);
            assert_eq!(t.hidden.len(), 30);
        }
    }

    #[test]
    fn zero_learning_rate_is_flat() {
        let data = two_moons(100, 0.1, 0).unwrap();
        let cfg = MlpConfig {
            learning_rate: 0.0,
            epochs: 5,
            ..Default::default()
        };
        let t = train(&cfg, &data).unwrap();
        assert!(t.losses.iter().all(|&l| l == t.initial_loss));
    }

    #[test]
    fn same_seed_same_trace() {
        let data = two_moons(100, 0.1, 0).unwrap();
        let cfg = MlpConfig {
            epochs: 5,
            activation: hp(),
            ..Default::default()
        };
        assert_eq!(train(&cfg, &data).unwrap(), train(&cfg, &data).unwrap());
    }

    #[test]
    fn gradients_match_finite_differences() {
        let data = two_moons(20, 0.1, 1).unwrap();
        let idx: Vec<usize> = (0..8).collect();
        for act in [ActivationFn::sigmoid(), ActivationFn::tanh(), ActivationFn::swish(), hp()] {
            for loss in [Loss::CrossEntropy, Loss::SquaredError] {
                let cfg = MlpConfig {
                    hidden: vec![5, 4],
                    activation: act.clone(),
                    loss,
                    ..Default::default()
                };
                let err = gradient_check(&cfg, &data, &idx).unwrap();
                assert!(err <= 1e-5, "{act} {loss:?}: {err}");
            }
        }
    }

    #[test]
    fn relu_gradient_off_kinks() {
        let data = two_moons(20, 0.1, 2).unwrap();
        let cfg = MlpConfig {
            hidden: vec![6],
            activation: ActivationFn::relu(),
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let net = Mlp::init(&[2, 6, 2], &mut rng);
        // Keep samples whose pre-activations sit well away from zero.
        let z = &net.weights[0] * design(&data, &(0..20).collect::<Vec<_>>());
        let idx: Vec<usize> = (0..20).filter(|&j| z.column(j).iter().all(|v| v.abs() > 1e-3)).collect();
        assert!(!idx.is_empty());
        assert!(gradient_check_at(&net, &cfg, &data, &idx) <= 1e-5);
    }

    #[test]
    fn sweep_single_config_matches_train() {
        let data = two_moons(100, 0.1, 0).unwrap();
        let cfg = MlpConfig {
            epochs: 10,
            ..Default::default()
        };
        let r = sweep(&[(0.5, cfg.clone())], &data).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert_eq!(r.rows[0].final_loss, Some(train(&cfg, &data).unwrap().final_loss()));
        assert_eq!(r.argmin(), Some(0.5));
    }

    #[test]
    fn divergence_is_reported() {
        let data = two_moons(100, 0.1, 0).unwrap();
        let cfg = MlpConfig {
            hidden: vec![16, 16, 16],
            activation: synthesize_hp(&HpDesignProfile {
                max_coeff: 0.95,
                min_coeff: 0.9,
                spacing: 0.01,
                ..Default::default()
            })
            .unwrap(),
            learning_rate: 5.0,
            epochs: 20,
            ..Default::default()
        };
        let err = train(&cfg, &data).unwrap_err();
        assert!(matches!(err, Error::Diverged { .. }), "{err}");
        let r = sweep(&[(1.0, cfg)], &data).unwrap();
        assert!(r.rows[0].diverged);
        assert_eq!(r.argmin(), None);
    }

    #[test]
    fn argmin_tie_breaks() {
        let row = |id, v, l, e| SweepRow {
            config_id: id,
            param_value: v,
            final_loss: Some(l),
            epochs_to_threshold: Some(e),
            diverged: false,
        };
        let r = SweepResult {
            rows: vec![row(0, 0.7, 0.2, 3), row(1, 0.6, 0.1, 3), row(2, 0.5, 0.1, 3), row(3, 0.4, 0.0, 9)],
            threshold: None,
            traces: vec![],
        };
        assert_eq!(r.argmin(), Some(0.5));
    }
}
