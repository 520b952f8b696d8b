//! Deep echo state network: stacked leaky reservoirs with a ridge readout.
//!
//! Layer `l` at time `n` is updated as
//! `x_l(n) = (1−α) x_l(n−1) + α σ(V_l u_l(n) + W_l x_l(n−1))`
//! where `u_1` is the external input and `u_l = x_{l−1}(n)` for deeper layers.
//! The readout is linear in `[1, x_1(n), …, x_L(n)]` and predicts the next
//! input sample.

mod io;
mod sparse;

use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::activations::ActivationFn;
use crate::data::{metrics, ChronoSplit, MetricReport};
use crate::error::{Error, Result};
use sparse::Csr;

pub use io::{MODEL_FORMAT, MODEL_VERSION};

pub const DEFAULT_WASHOUT: usize = 100;
pub const DEFAULT_DENSITY: f64 = 0.1;
/// Anomaly threshold as a multiple of the validation RMSE.
pub const ANOMALY_RMSE_FACTOR: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeepEsnConfig {
    pub num_layers: usize,
    /// Width of every layer.
    pub reservoir_size: usize,
    pub spectral_radius: f64,
    /// Scale of the input and inter-layer weights.
    pub input_scaling: f64,
    pub leak_rate: f64,
    pub washout: usize,
    pub ridge_lambda: f64,
    /// Fraction of nonzero recurrent and inter-layer weights.
    pub density: f64,
    pub activation: ActivationFn<f64>,
    pub seed: u64,
    /// Permit `spectral_radius ≥ 1`; only meant for stability probes.
    pub allow_unstable: bool,
}

impl Default for DeepEsnConfig {
    fn default() -> Self {
        Self {
            num_layers: 1,
            reservoir_size: 100,
            spectral_radius: 0.9,
            input_scaling: 0.1,
            leak_rate: 1.0,
            washout: DEFAULT_WASHOUT,
            ridge_lambda: 1e-6,
            density: DEFAULT_DENSITY,
            activation: ActivationFn::tanh(),
            seed: 0,
            allow_unstable: false,
        }
    }
}

impl DeepEsnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_layers == 0 {
            return Err(Error::param("num_layers", "must be at least 1"));
        }
        if self.reservoir_size == 0 {
            return Err(Error::param("reservoir_size", "must be at least 1"));
        }
        let rho = self.spectral_radius;
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::param("spectral_radius", "must be positive"));
        }
        if rho >= 1.0 && !self.allow_unstable {
            return Err(Error::param("spectral_radius", format!("{rho} violates the echo state condition (< 1)")));
        }
        if !(self.input_scaling.is_finite() && self.input_scaling > 0.0) {
            return Err(Error::param("input_scaling", "must be positive"));
        }
        if !(self.leak_rate > 0.0 && self.leak_rate <= 1.0) {
            return Err(Error::param("leak_rate", "must lie in (0, 1]"));
        }
        if !(self.ridge_lambda.is_finite() && self.ridge_lambda >= 0.0) {
            return Err(Error::param("ridge_lambda", "must be non-negative"));
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(Error::param("density", "must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Sparse uniform(−1, 1) matrix; every row gets at least one nonzero.
fn sparse_uniform(rng: &mut ChaCha8Rng, rows: usize, cols: usize, density: f64) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        let mut any = false;
        for j in 0..cols {
            if rng.random::<f64>() < density {
                m[(i, j)] = rng.random_range(-1.0..1.0);
                any = true;
            }
        }
        if !any {
            let j = rng.random_range(0..cols);
            m[(i, j)] = rng.random_range(-1.0..1.0);
        }
    }
    m
}

/// Largest eigenvalue modulus.
pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Untrained reservoir stack.
#[derive(Debug, Clone, PartialEq)]
pub struct Reservoir {
    config: DeepEsnConfig,
    input_dim: usize,
    input: DMatrix<f64>,
    recurrent: Vec<Csr>,
    inter: Vec<Csr>,
}

/// States over time, all layers concatenated per row.
#[derive(Debug, Clone, PartialEq)]
pub struct StateTrajectory {
    /// `T × (L·N)`; columns `l·N .. (l+1)·N` belong to layer `l`.
    pub states: DMatrix<f64>,
    pub num_layers: usize,
    pub reservoir_size: usize,
    /// Index of the first row in the driving series.
    pub start: usize,
}

impl StateTrajectory {
    pub fn len(&self) -> usize {
        self.states.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.states.nrows() == 0
    }

    /// Trajectory of one layer, one vector per step.
    pub fn layer(&self, l: usize) -> Vec<Vec<f64>> {
        let n = self.reservoir_size;
        self.states
            .row_iter()
            .map(|r| r.columns(l * n, n).iter().copied().collect())
            .collect()
    }

    /// Concatenated states, one vector per step.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.states.row_iter().map(|r| r.iter().copied().collect()).collect()
    }
}

impl Reservoir {
    /// Draws all matrices from `config.seed`. Layer `l` uses its own random
    /// stream, so a layer's weights do not depend on the stack depth.
    pub fn build(config: &DeepEsnConfig, input_dim: usize) -> Result<Self> {
        config.validate()?;
        if input_dim == 0 {
            return Err(Error::param("input_dim", "must be at least 1"));
        }
        let n = config.reservoir_size;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let input = DMatrix::from_fn(n, input_dim, |_, _| config.input_scaling * rng.random_range(-1.0..1.0));
        let mut recurrent = Vec::with_capacity(config.num_layers);
        let mut inter = Vec::with_capacity(config.num_layers.saturating_sub(1));
        for l in 0..config.num_layers {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(l as u64 + 1);
            let w = sparse_uniform(&mut rng, n, n, config.density);
            let rho = spectral_radius(&w);
            if rho < 1e-12 {
                return Err(Error::param("seed", format!("layer {l} recurrent matrix is nilpotent")));
            }
            recurrent.push(Csr::from_dense(&(w * (config.spectral_radius / rho))));
            if l > 0 {
                let v = sparse_uniform(&mut rng, n, n, config.density) * config.input_scaling;
                inter.push(Csr::from_dense(&v));
            }
        }
        Ok(Self {
            config: config.clone(),
            input_dim,
            input,
            recurrent,
            inter,
        })
    }

    pub fn config(&self) -> &DeepEsnConfig {
        &self.config
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn feature_dim(&self) -> usize {
        self.config.num_layers * self.config.reservoir_size
    }

    pub fn input_weights(&self) -> &DMatrix<f64> {
        &self.input
    }

    pub fn recurrent_weights(&self, layer: usize) -> DMatrix<f64> {
        self.recurrent[layer].to_dense()
    }

    /// Weights from layer `layer − 1` into `layer` (`layer ≥ 1`).
    pub fn inter_layer_weights(&self, layer: usize) -> DMatrix<f64> {
        self.inter[layer - 1].to_dense()
    }

    pub fn matrix_count(&self) -> usize {
        1 + self.recurrent.len() + self.inter.len()
    }

    pub fn zero_state(&self) -> Vec<DVector<f64>> {
        vec![DVector::zeros(self.config.reservoir_size); self.config.num_layers]
    }

    /// One update of every layer in place.
    pub fn step(&self, state: &mut [DVector<f64>], u: &[f64]) {
        let a = self.config.leak_rate;
        let act = &self.config.activation;
        let n = self.config.reservoir_size;
        for l in 0..state.len() {
            let mut pre = if l == 0 {
                &self.input * DVector::from_column_slice(u)
            } else {
                let mut p = DVector::zeros(n);
                self.inter[l - 1].mul_add_to(&state[l - 1], &mut p);
                p
            };
            self.recurrent[l].mul_add_to(&state[l], &mut pre);
            let x = &mut state[l];
            for i in 0..n {
                x[i] = (1.0 - a) * x[i] + a * act.eval(pre[i]);
            }
        }
    }

    fn check_inputs(&self, inputs: &[Vec<f64>]) -> Result<()> {
        if let Some(bad) = inputs.iter().find(|u| u.len() != self.input_dim) {
            return Err(Error::Dimension {
                expected: self.input_dim,
                actual: bad.len(),
                context: "reservoir input",
            });
        }
        Ok(())
    }

    /// Every state from `initial`, transient included. Fails if a state
    /// becomes non-finite.
    pub fn run_from(&self, mut state: Vec<DVector<f64>>, inputs: &[Vec<f64>]) -> Result<StateTrajectory> {
        self.check_inputs(inputs)?;
        if state.len() != self.config.num_layers || state.iter().any(|s| s.len() != self.config.reservoir_size) {
            return Err(Error::Dimension {
                expected: self.config.reservoir_size,
                actual: state.first().map_or(0, |s| s.len()),
                context: "initial reservoir state",
            });
        }
        let n = self.config.reservoir_size;
        let mut states = DMatrix::zeros(inputs.len(), self.feature_dim());
        for (t, u) in inputs.iter().enumerate() {
            self.step(&mut state, u);
            for (l, x) in state.iter().enumerate() {
                if x.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite(format!("reservoir layer {l} at step {t}")));
                }
                states.view_mut((t, l * n), (1, n)).copy_from(&x.transpose());
            }
        }
        Ok(StateTrajectory {
            states,
            num_layers: self.config.num_layers,
            reservoir_size: n,
            start: 0,
        })
    }

    /// Per layer, the state Jacobians `∂x_l(t)/∂x_l(t−1)
    /// = (1−α)I + α diag(σ'(pre_l(t))) W_l` along the run from the zero state,
    /// washout steps excluded.
    pub fn state_jacobians(&self, inputs: &[Vec<f64>]) -> Result<Vec<Vec<DMatrix<f64>>>> {
        let washout = self.config.washout;
        if inputs.len() <= washout {
            return Err(Error::param("series", format!("length {} does not exceed washout {washout}", inputs.len())));
        }
        self.check_inputs(inputs)?;
        let (a, n) = (self.config.leak_rate, self.config.reservoir_size);
        let act = &self.config.activation;
        let dense: Vec<DMatrix<f64>> = self.recurrent.iter().map(Csr::to_dense).collect();
        let mut out = vec![Vec::with_capacity(inputs.len() - washout); self.config.num_layers];
        let mut state = self.zero_state();
        for (t, u) in inputs.iter().enumerate() {
            let prev = state.clone();
            self.step(&mut state, u);
            if t < washout {
                continue;
            }
            for l in 0..state.len() {
                let mut pre = if l == 0 {
                    &self.input * DVector::from_column_slice(u)
                } else {
                    let mut p = DVector::zeros(n);
                    self.inter[l - 1].mul_add_to(&state[l - 1], &mut p);
                    p
                };
                self.recurrent[l].mul_add_to(&prev[l], &mut pre);
                let mut j = dense[l].clone();
                for (i, mut row) in j.row_iter_mut().enumerate() {
                    row *= a * act.eval_deriv(pre[i]);
                }
                for i in 0..n {
                    j[(i, i)] += 1.0 - a;
                }
                if j.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite(format!("jacobian of layer {l} at step {t}")));
                }
                out[l].push(j);
            }
        }
        Ok(out)
    }

    /// States from the zero initial state with the first `washout` steps dropped.
    pub fn run_states(&self, inputs: &[Vec<f64>]) -> Result<StateTrajectory> {
        let washout = self.config.washout;
        if inputs.len() <= washout {
            return Err(Error::param("series", format!("length {} does not exceed washout {washout}", inputs.len())));
        }
        let full = self.run_from(self.zero_state(), inputs)?;
        Ok(StateTrajectory {
            states: full.states.rows(washout, inputs.len() - washout).into_owned(),
            start: washout,
            ..full
        })
    }
}

/// Ridge solution `W = (XᵀX + λI)⁻¹ XᵀY`.
pub fn fit_readout(features: &DMatrix<f64>, targets: &DMatrix<f64>, lambda: f64) -> Result<DMatrix<f64>> {
    ReadoutSystem::new(features, targets)?.solve(lambda)
}

/// Normal equations of a readout, reusable across ridge values.
#[derive(Debug, Clone)]
pub struct ReadoutSystem {
    gram: DMatrix<f64>,
    cross: DMatrix<f64>,
}

impl ReadoutSystem {
    pub fn new(features: &DMatrix<f64>, targets: &DMatrix<f64>) -> Result<Self> {
        if features.nrows() != targets.nrows() {
            return Err(Error::Dimension {
                expected: features.nrows(),
                actual: targets.nrows(),
                context: "readout targets",
            });
        }
        if features.nrows() == 0 {
            return Err(Error::Empty("readout design matrix"));
        }
        Ok(Self {
            gram: features.tr_mul(features),
            cross: features.tr_mul(targets),
        })
    }

    pub fn solve(&self, lambda: f64) -> Result<DMatrix<f64>> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::param("ridge_lambda", "must be non-negative"));
        }
        let p = self.gram.nrows();
        let mut a = self.gram.clone();
        for i in 0..p {
            a[(i, i)] += lambda;
        }
        let scale = (0..p).map(|i| a[(i, i)]).fold(0.0, f64::max);
        let floor = p as f64 * f64::EPSILON * scale;
        let chol = a.cholesky().ok_or(Error::Singular { lambda })?;
        let l = chol.l_dirty();
        if (0..p).any(|i| l[(i, i)] * l[(i, i)] <= floor) {
            return Err(Error::Singular { lambda });
        }
        let w = chol.solve(&self.cross);
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular { lambda });
        }
        Ok(w)
    }
}

/// `[1, states]`.
fn design(states: &DMatrix<f64>) -> DMatrix<f64> {
    let mut x = DMatrix::from_element(states.nrows(), states.ncols() + 1, 1.0);
    x.columns_mut(1, states.ncols()).copy_from(states);
    x
}

fn target_matrix(series: &[Vec<f64>], rows: Range<usize>) -> DMatrix<f64> {
    let dim = series[0].len();
    DMatrix::from_fn(rows.len(), dim, |i, j| series[rows.start + i][j])
}

fn flat_metrics(pred: &DMatrix<f64>, obs: &DMatrix<f64>) -> MetricReport {
    let p: Vec<f64> = pred.transpose().iter().copied().collect();
    let o: Vec<f64> = obs.transpose().iter().copied().collect();
    metrics(&p, &o)
}

/// Reservoir plus fitted readout.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedEsn {
    pub reservoir: Reservoir,
    /// `(1 + L·N) × D`.
    pub readout: DMatrix<f64>,
    pub training_error: MetricReport,
    /// Number of leading series samples used for training.
    pub train_len: usize,
}

impl TrainedEsn {
    /// Trains on `series[..train_len]`: states for inputs `0..train_len−1`,
    /// targets `1..train_len`, washout rows excluded.
    pub fn fit(config: &DeepEsnConfig, series: &[Vec<f64>], train_len: usize) -> Result<Self> {
        let reservoir = Reservoir::build(config, series.first().ok_or(Error::Empty("series"))?.len())?;
        Self::fit_reservoir(reservoir, series, train_len)
    }

    pub fn fit_reservoir(reservoir: Reservoir, series: &[Vec<f64>], train_len: usize) -> Result<Self> {
        let washout = reservoir.config.washout;
        if train_len > series.len() || train_len < washout + 2 {
            return Err(Error::param(
                "train_len",
                format!("need washout + 2 ≤ train_len ≤ series length, got {train_len}"),
            ));
        }
        let traj = reservoir.run_from(reservoir.zero_state(), &series[..train_len - 1])?;
        let x = design(&traj.states.rows(washout, train_len - 1 - washout).into_owned());
        let y = target_matrix(series, washout + 1..train_len);
        let readout = fit_readout(&x, &y, reservoir.config.ridge_lambda)?;
        let training_error = flat_metrics(&(&x * &readout), &y);
        Ok(Self {
            reservoir,
            readout,
            training_error,
            train_len,
        })
    }

    pub fn fit_split(config: &DeepEsnConfig, series: &[Vec<f64>], split: &ChronoSplit) -> Result<Self> {
        Self::fit(config, series, split.train.end)
    }

    pub fn config(&self) -> &DeepEsnConfig {
        &self.reservoir.config
    }

    /// One-step-ahead predictions with teacher forcing from the zero state.
    /// Row `t` predicts `series[t + 1]`.
    pub fn predict(&self, series: &[Vec<f64>]) -> Result<DMatrix<f64>> {
        if series.len() < 2 {
            return Err(Error::param("series", "need at least two samples"));
        }
        let traj = self.reservoir.run_from(self.reservoir.zero_state(), &series[..series.len() - 1])?;
        Ok(design(&traj.states) * &self.readout)
    }

    /// Metrics over the target indices in `range` (index 0 has no prediction).
    pub fn evaluate(&self, series: &[Vec<f64>], range: Range<usize>) -> Result<MetricReport> {
        let pred = self.predict(series)?;
        range_metrics(&pred, series, range)
    }
}

/// Metrics of a prediction matrix (row `t` ↔ target `t + 1`) over `range`.
pub fn range_metrics(pred: &DMatrix<f64>, series: &[Vec<f64>], range: Range<usize>) -> Result<MetricReport> {
    let start = range.start.max(1);
    if start >= range.end || range.end > series.len() {
        return Err(Error::param("range", format!("{range:?} has no targets in a series of {}", series.len())));
    }
    let p = pred.rows(start - 1, range.end - start).into_owned();
    Ok(flat_metrics(&p, &target_matrix(series, start..range.end)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgePoint {
    pub lambda: f64,
    pub train: MetricReport,
    pub validation: MetricReport,
    pub test: MetricReport,
}

/// Error against ridge strength with one shared reservoir run.
pub fn ridge_sweep(config: &DeepEsnConfig, series: &[Vec<f64>], split: &ChronoSplit, lambdas: &[f64]) -> Result<Vec<RidgePoint>> {
    let reservoir = Reservoir::build(config, series.first().ok_or(Error::Empty("series"))?.len())?;
    let washout = config.washout;
    let train_len = split.train.end;
    if train_len < washout + 2 || split.test.end > series.len() {
        return Err(Error::param("split", "training segment shorter than washout + 2"));
    }
    let traj = reservoir.run_from(reservoir.zero_state(), &series[..series.len() - 1])?;
    let all = design(&traj.states);
    let x = all.rows(washout, train_len - 1 - washout).into_owned();
    let system = ReadoutSystem::new(&x, &target_matrix(series, washout + 1..train_len))?;
    lambdas
        .iter()
        .map(|&lambda| {
            let w = system.solve(lambda)?;
            let pred = &all * &w;
            Ok(RidgePoint {
                lambda,
                train: range_metrics(&pred, series, washout + 1..train_len)?,
                validation: range_metrics(&pred, series, split.validation.clone())?,
                test: range_metrics(&pred, series, split.test.clone())?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnomalyFlag {
    pub index: usize,
    pub predicted: f64,
    pub observed: f64,
    pub error: f64,
    pub threshold: f64,
}

/// Indices where `|predicted − observed| > threshold`. Panics on unequal lengths.
pub fn flag_anomalies(predicted: &[f64], observed: &[f64], threshold: f64) -> Vec<AnomalyFlag> {
    assert_eq!(predicted.len(), observed.len(), "anomaly flagging on unequal lengths");
    predicted
        .iter()
        .zip(observed)
        .enumerate()
        .filter_map(|(index, (&p, &o))| {
            let error = (p - o).abs();
            (error > threshold).then_some(AnomalyFlag {
                index,
                predicted: p,
                observed: o,
                error,
                threshold,
            })
        })
        .collect()
}

/// `time_index,observed,predicted,error,flagged` rows.
pub fn prediction_csv(first_index: usize, predicted: &[f64], observed: &[f64], threshold: f64) -> String {
    let mut out = String::from("time_index,observed,predicted,error,flagged\n");
    for (k, (&p, &o)) in predicted.iter().zip(observed).enumerate() {
        let e = (p - o).abs();
        out.push_str(&format!("{},{o},{p},{e},{}\n", first_index + k, u8::from(e > threshold)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{chrono_split, mackey_glass, MackeyGlassParams};

    fn mg(len: usize) -> Vec<Vec<f64>> {
        let s = mackey_glass::<f64>(&MackeyGlassParams {
            length: len,
            ..Default::default()
        })
        .unwrap();
        s.into_iter().map(|v| vec![v]).collect()
    }

    fn cfg(layers: usize, size: usize) -> DeepEsnConfig {
        DeepEsnConfig {
            num_layers: layers,
            reservoir_size: size,
            seed: 7,
            ..Default::default()
        }
    }

    #[test]
    fn build_is_deterministic_and_structured() {
        let c = cfg(3, 30);
        let a = Reservoir::build(&c, 1).unwrap();
        assert_eq!(a, Reservoir::build(&c, 1).unwrap());
        assert_eq!(a.matrix_count(), 6);
        for l in 0..3 {
            assert!((spectral_radius(&a.recurrent_weights(l)) - 0.9).abs() < 1e-10);
        }
        let shallow = Reservoir::build(&cfg(1, 30), 1).unwrap();
        assert_eq!(shallow.recurrent_weights(0), a.recurrent_weights(0));
    }

    #[test]
    fn size_one_reservoir_is_plus_minus_radius() {
        let r = Reservoir::build(&cfg(1, 1), 1).unwrap();
        assert!((r.recurrent_weights(0)[(0, 0)].abs() - 0.9).abs() < 1e-15);
    }

    #[test]
    fn rejects_invalid_configs() {
        let mut c = cfg(1, 10);
        c.spectral_radius = 1.2;
        assert!(Reservoir::build(&c, 1).is_err());
        c.allow_unstable = true;
        assert!(Reservoir::build(&c, 1).is_ok());
        for f in [
            |c: &mut DeepEsnConfig| c.leak_rate = 0.0,
            |c: &mut DeepEsnConfig| c.num_layers = 0,
            |c: &mut DeepEsnConfig| c.ridge_lambda = -1.0,
            |c: &mut DeepEsnConfig| c.density = 1.5,
        ] {
            let mut c = cfg(1, 10);
            f(&mut c);
            assert!(c.validate().is_err());
        }
    }

    #[test]
    fn zero_input_keeps_tanh_reservoir_at_rest() {
        let r = Reservoir::build(&cfg(2, 20), 1).unwrap();
        let traj = r.run_from(r.zero_state(), &vec![vec![0.0]; 50]).unwrap();
        assert!(traj.states.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn washout_rows_are_dropped() {
        let r = Reservoir::build(&cfg(2, 20), 1).unwrap();
        let series = mg(300);
        let traj = r.run_states(&series).unwrap();
        assert_eq!(traj.len(), 200);
        assert_eq!(traj.start, 100);
        let full = r.run_from(r.zero_state(), &series).unwrap();
        assert_eq!(traj.states.row(0), full.states.row(100));
        assert_eq!(traj.layer(1)[0].len(), 20);
        assert!(r.run_states(&series[..100]).is_err());
    }

    #[test]
    fn readout_hand_solved() {
        // XᵀX = [[3, 3], [3, 5]], Xᵀy = [6, 8], λ = 1: [[4, 3], [3, 6]] w = [6, 8].
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 1.0, 1.0, 2.0]);
        let y = DMatrix::from_row_slice(3, 1, &[1.0, 2.0, 3.0]);
        let w = fit_readout(&x, &y, 1.0).unwrap();
        let (w0, w1) = ((6.0 * 6.0 - 3.0 * 8.0) / 15.0, (4.0 * 8.0 - 3.0 * 6.0) / 15.0);
        assert!((w[0] - w0).abs() < 1e-14 && (w[1] - w1).abs() < 1e-14);
        let exact = fit_readout(&x, &y, 0.0).unwrap();
        assert!(((&x * &exact) - &y).norm() < 1e-12);
        assert!(fit_readout(&x, &y, 1e12).unwrap().norm() < 1e-10);
    }

    #[test]
    fn singular_system_is_reported() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 2.0, 2.0, 3.0, 3.0]);
        let y = DMatrix::from_row_slice(3, 1, &[1.0, 2.0, 3.0]);
        assert!(matches!(fit_readout(&x, &y, 0.0), Err(Error::Singular { .. })));
        assert!(fit_readout(&x, &y, 1e-3).is_ok());
    }

    #[test]
    fn training_error_reproduced_by_predict() {
        let series = mg(600);
        let t = TrainedEsn::fit(&cfg(2, 40), &series, 400).unwrap();
        let again = t.evaluate(&series[..400], 101..400).unwrap();
        assert!((again.rmse - t.training_error.rmse).abs() < 1e-12);
        assert_eq!(again.count, t.training_error.count);
        let pred = t.predict(&series).unwrap();
        assert_eq!(pred, t.predict(&series).unwrap());
    }

    #[test]
    fn beats_the_mean_on_mackey_glass() {
        let series = mg(1000);
        let split = chrono_split(series.len(), 0.7, 0.1, 0.2).unwrap();
        let t = TrainedEsn::fit_split(&cfg(1, 100), &series, &split).unwrap();
        let test = t.evaluate(&series, split.test.clone()).unwrap();
        let vals: Vec<f64> = series.iter().map(|v| v[0]).collect();
        assert!(test.rmse < crate::stats::variance(&vals).sqrt());
    }

    #[test]
    fn constant_series_gives_constant_prediction() {
        let series = vec![vec![0.7]; 400];
        let t = TrainedEsn::fit(&cfg(1, 20), &series, 300).unwrap();
        let pred = t.predict(&series).unwrap();
        for r in 150..399 {
            assert!((pred[(r, 0)] - 0.7).abs() < 1e-6);
        }
    }

    #[test]
    fn ridge_residual_is_monotone() {
        let series = mg(800);
        let split = chrono_split(series.len(), 0.7, 0.1, 0.2).unwrap();
        let lambdas = [0.0, 1e-8, 1e-6, 1e-4, 1e-2, 1.0];
        let pts = ridge_sweep(&cfg(1, 50), &series, &split, &lambdas[1..]).unwrap();
        for w in pts.windows(2) {
            assert!(w[1].train.rmse >= w[0].train.rmse * (1.0 - 1e-12));
        }
        let direct = TrainedEsn::fit_split(
            &DeepEsnConfig {
                ridge_lambda: 1e-4,
                ..cfg(1, 50)
            },
            &series,
            &split,
        )
        .unwrap();
        let val = direct.evaluate(&series, split.validation.clone()).unwrap();
        assert!((val.rmse - pts[2].validation.rmse).abs() < 1e-9);
    }

    #[test]
    fn anomaly_flags() {
        let obs = vec![1.0; 20];
        assert!(flag_anomalies(&obs, &obs, 0.1).is_empty());
        let mut pred = obs.clone();
        pred[7] += 1.0;
        let f = flag_anomalies(&pred, &obs, 0.1);
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].index, 7);
        pred[3] = 1.5;
        assert_eq!(flag_anomalies(&pred, &obs, 0.0).len(), 2);
        let csv = prediction_csv(10, &pred[..2], &obs[..2], 0.1);
        assert_eq!(csv, "time_index,observed,predicted,error,flagged\n10,1,1,0,0\n11,1,1,0,0\n");
    }
    #[test]
    fn state_jacobians_match_finite_differences() {
        let cfg = DeepEsnConfig {
            num_layers: 2,
            reservoir_size: 6,
            leak_rate: 0.7,
            washout: 3,
            density: 0.5,
            seed: 4,
            ..Default::default()
        };
        let r = Reservoir::build(&cfg, 1).unwrap();
        let inputs: Vec<Vec<f64>> = (0..5).map(|t| vec![(t as f64).sin()]).collect();
        let js = r.state_jacobians(&inputs).unwrap();
        assert_eq!(js.len(), 2);
        assert_eq!(js[0].len(), 2);
        // Rebuild the state before the last step and perturb layer 1 only.
        let mut state = r.zero_state();
        for u in &inputs[..4] {
            r.step(&mut state, u);
        }
        let h = 1e-6;
        for k in 0..6 {
            let (mut up, mut down) = (state.clone(), state.clone());
            up[1][k] += h;
            down[1][k] -= h;
            r.step(&mut up, &inputs[4]);
            r.step(&mut down, &inputs[4]);
            for i in 0..6 {
                let fd = (up[1][i] - down[1][i]) / (2.0 * h);
                assert!((js[1][1][(i, k)] - fd).abs() < 1e-7);
            }
        }
    }

}
