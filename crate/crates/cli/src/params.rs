//! Command-line flags and their resolved parameter sets.
//!
//! Every flag is optional; resolution overlays flags on a JSON config file on
//! the defaults, so the resolved set is exactly what the manifest stores.

use clap::{Args, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{usage, CliResult};

macro_rules! flags {
    ($(#[$meta:meta])* $name:ident { $($(#[$fmeta:meta])* $field:ident : $ty:ty),* $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Default, Args, Serialize)]
        pub struct $name {
            $(
                $(#[$fmeta])*
                #[arg(long)]
                #[serde(skip_serializing_if = "Option::is_none")]
                pub $field: Option<$ty>,
            )*
        }
    };
}

// ---- spectra ----

flags!(SpectraArgs {
    /// Activation spec, e.g. `sigmoid`, `rbf:c=1,s=1`, `hp:max=0.62,min=0.4,gap=0.13,n=3`.
    activation: String,
    /// Highest Hermite order.
    order: usize,
    /// Gauss–Hermite node count.
    quad_points: usize,
});

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectraParams {
    pub activation: String,
    pub order: usize,
    pub quad_points: Option<usize>,
}

impl Default for SpectraParams {
    fn default() -> Self {
        Self {
            activation: "sigmoid".into(),
            order: 10,
            quad_points: None,
        }
    }
}

// ---- design ----

flags!(DesignArgs {
    max: f64,
    min: f64,
    gap: f64,
    n: usize,
    /// consecutive, odd or even.
    layout: String,
});

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesignParams {
    pub max: f64,
    pub min: f64,
    pub gap: f64,
    pub n: usize,
    pub layout: String,
}

impl Default for DesignParams {
    fn default() -> Self {
        Self {
            max: 0.62,
            min: 0.40,
            gap: 0.13,
            n: 3,
            layout: "consecutive".into(),
        }
    }
}

// ---- criticality ----

flags!(CriticalityArgs {
    /// Network spec JSON.
    net: String,
    /// Trained ESN model JSON.
    model: String,
    /// Series CSV driving the model.
    data: String,
    /// iterate, random or auto.
    trajectory: String,
    steps: usize,
    epsilon_fraction: f64,
    edge_tolerance: f64,
    #[arg(action = clap::ArgAction::Set)]
    svd_fallback: bool,
});

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CriticalityParams {
    pub net: Option<String>,
    pub model: Option<String>,
    pub data: Option<String>,
    pub trajectory: String,
    pub steps: usize,
    pub epsilon_fraction: f64,
    pub edge_tolerance: f64,
    pub svd_fallback: bool,
    pub seed: u64,
}

impl Default for CriticalityParams {
    fn default() -> Self {
        Self {
            net: None,
            model: None,
            data: None,
            trajectory: "auto".into(),
            steps: 200,
            epsilon_fraction: edgechaos::dynamics::DEFAULT_EPSILON_FRACTION,
            edge_tolerance: edgechaos::dynamics::DEFAULT_EDGE_TOLERANCE,
            svd_fallback: false,
            seed: 0,
        }
    }
}

// ---- esn ----

flags!(SeriesArgs {
    /// Series CSV, one column per variable.
    data: String,
    /// auto, present or absent.
    header: String,
    /// Standardise with training-segment statistics.
    #[arg(action = clap::ArgAction::Set)]
    normalize: bool,
    /// train:validation:test ratios.
    split: String,
});

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeriesParams {
    pub data: Option<String>,
    pub header: String,
    pub normalize: bool,
    pub split: String,
}

impl Default for SeriesParams {
    fn default() -> Self {
        Self {
            data: None,
            header: "auto".into(),
            normalize: false,
            split: "0.7:0.1:0.2".into(),
        }
    }
}

flags!(ReservoirArgs {
    layers: usize,
    size: usize,
    spectral_radius: f64,
    input_scaling: f64,
    leak_rate: f64,
    washout: usize,
    ridge: f64,
    density: f64,
    activation: String,
    #[arg(action = clap::ArgAction::Set)]
    allow_unstable: bool,
});

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReservoirParams {
    pub layers: usize,
    pub size: usize,
    pub spectral_radius: f64,
    pub input_scaling: f64,
    pub leak_rate: f64,
    pub washout: usize,
    pub ridge: f64,
    pub density: f64,
    pub activation: String,
    pub allow_unstable: bool,
}

impl Default for ReservoirParams {
    fn default() -> Self {
        let d = edgechaos::esn::DeepEsnConfig::default();
        Self {
            layers: d.num_layers,
            size: d.reservoir_size,
            spectral_radius: d.spectral_radius,
            input_scaling: d.input_scaling,
            leak_rate: d.leak_rate,
            washout: d.washout,
            ridge: d.ridge_lambda,
            density: d.density,
            activation: d.activation.spec_string(),
            allow_unstable: d.allow_unstable,
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct EsnTrainArgs {
    #[command(flatten)]
    pub series: SeriesArgs,
    #[command(flatten)]
    pub reservoir: ReservoirArgs,
    /// Ridge values to sweep: comma list; `a..b` expands to decades.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_ridge: Option<String>,
    /// Anomaly threshold as a multiple of the validation RMSE.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anomaly_factor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EsnTrainParams {
    pub series: SeriesParams,
    pub reservoir: ReservoirParams,
    pub sweep_ridge: Option<String>,
    pub anomaly_factor: f64,
    pub seed: u64,
}

impl Default for EsnTrainParams {
    fn default() -> Self {
        Self {
            series: SeriesParams::default(),
            reservoir: ReservoirParams::default(),
            sweep_ridge: None,
            anomaly_factor: edgechaos::esn::ANOMALY_RMSE_FACTOR,
            seed: 0,
        }
    }
}

flags!(EsnPredictArgs {
    model: String,
    data: String,
    header: String,
    /// Absolute anomaly threshold; otherwise `anomaly_factor` times the training RMSE.
    threshold: f64,
    anomaly_factor: f64,
});

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EsnPredictParams {
    pub model: Option<String>,
    pub data: Option<String>,
    pub header: String,
    pub threshold: Option<f64>,
    pub anomaly_factor: f64,
}

impl Default for EsnPredictParams {
    fn default() -> Self {
        Self {
            model: None,
            data: None,
            header: "auto".into(),
            threshold: None,
            anomaly_factor: edgechaos::esn::ANOMALY_RMSE_FACTOR,
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct EsnEvolveArgs {
    #[command(flatten)]
    pub series: SeriesArgs,
    #[command(flatten)]
    pub reservoir: ReservoirArgs,
    #[command(flatten)]
    pub search: SearchArgs,
}

flags!(SearchArgs {
    /// Inclusive depth range `lo..hi`.
    depth: String,
    /// Inclusive width range `lo..hi`.
    width: String,
    budget: usize,
    population: usize,
    #[arg(action = clap::ArgAction::Set)]
    include_template: bool,
    snapshot_steps: usize,
    epsilon_fraction: f64,
});

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchParams {
    pub depth: String,
    pub width: String,
    pub budget: usize,
    pub population: usize,
    pub include_template: bool,
    pub snapshot_steps: usize,
    pub epsilon_fraction: f64,
}

impl Default for SearchParams {
    fn default() -> Self {
        let d = edgechaos::optim::EvolveOptions::default();
        Self {
            depth: format!("{}..{}", d.depth.0, d.depth.1),
            width: format!("{}..{}", d.width.0, d.width.1),
            budget: d.budget,
            population: d.population,
            include_template: d.include_template,
            snapshot_steps: d.snapshot_steps,
            epsilon_fraction: d.epsilon_fraction,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EsnEvolveParams {
    pub series: SeriesParams,
    pub reservoir: ReservoirParams,
    pub search: SearchParams,
    pub seed: u64,
}

// ---- mlp ----

flags!(TaskArgs {
    /// moons, blobs, csv or idx.
    dataset: String,
    n: usize,
    noise: f64,
    classes: usize,
    dim: usize,
    separation: f64,
    /// CSV of features with the label in the last column.
    data: String,
    images: String,
    labels: String,
    downsample: usize,
    data_seed: u64,
});

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskParams {
    pub dataset: String,
    pub n: usize,
    pub noise: f64,
    pub classes: usize,
    pub dim: usize,
    pub separation: f64,
    pub data: Option<String>,
    pub images: Option<String>,
    pub labels: Option<String>,
    pub downsample: usize,
    pub data_seed: u64,
}

impl Default for TaskParams {
    fn default() -> Self {
        Self {
            dataset: "moons".into(),
            n: 512,
            noise: 0.2,
            classes: 3,
            dim: 2,
            separation: 2.0,
            data: None,
            images: None,
            labels: None,
            downsample: 4,
            data_seed: 0,
        }
    }
}

flags!(ModelArgs {
    /// Hidden widths, comma separated.
    #[arg(value_delimiter = ',')]
    hidden: Vec<usize>,
    activation: String,
    /// Activation file written by `design`.
    activation_file: String,
    lr: f64,
    batch: usize,
    epochs: usize,
    /// cross-entropy or squared-error.
    loss: String,
    probe: usize,
});

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    pub hidden: Vec<usize>,
    pub activation: String,
    pub activation_file: Option<String>,
    pub lr: f64,
    pub batch: usize,
    pub epochs: usize,
    pub loss: String,
    pub probe: usize,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            hidden: vec![64; 4],
            activation: "hp".into(),
            activation_file: None,
            lr: 0.05,
            batch: 32,
            epochs: 40,
            loss: "cross-entropy".into(),
            probe: 32,
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct MlpTrainArgs {
    #[command(flatten)]
    pub task: TaskArgs,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MlpTrainParams {
    pub task: TaskParams,
    pub model: ModelParams,
    pub seed: u64,
}

flags!(SweepArgs {
    /// max-coeff, min-coeff, gap, batch or lr.
    param: String,
    /// `start:stop:step`, inclusive.
    range: String,
    /// Explicit values, comma separated.
    #[arg(value_delimiter = ',')]
    values: Vec<f64>,
    /// Base profile for coefficient sweeps.
    max: f64,
    min: f64,
    gap: f64,
    terms: usize,
});

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepParams {
    pub param: String,
    pub range: Option<String>,
    pub values: Option<Vec<f64>>,
    pub max: f64,
    pub min: f64,
    pub gap: f64,
    pub terms: usize,
}

impl Default for SweepParams {
    fn default() -> Self {
        let d = DesignParams::default();
        Self {
            param: "max-coeff".into(),
            range: None,
            values: None,
            max: d.max,
            min: d.min,
            gap: d.gap,
            terms: d.n,
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct MlpSweepArgs {
    #[command(flatten)]
    pub task: TaskArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub sweep: SweepArgs,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MlpSweepParams {
    pub task: TaskParams,
    pub model: ModelParams,
    pub sweep: SweepParams,
    pub seed: u64,
}

// ---- datagen ----

flags!(MackeyGlassArgs {
    length: usize,
    tau: f64,
    beta: f64,
    gamma: f64,
    exponent: f64,
    dt: f64,
    sample_every: usize,
    discard: usize,
    initial: f64,
    history_jitter: f64,
});

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MackeyGlassGenParams {
    pub length: usize,
    pub tau: f64,
    pub beta: f64,
    pub gamma: f64,
    pub exponent: f64,
    pub dt: f64,
    pub sample_every: usize,
    pub discard: usize,
    pub initial: f64,
    pub history_jitter: f64,
    pub seed: u64,
}

impl Default for MackeyGlassGenParams {
    fn default() -> Self {
        let d = edgechaos::data::MackeyGlassParams::default();
        Self {
            length: d.length,
            tau: d.tau,
            beta: d.beta,
            gamma: d.gamma,
            exponent: d.n,
            dt: d.dt,
            sample_every: d.sample_every,
            discard: d.discard,
            initial: d.initial,
            history_jitter: d.history_jitter,
            seed: d.seed,
        }
    }
}

flags!(BlobsArgs {
    n: usize,
    classes: usize,
    dim: usize,
    separation: f64,
    #[arg(action = clap::ArgAction::Set)]
    standardize: bool,
});

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlobsParams {
    pub n: usize,
    pub classes: usize,
    pub dim: usize,
    pub separation: f64,
    pub standardize: bool,
    pub seed: u64,
}

impl Default for BlobsParams {
    fn default() -> Self {
        Self {
            n: 512,
            classes: 3,
            dim: 2,
            separation: 2.0,
            standardize: true,
            seed: 0,
        }
    }
}

flags!(MoonsArgs { n: usize, noise: f64 });

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MoonsParams {
    pub n: usize,
    pub noise: f64,
    pub seed: u64,
}

impl Default for MoonsParams {
    fn default() -> Self {
        Self {
            n: 512,
            noise: 0.2,
            seed: 0,
        }
    }
}

flags!(IdxFixtureArgs {
    count: usize,
    rows: usize,
    cols: usize,
    classes: usize,
});

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdxFixtureParams {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub classes: usize,
    pub seed: u64,
}

impl Default for IdxFixtureParams {
    fn default() -> Self {
        Self {
            count: 200,
            rows: 28,
            cols: 28,
            classes: 10,
            seed: 0,
        }
    }
}

// ---- command tree ----

#[derive(Debug, Subcommand)]
pub enum EsnCommand {
    /// Fit a deep ESN and report split metrics, predictions and anomalies.
    Train(EsnTrainArgs),
    /// One-step predictions of a saved model.
    Predict(EsnPredictArgs),
    /// Evolve depth and width with the swarm optimiser.
    Evolve(EsnEvolveArgs),
}

#[derive(Debug, Subcommand)]
pub enum MlpCommand {
    /// Train one network, after a gradient check.
    Train(MlpTrainArgs),
    /// Train one network per parameter value.
    Sweep(MlpSweepArgs),
}

#[derive(Debug, Subcommand)]
pub enum DatagenCommand {
    /// Mackey-Glass delay series.
    MackeyGlass(MackeyGlassArgs),
    /// Gaussian class clusters.
    Blobs(BlobsArgs),
    /// Two interleaved half circles.
    Moons(MoonsArgs),
    /// Small synthetic IDX image and label files.
    IdxFixture(IdxFixtureArgs),
}

/// A resolved run, as stored in manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "params", rename_all = "kebab-case")]
pub enum Job {
    Spectra(SpectraParams),
    Design(DesignParams),
    Criticality(CriticalityParams),
    EsnTrain(EsnTrainParams),
    EsnPredict(EsnPredictParams),
    EsnEvolve(EsnEvolveParams),
    MlpTrain(MlpTrainParams),
    MlpSweep(MlpSweepParams),
    DatagenMackeyGlass(MackeyGlassGenParams),
    DatagenBlobs(BlobsParams),
    DatagenMoons(MoonsParams),
    DatagenIdxFixture(IdxFixtureParams),
}

fn overlay(base: &mut Value, top: &Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            for (k, v) in t {
                match b.get_mut(k) {
                    Some(slot) if slot.is_object() && v.is_object() => overlay(slot, v),
                    _ => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (b, t) => *b = t.clone(),
    }
}

/// Defaults, then `file`, then `flags`, then the global seed.
pub fn resolve<P, A>(flags: &A, file: Option<&Value>, seed: Option<u64>) -> CliResult<P>
where
    P: Default + Serialize + DeserializeOwned,
    A: Serialize,
{
    let mut value = serde_json::to_value(P::default()).map_err(|e| usage(e.to_string()))?;
    if let Some(file) = file {
        if !file.is_object() {
            return Err(usage("config file must hold a JSON object"));
        }
        overlay(&mut value, file);
    }
    overlay(&mut value, &serde_json::to_value(flags).map_err(|e| usage(e.to_string()))?);
    if let Some(seed) = seed {
        if let Value::Object(map) = &mut value {
            if map.contains_key("seed") {
                map.insert("seed".into(), Value::from(seed));
            }
        }
    }
    serde_json::from_value(value).map_err(|e| usage(format!("invalid parameters: {e}")))
}

pub fn job_value(job: &Job) -> Value {
    serde_json::to_value(job).unwrap_or_else(|_| Value::Object(Map::new()))
}
