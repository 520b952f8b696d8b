use edgechaos::activations::{synthesize_hp, HpDesignProfile};
use edgechaos::data::{blobs, load_csv_series, load_idx, two_moons, ClassificationData, CsvOptions};
use edgechaos::dynamics::{epsilon_from_fraction, recurrence_plot, DEFAULT_EPSILON_FRACTION};
use edgechaos::mlp::{self, Loss, MlpConfig, TrainingTrace};
use edgechaos::Activation;
use serde_json::json;

use super::activation;
use super::design::read_activation_file;
use crate::error::{usage, CliError, CliResult};
use crate::output::{real, Output, Table};
use crate::params::{ModelParams, MlpSweepParams, MlpTrainParams, TaskParams};

/// Relative error above which training is refused.
pub const GRADIENT_TOLERANCE: f64 = 1e-4;
const GRADIENT_SAMPLES: usize = 16;

fn dataset(t: &TaskParams, out: &mut Output) -> CliResult<ClassificationData> {
    let data = match t.dataset.as_str() {
        "moons" => two_moons(t.n, t.noise, t.data_seed)?,
        "blobs" => {
            let mut d = blobs(t.n, t.classes, t.dim, t.separation, t.data_seed)?;
            d.standardize();
            d
        }
        "csv" => {
            let file = t.data.as_deref().ok_or_else(|| usage("dataset csv needs --data"))?;
            let path = out.input(file)?;
            let series = load_csv_series(&path, &CsvOptions::default())?.series;
            if series.dim() < 2 {
                return Err(usage("csv dataset needs features and a label column"));
            }
            let mut inputs = Vec::with_capacity(series.len());
            let mut labels = Vec::with_capacity(series.len());
            for row in &series.values {
                let (x, y) = row.split_at(row.len() - 1);
                if y[0] < 0.0 || y[0].fract() != 0.0 {
                    return Err(usage(format!("label {} is not a class index", y[0])));
                }
                inputs.push(x.to_vec());
                labels.push(y[0] as usize);
            }
            let classes = labels.iter().max().map_or(0, |m| m + 1);
            ClassificationData { inputs, labels, classes }
        }
        "idx" => {
            let images = t.images.as_deref().ok_or_else(|| usage("dataset idx needs --images"))?;
            let labels = t.labels.as_deref().ok_or_else(|| usage("dataset idx needs --labels"))?;
            let (ip, lp) = (out.input(images)?, out.input(labels)?);
            let set = load_idx(&ip, &lp, t.downsample)?;
            let labels: Vec<usize> = set.labels.iter().map(|&l| l as usize).collect();
            let classes = labels.iter().max().map_or(0, |m| m + 1);
            ClassificationData {
                inputs: set.features,
                labels,
                classes,
            }
        }
        other => return Err(usage(format!("dataset must be moons, blobs, csv or idx, got `{other}`"))),
    };
    Ok(data)
}

fn loss_of(s: &str) -> CliResult<Loss> {
    serde_json::from_value(json!(s)).map_err(|_| usage(format!("loss must be cross-entropy or squared-error, got `{s}`")))
}

fn base_activation(m: &ModelParams, out: &mut Output) -> CliResult<(Activation, Option<HpDesignProfile>)> {
    match &m.activation_file {
        Some(file) => {
            let path = out.input(file)?;
            read_activation_file(&path)
        }
        None => Ok((activation(&m.activation)?, None)),
    }
}

fn config_of(m: &ModelParams, act: Activation, seed: u64) -> CliResult<MlpConfig> {
    let config = MlpConfig {
        hidden: m.hidden.clone(),
        activation: act,
        learning_rate: m.lr,
        batch_size: m.batch,
        epochs: m.epochs,
        seed,
        loss: loss_of(&m.loss)?,
        probe_size: m.probe,
    };
    config.validate()?;
    Ok(config)
}

/// Recurrence of the per-epoch probe states; `None` below two epochs.
fn recurrence(trace: &TrainingTrace) -> CliResult<Option<(f64, f64, Vec<u8>)>> {
    let states = trace.hidden_trajectory();
    if states.len() < 2 {
        return Ok(None);
    }
    let eps = epsilon_from_fraction(&states, DEFAULT_EPSILON_FRACTION)?;
    let rp = recurrence_plot(&states, eps)?;
    Ok(Some((eps, rp.recurrence_rate, rp.to_pgm())))
}

fn trace_table(trace: &TrainingTrace) -> Table {
    let mut table = Table::new(&["epoch", "loss"]);
    for (e, &l) in trace.losses.iter().enumerate() {
        table.push(vec![(e + 1).into(), l.into()]);
    }
    table
}

pub fn train(p: &MlpTrainParams, out: &mut Output) -> CliResult<()> {
    let data = dataset(&p.task, out)?;
    let (act, _) = base_activation(&p.model, out)?;
    let config = config_of(&p.model, act, p.seed)?;
    let gradient_error = if config.activation.kind().is_kinked() {
        None
    } else {
        let indices: Vec<usize> = (0..data.len().min(GRADIENT_SAMPLES)).collect();
        let err = mlp::gradient_check(&config, &data, &indices)?;
        if err > GRADIENT_TOLERANCE {
            return Err(CliError::Internal(format!(
                "gradient check failed: relative error {err:e} exceeds {GRADIENT_TOLERANCE:e}"
            )));
        }
        Some(err)
    };
    let (trace, _) = mlp::train_model(&config, &data)?;
    let rp = recurrence(&trace)?;
    out.table("trace", &trace_table(&trace))?;
    if let Some((_, _, pgm)) = &rp {
        out.bytes("hidden_rp.pgm", pgm)?;
    }
    out.json(
        "summary.json",
        &json!({
            "activation": config.activation.spec_string(),
            "samples": data.len(),
            "classes": data.classes,
            "gradient_check": gradient_error.map(real),
            "initial_loss": real(trace.initial_loss),
            "final_loss": real(trace.final_loss()),
            "final_accuracy": real(trace.final_accuracy),
            "roughness": real(trace.roughness()),
            "hidden_recurrence": rp.map(|(eps, rate, _)| json!({"epsilon": real(eps), "rate": real(rate)})),
        }),
    )
}

/// Inclusive `start:stop:step`, each value rounded to 1e-9.
pub fn range_values(s: &str) -> CliResult<Vec<f64>> {
    let parts = s
        .split(':')
        .map(|v| v.trim().parse::<f64>().map_err(|_| usage(format!("bad range `{s}`"))))
        .collect::<CliResult<Vec<_>>>()?;
    let [start, stop, step] = parts[..] else {
        return Err(usage(format!("range must be start:stop:step, got `{s}`")));
    };
    if !(step > 0.0 && stop >= start && start.is_finite() && stop.is_finite()) {
        return Err(usage(format!("range needs step > 0 and stop ≥ start, got `{s}`")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
        .collect())
}

pub fn sweep(p: &MlpSweepParams, out: &mut Output) -> CliResult<()> {
    let data = dataset(&p.task, out)?;
    let (act, file_profile) = base_activation(&p.model, out)?;
    let s = &p.sweep;
    let values = match (&s.range, &s.values) {
        (Some(r), None) => range_values(r)?,
        (None, Some(v)) if !v.is_empty() => v.clone(),
        (Some(_), Some(_)) => return Err(usage("give either --range or --values")),
        _ => return Err(usage("need --range or --values")),
    };
    let base_profile = file_profile.unwrap_or(HpDesignProfile {
        max_coeff: s.max,
        min_coeff: s.min,
        spacing: s.gap,
        num_terms: s.terms,
        ..Default::default()
    });
    let configs = values
        .iter()
        .map(|&v| {
            let mut m = p.model.clone();
            let mut profile = base_profile;
            let act = match s.param.as_str() {
                "max-coeff" | "min-coeff" | "gap" => {
                    match s.param.as_str() {
                        "max-coeff" => profile.max_coeff = v,
                        "min-coeff" => profile.min_coeff = v,
                        _ => profile.spacing = v,
                    }
                    synthesize_hp(&profile)?
                }
                "batch" => {
                    if v < 1.0 || v.fract() != 0.0 {
                        return Err(usage(format!("batch size {v} is not a positive integer")));
                    }
                    m.batch = v as usize;
                    act.clone()
                }
                "lr" => {
                    m.lr = v;
                    act.clone()
                }
                other => {
                    return Err(usage(format!(
                        "param must be max-coeff, min-coeff, gap, batch or lr, got `{other}`"
                    )))
                }
            };
            Ok((v, config_of(&m, act, p.seed)?))
        })
        .collect::<CliResult<Vec<_>>>()?;

    let result = mlp::sweep(&configs, &data)?;
    let mut rows = Table::new(&[
        "config_id",
        "param_value",
        "final_loss",
        "epochs_to_threshold",
        "diverged",
        "roughness",
        "recurrence_rate",
    ]);
    let mut traces = Table::new(&["config_id", "epoch", "loss"]);
    for (row, trace) in result.rows.iter().zip(&result.traces) {
        let (roughness, rate) = match trace {
            Some(t) => (Some(t.roughness()), recurrence(t)?.map(|r| r.1)),
            None => (None, None),
        };
        rows.push(vec![
            row.config_id.into(),
            row.param_value.into(),
            row.final_loss.into(),
            row.epochs_to_threshold.into(),
            row.diverged.into(),
            roughness.into(),
            rate.into(),
        ]);
        if let Some(t) = trace {
            for (e, &l) in t.losses.iter().enumerate() {
                traces.push(vec![row.config_id.into(), (e + 1).into(), l.into()]);
            }
        }
    }
    out.table("sweep", &rows)?;
    out.table("traces", &traces)?;
    out.json(
        "summary.json",
        &json!({
            "param": s.param,
            "values": values,
            "threshold": result.threshold.map(real),
            "argmin": result.argmin(),
            "diverged": result.rows.iter().filter(|r| r.diverged).count(),
        }),
    )
}
