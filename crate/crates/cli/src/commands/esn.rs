use edgechaos::data::{load_csv_series, CsvOptions, MultivariateSeries};
use edgechaos::dynamics::recurrence_plot;
use edgechaos::esn::{flag_anomalies, range_metrics, ridge_sweep, DeepEsnConfig, Reservoir, TrainedEsn};
use edgechaos::optim::{evolve_esn, EvolveOptions};
use serde_json::json;

use super::{activation, header_mode, int_range, metric_row, metrics_table, ratios, split_of};
use crate::error::{usage, CliResult};
use crate::output::{real, Cell, Output, Table};
use crate::params::{EsnEvolveParams, EsnPredictParams, EsnTrainParams, ReservoirParams, SeriesParams};

fn load_series(s: &SeriesParams, out: &mut Output) -> CliResult<MultivariateSeries> {
    let data = s.data.as_deref().ok_or_else(|| usage("--data is required"))?;
    let path = out.input(data)?;
    let options = CsvOptions {
        header: header_mode(&s.header)?,
        normalize_train_ratio: if s.normalize { Some(ratios(&s.split)?.0) } else { None },
    };
    let load = load_csv_series(&path, &options)?;
    if !load.rejected.is_empty() {
        let mut table = Table::new(&["line", "reason"]);
        for r in &load.rejected {
            table.push(vec![r.line.into(), r.reason.as_str().into()]);
        }
        out.table("rejected", &table)?;
    }
    Ok(load.series)
}

fn config_of(r: &ReservoirParams, seed: u64) -> CliResult<DeepEsnConfig> {
    Ok(DeepEsnConfig {
        num_layers: r.layers,
        reservoir_size: r.size,
        spectral_radius: r.spectral_radius,
        input_scaling: r.input_scaling,
        leak_rate: r.leak_rate,
        washout: r.washout,
        ridge_lambda: r.ridge,
        density: r.density,
        activation: activation(&r.activation)?,
        seed,
        allow_unstable: r.allow_unstable,
    })
}

/// Comma list of ridge values; `a..b` expands to `a, 10a, …` up to `b`.
pub fn ridge_values(s: &str) -> CliResult<Vec<f64>> {
    let num = |v: &str| {
        v.trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite() && *x >= 0.0)
            .ok_or_else(|| usage(format!("bad ridge value `{v}`")))
    };
    let mut out = Vec::new();
    for item in s.split(',').filter(|i| !i.trim().is_empty()) {
        match item.split_once("..") {
            Some((a, b)) => {
                let (a, b) = (num(a)?, num(b)?);
                if a <= 0.0 || b < a {
                    return Err(usage(format!("ridge decade range needs 0 < a ≤ b, got `{item}`")));
                }
                let (lo, hi) = (a.log10().round() as i32, b.log10().round() as i32);
                out.extend((lo..=hi).map(|k| format!("1e{k}").parse::<f64>().unwrap_or(f64::NAN)));
            }
            None => out.push(num(item)?),
        }
    }
    if out.is_empty() {
        return Err(usage("empty ridge list"));
    }
    Ok(out)
}

fn first_column(m: &nalgebra::DMatrix<f64>) -> Vec<f64> {
    m.column(0).iter().copied().collect()
}

/// Prediction rows for targets `range`, flagged against `threshold`.
fn predictions_table(pred: &[f64], series: &[Vec<f64>], range: std::ops::Range<usize>, threshold: f64) -> Table {
    let mut table = Table::new(&["time_index", "observed", "predicted", "error", "flagged"]);
    let observed: Vec<f64> = series[range.clone()].iter().map(|r| r[0]).collect();
    let predicted = &pred[range.start - 1..range.end - 1];
    let flagged = flag_anomalies(predicted, &observed, threshold);
    let mut next = flagged.iter().map(|f| f.index).peekable();
    for (k, (&p, &o)) in predicted.iter().zip(&observed).enumerate() {
        let hit = next.next_if_eq(&k).is_some();
        table.push(vec![(range.start + k).into(), o.into(), p.into(), (p - o).abs().into(), hit.into()]);
    }
    table
}

pub fn train(p: &EsnTrainParams, out: &mut Output) -> CliResult<()> {
    let series = load_series(&p.series, out)?.values;
    let split = split_of(series.len(), &p.series.split)?;
    let config = config_of(&p.reservoir, p.seed)?;
    let model = TrainedEsn::fit_split(&config, &series, &split)?;
    model.save(&out.path("model.json"))?;
    out.register("model.json");
    out.register("model.bin");

    let pred = model.predict(&series)?;
    let train_range = (config.washout + 1).min(split.train.end)..split.train.end;
    let train_m = range_metrics(&pred, &series, train_range)?;
    let val_m = range_metrics(&pred, &series, split.validation.clone())?;
    let test_m = range_metrics(&pred, &series, split.test.clone())?;
    let mut metrics = metrics_table();
    metrics.push(metric_row("train", &train_m));
    metrics.push(metric_row("validation", &val_m));
    metrics.push(metric_row("test", &test_m));
    out.table("metrics", &metrics)?;

    let threshold = p.anomaly_factor * val_m.rmse;
    let test_range = split.test.start.max(1)..split.test.end;
    let table = predictions_table(&first_column(&pred), &series, test_range, threshold);
    out.table("predictions", &table)?;

    if let Some(spec) = &p.sweep_ridge {
        let lambdas = ridge_values(spec)?;
        let mut table = Table::new(&["lambda", "train_rmse", "validation_rmse", "test_rmse", "test_mae", "singular"]);
        for lambda in lambdas {
            match ridge_sweep(&config, &series, &split, &[lambda]) {
                Ok(points) => {
                    let pt = &points[0];
                    table.push(vec![
                        lambda.into(),
                        pt.train.rmse.into(),
                        pt.validation.rmse.into(),
                        pt.test.rmse.into(),
                        pt.test.mae.into(),
                        false.into(),
                    ]);
                }
                Err(edgechaos::Error::Singular { .. }) => {
                    table.push(vec![lambda.into(), Cell::Missing, Cell::Missing, Cell::Missing, Cell::Missing, true.into()]);
                }
                Err(e) => return Err(e.into()),
            }
        }
        out.table("ridge", &table)?;
    }

    out.json(
        "summary.json",
        &json!({
            "samples": series.len(),
            "split": {"train": split.train.len(), "validation": split.validation.len(), "test": split.test.len()},
            "anomaly_threshold": real(threshold),
            "test_rmse": real(test_m.rmse),
        }),
    )
}

pub fn predict(p: &EsnPredictParams, out: &mut Output) -> CliResult<()> {
    let model_file = p.model.as_deref().ok_or_else(|| usage("--model is required"))?;
    let model_path = out.input(model_file)?;
    if let Some(s) = model_path.with_extension("bin").to_str() {
        out.input(s)?;
    }
    let model = TrainedEsn::load(&model_path)?;
    let series = load_series(
        &SeriesParams {
            data: p.data.clone(),
            header: p.header.clone(),
            ..Default::default()
        },
        out,
    )?
    .values;
    let pred = model.predict(&series)?;
    let threshold = p.threshold.unwrap_or(p.anomaly_factor * model.training_error.rmse);
    let all = 1..series.len();
    let mut metrics = metrics_table();
    metrics.push(metric_row("all", &range_metrics(&pred, &series, all.clone())?));
    out.table("metrics", &metrics)?;
    out.table("predictions", &predictions_table(&first_column(&pred), &series, all, threshold))?;
    Ok(())
}

pub fn evolve(p: &EsnEvolveParams, out: &mut Output) -> CliResult<()> {
    let series = load_series(&p.series, out)?.values;
    let split = split_of(series.len(), &p.series.split)?;
    let template = config_of(&p.reservoir, p.seed)?;
    let s = &p.search;
    let options = EvolveOptions {
        depth: int_range("depth", &s.depth)?,
        width: int_range("width", &s.width)?,
        budget: s.budget,
        population: s.population,
        seed: p.seed,
        snapshot_steps: s.snapshot_steps,
        epsilon_fraction: s.epsilon_fraction,
        include_template: s.include_template,
        ..Default::default()
    };
    let result = evolve_esn(&series, &split, &template, &options)?;

    let mut history = Table::new(&["generation", "best_fitness", "depth", "width"]);
    for h in &result.optim.history {
        let depth = h.best_position.first().map(|&d| d as usize);
        let width = h.best_position.get(1).map(|&w| w as usize);
        history.push(vec![h.generation.into(), h.best_fitness.into(), depth.into(), width.into()]);
    }
    out.table("history", &history)?;

    let mut snaps = Table::new(&["generation", "depth", "width", "fitness", "epsilon", "recurrence_rate"]);
    for sn in &result.snapshots {
        snaps.push(vec![
            sn.generation.into(),
            sn.depth.into(),
            sn.width.into(),
            sn.fitness.into(),
            sn.epsilon.into(),
            sn.recurrence_rate.into(),
        ]);
        let config = DeepEsnConfig {
            num_layers: sn.depth,
            reservoir_size: sn.width,
            ..template.clone()
        };
        let reservoir = Reservoir::build(&config, series[0].len())?;
        let take = (config.washout + options.snapshot_steps).min(series.len());
        let states = reservoir.run_states(&series[..take])?.rows();
        let rp = recurrence_plot(&states, sn.epsilon)?;
        out.bytes(&format!("rp/gen_{:03}.pgm", sn.generation), &rp.to_pgm())?;
    }
    out.table("snapshots", &snaps)?;

    let mut evaluated = Table::new(&["depth", "width", "fitness"]);
    for &((d, w), f) in &result.evaluated {
        evaluated.push(vec![d.into(), w.into(), Cell::Num(f)]);
    }
    out.table("evaluated", &evaluated)?;

    let best = TrainedEsn::fit_split(&result.best, &series, &split)?;
    let pred = best.predict(&series)?;
    let mut metrics = metrics_table();
    let train_range = (result.best.washout + 1).min(split.train.end)..split.train.end;
    metrics.push(metric_row("train", &range_metrics(&pred, &series, train_range)?));
    metrics.push(metric_row("validation", &range_metrics(&pred, &series, split.validation.clone())?));
    metrics.push(metric_row("test", &range_metrics(&pred, &series, split.test.clone())?));
    out.table("metrics", &metrics)?;
    out.json(
        "best_config.json",
        &serde_json::to_value(&result.best).map_err(|e| crate::error::CliError::Internal(e.to_string()))?,
    )?;
    Ok(())
}
