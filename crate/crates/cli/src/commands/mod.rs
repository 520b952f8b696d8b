mod criticality;
mod datagen;
mod design;
mod esn;
mod mlp;
mod spectra;

use edgechaos::data::{chrono_split, ChronoSplit, HeaderMode, MetricReport};
use edgechaos::Activation;

use crate::error::{usage, CliResult};
use crate::output::{Cell, Output, Table};
use crate::params::Job;

pub fn run(job: &Job, out: &mut Output) -> CliResult<()> {
    match job {
        Job::Spectra(p) => spectra::run(p, out),
        Job::Design(p) => design::run(p, out),
        Job::Criticality(p) => criticality::run(p, out),
        Job::EsnTrain(p) => esn::train(p, out),
        Job::EsnPredict(p) => esn::predict(p, out),
        Job::EsnEvolve(p) => esn::evolve(p, out),
        Job::MlpTrain(p) => mlp::train(p, out),
        Job::MlpSweep(p) => mlp::sweep(p, out),
        Job::DatagenMackeyGlass(p) => datagen::mackey_glass(p, out),
        Job::DatagenBlobs(p) => datagen::blobs(p, out),
        Job::DatagenMoons(p) => datagen::moons(p, out),
        Job::DatagenIdxFixture(p) => datagen::idx_fixture(p, out),
    }
}

pub(crate) fn activation(spec: &str) -> CliResult<Activation> {
    spec.parse().map_err(|e: edgechaos::Error| usage(e.to_string()))
}

pub(crate) fn header_mode(s: &str) -> CliResult<HeaderMode> {
    match s {
        "auto" => Ok(HeaderMode::Auto),
        "present" => Ok(HeaderMode::Present),
        "absent" => Ok(HeaderMode::Absent),
        _ => Err(usage(format!("header must be auto, present or absent, got `{s}`"))),
    }
}

/// `"0.7:0.1:0.2"` as three ratios.
pub(crate) fn ratios(s: &str) -> CliResult<(f64, f64, f64)> {
    let parts = s
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| usage(format!("bad split `{s}`"))))
        .collect::<CliResult<Vec<f64>>>()?;
    match parts[..] {
        [a, b, c] => Ok((a, b, c)),
        _ => Err(usage(format!("split needs three ratios, got `{s}`"))),
    }
}

pub(crate) fn split_of(len: usize, spec: &str) -> CliResult<ChronoSplit> {
    let (a, b, c) = ratios(spec)?;
    Ok(chrono_split(len, a, b, c)?)
}

/// `"lo..hi"`, inclusive.
pub(crate) fn int_range(name: &str, s: &str) -> CliResult<(usize, usize)> {
    let (lo, hi) = s
        .split_once("..")
        .ok_or_else(|| usage(format!("{name} must look like lo..hi, got `{s}`")))?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|_| usage(format!("bad {name} bound `{v}`")));
    Ok((parse(lo)?, parse(hi)?))
}

pub(crate) fn metric_row(split: &str, m: &MetricReport) -> Vec<Cell> {
    vec![split.into(), m.mae.into(), m.rmse.into(), m.mape.into(), m.count.into()]
}

pub(crate) fn metrics_table() -> Table {
    Table::new(&["split", "mae", "rmse", "mape", "count"])
}
