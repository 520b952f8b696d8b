use edgechaos::data::{load_csv_series, CsvOptions};
use edgechaos::dynamics::{
    epsilon_from_fraction, lyapunov, lyapunov_from_jacobians, recurrence_plot, CriticalityReport, LyapunovOptions, NetSpec,
    RecurrencePlot,
};
use edgechaos::esn::TrainedEsn;
use edgechaos::Net;
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde_json::{json, Value};

use crate::error::{usage, CliResult};
use crate::output::{real, Output};
use crate::params::CriticalityParams;

fn gaussian(dim: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| StandardNormal.sample(rng))
}

/// Inputs along which the net is probed, and the states plotted.
fn net_trajectory(net: &Net, p: &CriticalityParams) -> CliResult<(Vec<DVector<f64>>, Vec<Vec<f64>>, &'static str)> {
    let dim = net.input_dim();
    let square = net.widths().last() == Some(&dim);
    let mode = match p.trajectory.as_str() {
        "auto" if square => "iterate",
        "auto" => "random",
        "iterate" if !square => return Err(usage("iterate needs equal input and output widths")),
        "iterate" => "iterate",
        "random" => "random",
        m => return Err(usage(format!("trajectory must be iterate, random or auto, got `{m}`"))),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut inputs = Vec::with_capacity(p.steps);
    let mut states = Vec::with_capacity(p.steps);
    let mut x = gaussian(dim, &mut rng);
    for _ in 0..p.steps {
        let layers = net.forward(&x)?;
        states.push(layers[1..].iter().flat_map(|s| s.iter().copied()).collect());
        let next = match mode {
            "iterate" => layers[layers.len() - 1].clone(),
            _ => gaussian(dim, &mut rng),
        };
        inputs.push(std::mem::replace(&mut x, next));
    }
    Ok((inputs, states, mode))
}

fn esn_probe(p: &CriticalityParams, model: &str, out: &mut Output) -> CliResult<(CriticalityReport, Vec<Vec<f64>>, Value)> {
    let model_path = out.input(model)?;
    let data = p.data.as_deref().ok_or_else(|| usage("--model needs --data"))?;
    let data_path = out.input(data)?;
    let sidecar = model_path.with_extension("bin");
    if let Some(s) = sidecar.to_str() {
        out.input(s)?;
    }
    let esn = TrainedEsn::load(&model_path)?;
    let series = load_csv_series(&data_path, &CsvOptions::default())?.series.values;
    let take = (esn.config().washout + p.steps).min(series.len());
    let inputs = &series[..take];
    let options = LyapunovOptions {
        edge_tolerance: p.edge_tolerance,
        singular_value_fallback: p.svd_fallback,
    };
    let report = lyapunov_from_jacobians(&esn.reservoir.state_jacobians(inputs)?, &options)?;
    let states = esn.reservoir.run_states(inputs)?.rows();
    Ok((report, states, json!({"kind": "esn", "model": model, "data": data})))
}

pub fn run(p: &CriticalityParams, out: &mut Output) -> CliResult<()> {
    if p.steps == 0 {
        return Err(usage("steps must be positive"));
    }
    let (report, states, source) = match (&p.net, &p.model) {
        (Some(_), Some(_)) => return Err(usage("give either --net or --model")),
        (None, None) => return Err(usage("need --net or --model")),
        (None, Some(model)) => esn_probe(p, model, out)?,
        (Some(net_file), None) => {
            let path = out.input(net_file)?;
            let text = std::fs::read_to_string(&path).map_err(|e| usage(e.to_string()))?;
            let spec: NetSpec = serde_json::from_str(&text).map_err(|e| usage(format!("{net_file}: {e}")))?;
            let net: Net = spec.build()?;
            let (inputs, states, mode) = net_trajectory(&net, p)?;
            let options = LyapunovOptions {
                edge_tolerance: p.edge_tolerance,
                singular_value_fallback: p.svd_fallback,
            };
            let report = lyapunov(&net, &inputs, &options)?;
            (report, states, json!({"kind": "net", "net": net_file, "trajectory": mode}))
        }
    };

    let eps = epsilon_from_fraction(&states, p.epsilon_fraction)?;
    let rp: RecurrencePlot = recurrence_plot(&states, eps)?;
    let mut body = report.to_json();
    body["source"] = source;
    body["steps"] = json!(states.len());
    body["recurrence"] = json!({
        "epsilon_fraction": p.epsilon_fraction,
        "epsilon": real(rp.threshold),
        "rate": real(rp.recurrence_rate),
    });
    out.json("criticality.json", &body)?;
    out.bytes("recurrence.pgm", &rp.to_pgm())?;
    out.bytes("recurrence.csv", rp.to_csv().as_bytes())?;
    Ok(())
}
