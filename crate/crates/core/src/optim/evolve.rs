use std::collections::BTreeMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{minimize_from, Dim, DimKind, MpsogsaParams, OptimResult, SearchSpace};
use crate::data::ChronoSplit;
use crate::dynamics::{epsilon_from_fraction, recurrence_plot, DEFAULT_EPSILON_FRACTION};
use crate::error::{Error, Result};
use crate::esn::{DeepEsnConfig, Reservoir, TrainedEsn};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolveOptions {
    /// Inclusive depth range.
    pub depth: (usize, usize),
    /// Inclusive width range.
    pub width: (usize, usize),
    pub budget: usize,
    pub population: usize,
    pub seed: u64,
    pub params: MpsogsaParams,
    /// Post-washout steps whose states form each generation's recurrence
    /// snapshot.
    pub snapshot_steps: usize,
    pub epsilon_fraction: f64,
    /// Start the first particle at the template's own depth and width.
    pub include_template: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            depth: (1, 4),
            width: (50, 500),
            budget: 6,
            population: 8,
            seed: 0,
            params: MpsogsaParams::default(),
            snapshot_steps: 300,
            epsilon_fraction: DEFAULT_EPSILON_FRACTION,
            include_template: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationSnapshot {
    pub generation: usize,
    pub depth: usize,
    pub width: usize,
    pub fitness: f64,
    pub epsilon: f64,
    pub recurrence_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveResult {
    pub best: DeepEsnConfig,
    /// Validation RMSE of `best`.
    pub best_fitness: f64,
    pub optim: OptimResult,
    pub snapshots: Vec<GenerationSnapshot>,
    /// Distinct `(depth, width)` candidates with their fitness.
    pub evaluated: Vec<((usize, usize), f64)>,
}

impl EvolveResult {
    pub fn snapshots_csv(&self) -> String {
        let mut out = String::from("generation,depth,width,fitness,epsilon,recurrence_rate\n");
        for s in &self.snapshots {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                s.generation, s.depth, s.width, s.fitness, s.epsilon, s.recurrence_rate
            ));
        }
        out
    }
}

fn with_shape(template: &DeepEsnConfig, depth: usize, width: usize) -> DeepEsnConfig {
    DeepEsnConfig {
        num_layers: depth,
        reservoir_size: width,
        ..template.clone()
    }
}

/// Threshold and recurrence rate of a configuration's concatenated states
/// over the `steps` inputs that follow the washout.
pub fn snapshot_rate(config: &DeepEsnConfig, series: &[Vec<f64>], steps: usize, fraction: f64) -> Result<(f64, f64)> {
    let reservoir = Reservoir::build(config, series.first().ok_or(Error::Empty("series"))?.len())?;
    let traj = reservoir.run_states(&series[..(config.washout + steps).min(series.len())])?;
    let states = traj.rows();
    let eps = epsilon_from_fraction(&states, fraction)?;
    Ok((eps, recurrence_plot(&states, eps)?.recurrence_rate))
}

/// Evolves depth and width of `template` to minimise validation RMSE.
pub fn evolve_esn(
    series: &[Vec<f64>],
    split: &ChronoSplit,
    template: &DeepEsnConfig,
    options: &EvolveOptions,
) -> Result<EvolveResult> {
    let (dlo, dhi) = options.depth;
    let (wlo, whi) = options.width;
    if dlo == 0 || wlo == 0 || dlo > dhi || wlo > whi {
        return Err(Error::param("space", "need 1 ≤ lower ≤ upper for depth and width"));
    }
    template.validate()?;
    // A degenerate range becomes a one-point integer interval.
    let dim = |lo: usize, hi: usize| Dim {
        lower: lo as f64,
        upper: if hi > lo { hi as f64 } else { lo as f64 + 0.5 },
        kind: DimKind::Integer,
    };
    let space = SearchSpace::new(vec![dim(dlo, dhi), dim(wlo, whi)])?;

    let cache: Mutex<BTreeMap<(usize, usize), f64>> = Mutex::new(BTreeMap::new());
    let failures: Mutex<BTreeMap<(usize, usize), String>> = Mutex::new(BTreeMap::new());
    let fitness = |x: &[f64]| -> f64 {
        let key = (x[0] as usize, x[1] as usize);
        if let Some(&f) = cache.lock().expect("cache lock").get(&key) {
            return f;
        }
        let config = with_shape(template, key.0, key.1);
        let f = TrainedEsn::fit_split(&config, series, split)
            .and_then(|m| m.evaluate(series, split.validation.clone()))
            .map(|r| r.rmse);
        let f = match f {
            Ok(v) if v.is_finite() => v,
            Ok(_) => f64::INFINITY,
            Err(e) => {
                failures.lock().expect("failure lock").insert(key, e.to_string());
                f64::INFINITY
            }
        };
        cache.lock().expect("cache lock").insert(key, f);
        f
    };

    let initial = if options.include_template {
        let d = template.num_layers.clamp(dlo, dhi) as f64;
        let w = template.reservoir_size.clamp(wlo, whi) as f64;
        vec![vec![d, w]]
    } else {
        Vec::new()
    };
    let optim = minimize_from(
        &space,
        fitness,
        options.budget,
        options.population,
        options.seed,
        &options.params,
        &initial,
    )?;
    if !optim.best_fitness.is_finite() {
        let detail = failures
            .lock()
            .expect("failure lock")
            .iter()
            .map(|((d, w), e)| format!("depth={d} width={w}: {e}"))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Error::AllCandidatesFailed(detail));
    }

    let mut rates: BTreeMap<(usize, usize), (f64, f64)> = BTreeMap::new();
    let mut snapshots = Vec::with_capacity(optim.history.len());
    let steps = options.snapshot_steps.min(split.train.end.saturating_sub(template.washout));
    for h in &optim.history {
        let key = (h.best_position[0] as usize, h.best_position[1] as usize);
        let (eps, rate) = match rates.get(&key) {
            Some(&v) => v,
            None => {
                let v = snapshot_rate(&with_shape(template, key.0, key.1), series, steps, options.epsilon_fraction)?;
                rates.insert(key, v);
                v
            }
        };
        snapshots.push(GenerationSnapshot {
            generation: h.generation,
            depth: key.0,
            width: key.1,
            fitness: h.best_fitness,
            epsilon: eps,
            recurrence_rate: rate,
        });
    }
    let best_key = (optim.best_position[0] as usize, optim.best_position[1] as usize);
    Ok(EvolveResult {
        best: with_shape(template, best_key.0, best_key.1),
        best_fitness: optim.best_fitness,
        snapshots,
        evaluated: cache.into_inner().expect("cache lock").into_iter().collect(),
        optim,
    })
}
