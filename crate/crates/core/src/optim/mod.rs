//! Hybrid particle swarm / gravitational search minimiser over box-bounded
//! mixed integer and real spaces.
//!
//! Velocity update: `v ← w v + c1 r1 a + c2 r2 (g − x)` where `a` is the
//! gravitational acceleration `Σ_j r_j G M_j (x_j − x_i) / (‖x_j − x_i‖ + ε)`,
//! `G = G0 exp(−α t / T)`, and masses come from min-max normalised fitness.
//! Particles move in the unit cube; positions are mapped to the bounds for
//! evaluation.

mod evolve;

pub use evolve::{evolve_esn, snapshot_rate, EvolveOptions, EvolveResult, GenerationSnapshot};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DimKind {
    Integer,
    Real,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dim {
    pub lower: f64,
    pub upper: f64,
    pub kind: DimKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub dims: Vec<Dim>,
}

impl SearchSpace {
    pub fn new(dims: Vec<Dim>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Empty("search space"));
        }
        for (i, d) in dims.iter().enumerate() {
            if !(d.lower.is_finite() && d.upper.is_finite() && d.lower < d.upper) {
                return Err(Error::param("bounds", format!("dimension {i} needs finite lower < upper")));
            }
        }
        Ok(Self { dims })
    }

    pub fn real_box(lower: f64, upper: f64, dim: usize) -> Result<Self> {
        Self::new(vec![
            Dim {
                lower,
                upper,
                kind: DimKind::Real
            };
            dim
        ])
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    /// Unit-cube coordinates to a feasible point; integer dimensions rounded.
    pub fn decode(&self, unit: &[f64]) -> Vec<f64> {
        unit.iter()
            .zip(&self.dims)
            .map(|(&u, d)| {
                let x = d.lower + u.clamp(0.0, 1.0) * (d.upper - d.lower);
                match d.kind {
                    DimKind::Real => x,
                    DimKind::Integer => x.round().clamp(d.lower.ceil(), d.upper.floor()),
                }
            })
            .collect()
    }

    /// Inverse of [`decode`](Self::decode) for feasible points.
    pub fn encode(&self, point: &[f64]) -> Vec<f64> {
        point
            .iter()
            .zip(&self.dims)
            .map(|(&x, d)| ((x - d.lower) / (d.upper - d.lower)).clamp(0.0, 1.0))
            .collect()
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dims.len()
            && point.iter().zip(&self.dims).all(|(&x, d)| {
                x >= d.lower && x <= d.upper && (d.kind == DimKind::Real || x.fract() == 0.0)
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MpsogsaParams {
    pub w_start: f64,
    pub w_end: f64,
    pub c1: f64,
    pub c2: f64,
    pub g0: f64,
    pub alpha: f64,
    /// Softening added to inter-particle distances.
    pub epsilon: f64,
}

impl Default for MpsogsaParams {
    fn default() -> Self {
        Self {
            w_start: 0.9,
            w_end: 0.4,
            c1: 1.0,
            c2: 1.0,
            g0: 1.0,
            alpha: 20.0,
            epsilon: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    /// 1-based; generation 1 is the initial population.
    pub generation: usize,
    pub best_fitness: f64,
    pub best_position: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwarmState {
    /// Unit-cube coordinates.
    pub positions: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
    pub fitness: Vec<f64>,
    pub personal_best: Vec<(Vec<f64>, f64)>,
    pub global_best: (Vec<f64>, f64),
    pub masses: Vec<f64>,
    pub iteration: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimResult {
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    pub history: Vec<HistoryEntry>,
    pub evaluations: usize,
}

impl OptimResult {
    pub fn history_csv(&self) -> String {
        let dims = self.best_position.len();
        let mut out = String::from("generation,best_fitness");
        for d in 0..dims {
            out.push_str(&format!(",best_position_{d}"));
        }
        out.push('\n');
        for h in &self.history {
            out.push_str(&format!("{},{}", h.generation, h.best_fitness));
            for x in &h.best_position {
                out.push_str(&format!(",{x}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Normalised GSA masses; infeasible (`+∞`) particles weigh nothing.
fn masses(fitness: &[f64]) -> Vec<f64> {
    let finite = fitness.iter().copied().filter(|f| f.is_finite());
    let best = finite.clone().fold(f64::INFINITY, f64::min);
    let worst = finite.fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = fitness
        .iter()
        .map(|&f| {
            if !f.is_finite() {
                0.0
            } else if worst > best {
                (worst - f) / (worst - best)
            } else {
                1.0
            }
        })
        .collect();
    let total: f64 = raw.iter().sum();
    if total > 0.0 {
        raw.iter().map(|m| m / total).collect()
    } else {
        raw
    }
}

/// Minimises `fitness` over `space` with `budget` generations of
/// `population` particles. Non-finite fitness values count as `+∞`.
pub fn minimize<F>(
    space: &SearchSpace,
    fitness: F,
    budget: usize,
    population: usize,
    seed: u64,
    params: &MpsogsaParams,
) -> Result<OptimResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    minimize_from(space, fitness, budget, population, seed, params, &[])
}

/// As [`minimize`], with the first particles starting at `initial`.
pub fn minimize_from<F>(
    space: &SearchSpace,
    fitness: F,
    budget: usize,
    population: usize,
    seed: u64,
    params: &MpsogsaParams,
    initial: &[Vec<f64>],
) -> Result<OptimResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if budget == 0 {
        return Err(Error::param("budget", "must be at least 1"));
    }
    if population < 2 {
        return Err(Error::param("population", "must be at least 2"));
    }
    if initial.len() > population || initial.iter().any(|p| p.len() != space.len()) {
        return Err(Error::param("initial", "too many points or wrong dimension"));
    }
    let d = space.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let positions: Vec<Vec<f64>> = (0..population)
        .map(|i| match initial.get(i) {
            Some(p) => space.encode(p),
            None => (0..d).map(|_| rng.random::<f64>()).collect(),
        })
        .collect();
    let mut swarm = SwarmState {
        velocities: vec![vec![0.0; d]; population],
        fitness: vec![f64::INFINITY; population],
        personal_best: positions.iter().map(|p| (p.clone(), f64::INFINITY)).collect(),
        global_best: (positions[0].clone(), f64::INFINITY),
        masses: vec![0.0; population],
        positions,
        iteration: 0,
    };
    let mut history = Vec::with_capacity(budget);
    for t in 0..budget {
        swarm.iteration = t;
        swarm.fitness = swarm
            .positions
            .par_iter()
            .map(|p| {
                let f = fitness(&space.decode(p));
                if f.is_finite() {
                    f
                } else {
                    f64::INFINITY
                }
            })
            .collect();
        for i in 0..population {
            let f = swarm.fitness[i];
            if f < swarm.personal_best[i].1 {
                swarm.personal_best[i] = (swarm.positions[i].clone(), f);
            }
            if f < swarm.global_best.1 {
                swarm.global_best = (swarm.positions[i].clone(), f);
            }
        }
        history.push(HistoryEntry {
            generation: t + 1,
            best_fitness: swarm.global_best.1,
            best_position: space.decode(&swarm.global_best.0),
        });
        if t + 1 == budget {
            break;
        }
        swarm.masses = masses(&swarm.fitness);
        let g = params.g0 * (-params.alpha * t as f64 / budget as f64).exp();
        let w = if budget > 1 {
            params.w_start - (params.w_start - params.w_end) * t as f64 / (budget - 1) as f64
        } else {
            params.w_start
        };
        let old = swarm.positions.clone();
        for i in 0..population {
            let mut accel = vec![0.0; d];
            for j in 0..population {
                if j == i || swarm.masses[j] == 0.0 {
                    continue;
                }
                let r: f64 = rng.random();
                let dist = old[i].iter().zip(&old[j]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                let scale = r * g * swarm.masses[j] / (dist + params.epsilon);
                for k in 0..d {
                    accel[k] += scale * (old[j][k] - old[i][k]);
                }
            }
            for k in 0..d {
                let (r1, r2): (f64, f64) = (rng.random(), rng.random());
                let v = w * swarm.velocities[i][k]
                    + params.c1 * r1 * accel[k]
                    + params.c2 * r2 * (swarm.global_best.0[k] - old[i][k]);
                let v = v.clamp(-1.0, 1.0);
                swarm.velocities[i][k] = v;
                swarm.positions[i][k] = (old[i][k] + v).clamp(0.0, 1.0);
            }
        }
    }
    Ok(OptimResult {
        best_position: space.decode(&swarm.global_best.0),
        best_fitness: swarm.global_best.1,
        history,
        evaluations: budget * population,
    })
}
