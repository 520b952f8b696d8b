use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Parameters of `x'(t) = β x(t−τ) / (1 + x(t−τ)^n) − γ x(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MackeyGlassParams {
    /// Number of returned samples.
    pub length: usize,
    pub tau: f64,
    pub beta: f64,
    pub gamma: f64,
    pub n: f64,
    /// Integration step.
    pub dt: f64,
    /// Integration steps per returned sample (10 with `dt = 0.1` gives unit sampling).
    pub sample_every: usize,
    /// Samples integrated and dropped before the first returned one.
    pub discard: usize,
    /// Centre of the initial history on `[−τ, 0]`.
    pub initial: f64,
    /// Width of the uniform jitter added to the initial history; 0 gives a constant history.
    pub history_jitter: f64,
    pub seed: u64,
}

impl Default for MackeyGlassParams {
    fn default() -> Self {
        Self {
            length: 2000,
            tau: 17.0,
            beta: 0.2,
            gamma: 0.1,
            n: 10.0,
            dt: 0.1,
            sample_every: 10,
            discard: 0,
            initial: 1.2,
            history_jitter: 0.2,
            seed: 0,
        }
    }
}

impl MackeyGlassParams {
    fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be positive and finite, got {v}")))
            }
        };
        let non_negative = |name: &'static str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be non-negative and finite, got {v}")))
            }
        };
        if self.length == 0 {
            return Err(Error::param("length", "must be at least 1"));
        }
        if self.sample_every == 0 {
            return Err(Error::param("sample_every", "must be at least 1"));
        }
        positive("dt", self.dt)?;
        positive("n", self.n)?;
        non_negative("tau", self.tau)?;
        non_negative("beta", self.beta)?;
        non_negative("gamma", self.gamma)?;
        non_negative("history_jitter", self.history_jitter)?;
        if !self.initial.is_finite() {
            return Err(Error::param("initial", "must be finite"));
        }
        Ok(())
    }
}

/// Integrates the delay equation with fixed-step RK4; the delayed term is
/// linearly interpolated on the integration grid (midpoint stages included).
pub fn mackey_glass<T: Scalar>(p: &MackeyGlassParams) -> Result<Vec<T>> {
    p.validate()?;
    let delay = p.tau / p.dt;
    // Grid points kept before t = 0 so every delayed lookup lands in the buffer.
    let lead = delay.ceil() as usize + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut grid: Vec<f64> = (0..=lead)
        .map(|_| {
            if p.history_jitter > 0.0 {
                p.initial + p.history_jitter * (rng.random::<f64>() - 0.5)
            } else {
                p.initial
            }
        })
        .collect();

    // Value at fractional grid position `pos` (index into `grid`).
    let lookup = |grid: &[f64], pos: f64| -> f64 {
        let pos = pos.max(0.0);
        let lo = pos.floor() as usize;
        let frac = pos - lo as f64;
        if frac == 0.0 || lo + 1 >= grid.len() {
            grid[lo.min(grid.len() - 1)]
        } else {
            grid[lo] * (1.0 - frac) + grid[lo + 1] * frac
        }
    };
    let rhs = |x: f64, xd: f64| p.beta * xd / (1.0 + xd.abs().powf(p.n)) - p.gamma * x;

    let total = (p.discard + p.length) * p.sample_every;
    grid.reserve(total);
    let mut out = Vec::with_capacity(p.length);
    let h = p.dt;
    for step in 0..total {
        let k = lead + step;
        let x = grid[k];
        let base = k as f64 - delay;
        let xd0 = lookup(&grid, base);
        let xdh = lookup(&grid, base + 0.5);
        let xd1 = lookup(&grid, base + 1.0);
        let k1 = rhs(x, xd0);
        let k2 = rhs(x + 0.5 * h * k1, xdh);
        let k3 = rhs(x + 0.5 * h * k2, xdh);
        let k4 = rhs(x + h * k3, xd1);
        let next = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        grid.push(next);
        if (step + 1) % p.sample_every == 0 && (step + 1) / p.sample_every > p.discard {
            out.push(T::of(next));
        }
    }
    Ok(out)
}
