use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Feature rows with integer class labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationData {
    pub inputs: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub classes: usize,
}

impl ClassificationData {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.inputs.first().map_or(0, Vec::len)
    }

    /// Standardises every feature to zero mean and unit variance in place.
    pub fn standardize(&mut self) {
        let d = self.dim();
        let n = self.len() as f64;
        for j in 0..d {
            let mean = self.inputs.iter().map(|r| r[j]).sum::<f64>() / n;
            let var = self.inputs.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
            let std = if var > 0.0 { var.sqrt() } else { 1.0 };
            for r in &mut self.inputs {
                r[j] = (r[j] - mean) / std;
            }
        }
    }
}

/// Isotropic Gaussian blobs; centres are drawn from `N(0, separation²)`.
pub fn blobs(n: usize, classes: usize, dim: usize, separation: f64, seed: u64) -> Result<ClassificationData> {
    if n == 0 || classes < 2 || dim == 0 {
        return Err(Error::param("blobs", "need n ≥ 1, classes ≥ 2, dim ≥ 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centres: Vec<Vec<f64>> = (0..classes)
        .map(|_| (0..dim).map(|_| separation * gauss(&mut rng)).collect())
        .collect();
    let mut inputs = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let k = i % classes;
        inputs.push(centres[k].iter().map(|c| c + gauss(&mut rng)).collect());
        labels.push(k);
    }
    Ok(ClassificationData { inputs, labels, classes })
}

/// Two interleaved half circles with Gaussian noise, standardised.
pub fn two_moons(n: usize, noise: f64, seed: u64) -> Result<ClassificationData> {
    if n < 2 {
        return Err(Error::param("two_moons", "need at least two points"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inputs = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let k = i % 2;
        let t = std::f64::consts::PI * rng.random::<f64>();
        let (x, y) = if k == 0 {
            (t.cos(), t.sin())
        } else {
            (1.0 - t.cos(), 0.5 - t.sin())
        };
        inputs.push(vec![x + noise * gauss(&mut rng), y + noise * gauss(&mut rng)]);
        labels.push(k);
    }
    let mut data = ClassificationData {
        inputs,
        labels,
        classes: 2,
    };
    data.standardize();
    Ok(data)
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}
