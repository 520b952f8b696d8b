use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Share of the largest pairwise distance used as the recurrence threshold.
pub const DEFAULT_EPSILON_FRACTION: f64 = 0.1;

/// `R_ij = 1` iff `‖x_i − x_j‖ < ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrencePlot {
    size: usize,
    matrix: Vec<bool>,
    pub threshold: f64,
    pub recurrence_rate: f64,
}

impl RecurrencePlot {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.matrix[i * self.size + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[bool]> {
        self.matrix.chunks(self.size)
    }

    /// Binary greyscale PGM; recurrent pairs are black.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.size, self.size).into_bytes();
        out.extend(self.matrix.iter().map(|&r| if r { 0u8 } else { 255u8 }));
        out
    }

    /// One row per line, `0`/`1` cells separated by commas.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.size * self.size * 2);
        for row in self.rows() {
            for (j, &r) in row.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                out.push(if r { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }

    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(&self.to_pgm())?;
        Ok(())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

fn check_states<T: Scalar>(states: &[Vec<T>]) -> Result<usize> {
    let dim = states.first().ok_or(Error::Empty("state list"))?.len();
    if let Some(bad) = states.iter().find(|s| s.len() != dim) {
        return Err(Error::Dimension {
            expected: dim,
            actual: bad.len(),
            context: "state dimension",
        });
    }
    Ok(dim)
}

fn distance<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
        .sqrt()
}

pub fn recurrence_plot<T: Scalar>(states: &[Vec<T>], epsilon: T) -> Result<RecurrencePlot> {
    check_states(states)?;
    if !(epsilon > T::zero()) {
        return Err(Error::param("epsilon", "must be positive"));
    }
    let n = states.len();
    let mut matrix = vec![false; n * n];
    let mut ones = n;
    for i in 0..n {
        matrix[i * n + i] = true;
        for j in i + 1..n {
            if distance(&states[i], &states[j]) < epsilon {
                matrix[i * n + j] = true;
                matrix[j * n + i] = true;
                ones += 2;
            }
        }
    }
    Ok(RecurrencePlot {
        size: n,
        matrix,
        threshold: epsilon.as_f64(),
        recurrence_rate: ones as f64 / (n * n) as f64,
    })
}

/// `fraction × max_ij ‖x_i − x_j‖`, or the smallest positive value when all
/// states coincide.
pub fn epsilon_from_fraction<T: Scalar>(states: &[Vec<T>], fraction: T) -> Result<T> {
    check_states(states)?;
    if states.len() < 2 {
        return Err(Error::param("states", "need at least two states"));
    }
    if !(fraction > T::zero() && fraction <= T::one()) {
        return Err(Error::param("fraction", "must lie in (0, 1]"));
    }
    let mut max = T::zero();
    for i in 0..states.len() {
        for j in i + 1..states.len() {
            max = max.max(distance(&states[i], &states[j]));
        }
    }
    let eps = fraction * max;
    Ok(if eps > T::zero() { eps } else { T::min_positive_value() })
}
