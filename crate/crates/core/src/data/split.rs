use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Contiguous train / validation / test index ranges covering `[0, T)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChronoSplit {
    pub train: Range<usize>,
    pub validation: Range<usize>,
    pub test: Range<usize>,
}

impl ChronoSplit {
    pub fn len(&self) -> usize {
        self.test.end
    }

    pub fn is_empty(&self) -> bool {
        self.test.end == 0
    }
}

/// Boundaries at `floor(T · cumulative ratio)`; no shuffling.
pub fn chrono_split(len: usize, train: f64, validation: f64, test: f64) -> Result<ChronoSplit> {
    for (name, r) in [("train_ratio", train), ("val_ratio", validation), ("test_ratio", test)] {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::param(name, format!("must be positive, got {r}")));
        }
    }
    let sum = train + validation + test;
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::RatioSum { sum });
    }
    // The slack absorbs binary rounding of the ratios (0.7 + 0.1 < 0.8).
    let boundary = |cum: f64| ((len as f64 * cum + 1e-9).floor() as usize).min(len);
    let a = boundary(train);
    let b = boundary(train + validation).max(a);
    Ok(ChronoSplit {
        train: 0..a,
        validation: a..b,
        test: b..len,
    })
}
