use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// MAE, RMSE and MAPE of a prediction.
///
/// MAPE skips observations with `|y| ≤ 1e-8 · max|y|`; the number skipped
/// is kept in `mape_excluded`. `mape` is `None` when every entry is skipped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub mae: f64,
    pub rmse: f64,
    pub mape: Option<f64>,
    pub mape_excluded: usize,
    pub count: usize,
}

pub const MAPE_RELATIVE_GUARD: f64 = 1e-8;

/// Panics if the slices differ in length or are empty.
pub fn metrics<T: Scalar>(predicted: &[T], observed: &[T]) -> MetricReport {
    assert_eq!(predicted.len(), observed.len(), "metrics on unequal lengths");
    assert!(!predicted.is_empty(), "metrics on empty input");
    let n = predicted.len() as f64;
    let scale = observed.iter().fold(0.0f64, |m, y| m.max(y.as_f64().abs()));
    let guard = MAPE_RELATIVE_GUARD * scale;
    let (mut abs_sum, mut sq_sum, mut pct_sum) = (0.0, 0.0, 0.0);
    let mut excluded = 0;
    for (p, y) in predicted.iter().zip(observed) {
        let (p, y) = (p.as_f64(), y.as_f64());
        let e = (p - y).abs();
        abs_sum += e;
        sq_sum += e * e;
        if y.abs() > guard {
            pct_sum += e / y.abs();
        } else {
            excluded += 1;
        }
    }
    let kept = predicted.len() - excluded;
    MetricReport {
        mae: abs_sum / n,
        rmse: (sq_sum / n).sqrt(),
        mape: (kept > 0).then(|| pct_sum / kept as f64),
        mape_excluded: excluded,
        count: predicted.len(),
    }
}
