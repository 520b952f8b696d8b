//! Datasets: generators, loaders, chronological splits and error metrics.

mod csv_series;
mod idx;
mod mackey_glass;
mod metrics;
mod split;
mod synthetic;

pub use csv_series::{load_csv_series, ColumnStats, CsvLoad, CsvOptions, HeaderMode, MultivariateSeries, RejectedRow};
pub use idx::{load_idx, read_idx_images, read_idx_labels, write_idx_images, write_idx_labels, IdxImages, LabeledImages};
pub use mackey_glass::{mackey_glass, MackeyGlassParams};
pub use metrics::{metrics, MetricReport};
pub use split::{chrono_split, ChronoSplit};
pub use synthetic::{blobs, two_moons, ClassificationData};
