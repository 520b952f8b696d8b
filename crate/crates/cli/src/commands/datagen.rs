use edgechaos::data::{blobs as gen_blobs, mackey_glass as gen_mg, two_moons, write_idx_images, write_idx_labels, ClassificationData, IdxImages, MackeyGlassParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{usage, CliResult};
use crate::output::{Output, Table};
use crate::params::{BlobsParams, IdxFixtureParams, MackeyGlassGenParams, MoonsParams};

pub fn mackey_glass(p: &MackeyGlassGenParams, out: &mut Output) -> CliResult<()> {
    let values = gen_mg::<f64>(&MackeyGlassParams {
        length: p.length,
        tau: p.tau,
        beta: p.beta,
        gamma: p.gamma,
        n: p.exponent,
        dt: p.dt,
        sample_every: p.sample_every,
        discard: p.discard,
        initial: p.initial,
        history_jitter: p.history_jitter,
        seed: p.seed,
    })?;
    let mut text = String::from("value\n");
    for v in values {
        text.push_str(&format!("{v}\n"));
    }
    out.bytes("mackey_glass.csv", text.as_bytes())
}

fn write_classification(stem: &str, data: &ClassificationData, out: &mut Output) -> CliResult<()> {
    let names: Vec<String> = (0..data.dim()).map(|j| format!("x{j}")).chain(["label".to_string()]).collect();
    let mut text = names.join(",");
    text.push('\n');
    for (x, y) in data.inputs.iter().zip(&data.labels) {
        let cells: Vec<String> = x.iter().map(|v| v.to_string()).chain([y.to_string()]).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    out.bytes(&format!("{stem}.csv"), text.as_bytes())
}

pub fn blobs(p: &BlobsParams, out: &mut Output) -> CliResult<()> {
    let mut data = gen_blobs(p.n, p.classes, p.dim, p.separation, p.seed)?;
    if p.standardize {
        data.standardize();
    }
    write_classification("blobs", &data, out)
}

pub fn moons(p: &MoonsParams, out: &mut Output) -> CliResult<()> {
    write_classification("moons", &two_moons(p.n, p.noise, p.seed)?, out)
}

/// Class `k` lights the `k`-th horizontal band; pixels carry uniform noise.
pub fn idx_fixture(p: &IdxFixtureParams, out: &mut Output) -> CliResult<()> {
    if p.count == 0 || p.rows == 0 || p.cols == 0 || p.classes == 0 || p.classes > 256 || p.classes > p.rows {
        return Err(usage("need positive count, rows, cols and 1 ≤ classes ≤ min(rows, 256)"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut pixels = Vec::with_capacity(p.count * p.rows * p.cols);
    let mut labels = Vec::with_capacity(p.count);
    for _ in 0..p.count {
        let k = rng.random_range(0..p.classes);
        labels.push(k as u8);
        for r in 0..p.rows {
            let lit = r * p.classes / p.rows == k;
            for _ in 0..p.cols {
                let base: u8 = if lit { 180 } else { 10 };
                pixels.push(base + rng.random_range(0..60u8));
            }
        }
    }
    let images = IdxImages {
        count: p.count,
        rows: p.rows,
        cols: p.cols,
        pixels,
    };
    write_idx_images(&out.path("images.idx"), &images)?;
    write_idx_labels(&out.path("labels.idx"), &labels)?;
    out.register("images.idx");
    out.register("labels.idx");
    let mut table = Table::new(&["count", "rows", "cols", "classes"]);
    table.push(vec![p.count.into(), p.rows.into(), p.cols.into(), p.classes.into()]);
    out.table("fixture", &table)?;
    Ok(())
}
