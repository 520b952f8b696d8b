//! Model files: a JSON header plus a sidecar of little-endian `f64` matrices
//! stored row-major in the order listed in the header.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{Csr, DeepEsnConfig, Reservoir, TrainedEsn};
use crate::data::MetricReport;
use crate::error::{Error, Result};

pub const MODEL_FORMAT: &str = "edgechaos-deep-esn";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct MatrixEntry {
    name: String,
    rows: usize,
    cols: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    config: DeepEsnConfig,
    input_dim: usize,
    train_len: usize,
    training_error: MetricReport,
    sidecar: String,
    matrices: Vec<MatrixEntry>,
}

fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("bin")
}

impl TrainedEsn {
    fn named_matrices(&self) -> Vec<(String, DMatrix<f64>)> {
        let r = &self.reservoir;
        let mut out = vec![("input".to_string(), r.input.clone())];
        for l in 0..r.recurrent.len() {
            out.push((format!("recurrent.{l}"), r.recurrent_weights(l)));
            if l > 0 {
                out.push((format!("inter.{l}"), r.inter_layer_weights(l)));
            }
        }
        out.push(("readout".to_string(), self.readout.clone()));
        out
    }

    /// Writes `path` (JSON) and `path` with extension `bin` (matrices).
    pub fn save(&self, path: &Path) -> Result<()> {
        let mats = self.named_matrices();
        let bin = sidecar_path(path);
        let header = Header {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            config: self.reservoir.config.clone(),
            input_dim: self.reservoir.input_dim,
            train_len: self.train_len,
            training_error: self.training_error,
            sidecar: bin
                .file_name()
                .and_then(|n| n.to_str())
                .ok_or_else(|| Error::Format("model path has no file name".into()))?
                .to_string(),
            matrices: mats
                .iter()
                .map(|(name, m)| MatrixEntry {
                    name: name.clone(),
                    rows: m.nrows(),
                    cols: m.ncols(),
                })
                .collect(),
        };
        let mut bytes = Vec::new();
        for (_, m) in &mats {
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    bytes.extend_from_slice(&m[(i, j)].to_le_bytes());
                }
            }
        }
        std::fs::write(&bin, bytes)?;
        std::fs::write(path, serde_json::to_string_pretty(&header)? + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let header: Header = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if header.format != MODEL_FORMAT {
            return Err(Error::Format(format!("unknown model format `{}`", header.format)));
        }
        if header.version != MODEL_VERSION {
            return Err(Error::Format(format!("unsupported model version {}", header.version)));
        }
        header.config.validate()?;
        let bin = path.with_file_name(&header.sidecar);
        let bytes = std::fs::read(&bin)?;
        let need: usize = header.matrices.iter().map(|m| m.rows * m.cols * 8).sum();
        if bytes.len() != need {
            return Err(Error::Format(format!("sidecar holds {} bytes, header needs {need}", bytes.len())));
        }
        let mut offset = 0;
        let mut take = |e: &MatrixEntry| {
            let m = DMatrix::from_fn(e.rows, e.cols, |i, j| {
                let at = offset + (i * e.cols + j) * 8;
                f64::from_le_bytes(bytes[at..at + 8].try_into().expect("8-byte slice"))
            });
            offset += e.rows * e.cols * 8;
            m
        };
        let c = &header.config;
        let (n, layers) = (c.reservoir_size, c.num_layers);
        let expected: Vec<(String, usize, usize)> = std::iter::once(("input".to_string(), n, header.input_dim))
            .chain((0..layers).flat_map(|l| {
                let mut v = vec![(format!("recurrent.{l}"), n, n)];
                if l > 0 {
                    v.push((format!("inter.{l}"), n, n));
                }
                v
            }))
            .chain(std::iter::once(("readout".to_string(), 1 + n * layers, header.input_dim)))
            .collect();
        if expected.len() != header.matrices.len()
            || expected
                .iter()
                .zip(&header.matrices)
                .any(|((name, r, c), e)| *name != e.name || *r != e.rows || *c != e.cols)
        {
            return Err(Error::Format("matrix list does not match the configuration".into()));
        }
        let mut it = header.matrices.iter();
        let input = take(it.next().expect("checked length"));
        let mut recurrent = Vec::with_capacity(layers);
        let mut inter = Vec::with_capacity(layers.saturating_sub(1));
        for l in 0..layers {
            recurrent.push(Csr::from_dense(&take(it.next().expect("checked length"))));
            if l > 0 {
                inter.push(Csr::from_dense(&take(it.next().expect("checked length"))));
            }
        }
        let readout = take(it.next().expect("checked length"));
        Ok(Self {
            reservoir: Reservoir {
                config: header.config,
                input_dim: header.input_dim,
                input,
                recurrent,
                inter,
            },
            readout,
            training_error: header.training_error,
            train_len: header.train_len,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activations::synthesize_hp;
    use crate::activations::HpDesignProfile;

    #[test]
    fn save_load_round_trip() {
        let series: Vec<Vec<f64>> = (0..300).map(|t| vec![(t as f64 * 0.1).sin(), (t as f64 * 0.05).cos()]).collect();
        let config = DeepEsnConfig {
            num_layers: 2,
            reservoir_size: 40,
            washout: 20,
            activation: synthesize_hp(&HpDesignProfile::default()).unwrap(),
            seed: 3,
            ..Default::default()
        };
        let model = TrainedEsn::fit(&config, &series, 200).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        model.save(&path).unwrap();
        assert!(dir.path().join("model.bin").exists());
        let back = TrainedEsn::load(&path).unwrap();
        assert_eq!(back, model);
        assert_eq!(back.predict(&series).unwrap(), model.predict(&series).unwrap());

        std::fs::write(dir.path().join("model.bin"), [0u8; 16]).unwrap();
        assert!(matches!(TrainedEsn::load(&path), Err(Error::Format(_))));
    }
}
