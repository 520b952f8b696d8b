//! MNIST IDX container: big-endian magic, dimension counts, `u8` payload.

use std::path::Path;

use crate::error::{Error, Result};

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

/// Raw image tensor as stored on disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

/// Images scaled to `[0, 1]`, row-major, optionally mean-pooled.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledImages {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
    pub rows: usize,
    pub cols: usize,
}

fn read_u32(bytes: &[u8], at: usize) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::Idx("truncated header".into()))
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<IdxImages> {
    let magic = read_u32(bytes, 0)?;
    if magic != IMAGES_MAGIC {
        return Err(Error::Idx(format!("bad image magic {magic:#010x}")));
    }
    let count = read_u32(bytes, 4)? as usize;
    let rows = read_u32(bytes, 8)? as usize;
    let cols = read_u32(bytes, 12)? as usize;
    let need = count * rows * cols;
    let payload = &bytes[16..];
    if payload.len() < need {
        return Err(Error::Idx(format!(
            "truncated image payload: need {need} bytes, found {}",
            payload.len()
        )));
    }
    Ok(IdxImages {
        count,
        rows,
        cols,
        pixels: payload[..need].to_vec(),
    })
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let magic = read_u32(bytes, 0)?;
    if magic != LABELS_MAGIC {
        return Err(Error::Idx(format!("bad label magic {magic:#010x}")));
    }
    let count = read_u32(bytes, 4)? as usize;
    let payload = &bytes[8..];
    if payload.len() < count {
        return Err(Error::Idx(format!(
            "truncated label payload: need {count} bytes, found {}",
            payload.len()
        )));
    }
    Ok(payload[..count].to_vec())
}

pub fn read_idx_images(path: &Path) -> Result<IdxImages> {
    parse_idx_images(&std::fs::read(path)?)
}

pub fn read_idx_labels(path: &Path) -> Result<Vec<u8>> {
    parse_idx_labels(&std::fs::read(path)?)
}

pub fn write_idx_images(path: &Path, images: &IdxImages) -> Result<()> {
    if images.pixels.len() != images.count * images.rows * images.cols {
        return Err(Error::Idx("pixel buffer does not match dimensions".into()));
    }
    let mut out = Vec::with_capacity(16 + images.pixels.len());
    for v in [IMAGES_MAGIC, images.count as u32, images.rows as u32, images.cols as u32] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out.extend_from_slice(&images.pixels);
    std::fs::write(path, out)?;
    Ok(())
}

pub fn write_idx_labels(path: &Path, labels: &[u8]) -> Result<()> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    std::fs::write(path, out)?;
    Ok(())
}

/// Loads an image/label pair. `downsample` > 1 mean-pools non-overlapping
/// `downsample × downsample` blocks; trailing rows/columns that do not fill a
/// block are dropped.
pub fn load_idx(images: &Path, labels: &Path, downsample: usize) -> Result<LabeledImages> {
    let imgs = read_idx_images(images)?;
    let labels = read_idx_labels(labels)?;
    assemble(imgs, labels, downsample)
}

fn assemble(imgs: IdxImages, labels: Vec<u8>, downsample: usize) -> Result<LabeledImages> {
    if labels.len() != imgs.count {
        return Err(Error::Idx(format!(
            "count mismatch: {} images, {} labels",
            imgs.count,
            labels.len()
        )));
    }
    if downsample == 0 {
        return Err(Error::param("downsample", "must be at least 1"));
    }
    let (rows, cols) = (imgs.rows / downsample, imgs.cols / downsample);
    if rows == 0 || cols == 0 {
        return Err(Error::param("downsample", "larger than the image"));
    }
    let area = (downsample * downsample) as f64;
    let plane = imgs.rows * imgs.cols;
    let features = imgs
        .pixels
        .chunks(plane.max(1))
        .take(imgs.count)
        .map(|img| {
            let mut f = Vec::with_capacity(rows * cols);
            for r in 0..rows {
                for c in 0..cols {
                    let mut acc = 0.0;
                    for dr in 0..downsample {
                        for dc in 0..downsample {
                            acc += img[(r * downsample + dr) * imgs.cols + c * downsample + dc] as f64;
                        }
                    }
                    f.push(acc / area / 255.0);
                }
            }
            f
        })
        .collect();
    Ok(LabeledImages {
        features,
        labels,
        rows,
        cols,
    })
}
