use serde::{Deserialize, Serialize};

use super::frame::{ContactFrame, GrayFrame, Mask};
use super::GestureError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessConfig {
    /// Grey levels above the fitted illumination surface that count as contact.
    pub threshold: f32,
    /// Refits of the illumination surface with contact pixels excluded.
    pub refits: usize,
    /// Sampling stride used when fitting the surface.
    pub stride: usize,
    /// Blobs smaller than this are treated as noise.
    pub min_blob_area: usize,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            threshold: 40.0,
            refits: 3,
            stride: 4,
            min_blob_area: 20,
        }
    }
}

/// Background subtraction, high-pass filtering, thresholding and blob
/// extraction.
///
/// The high-pass stage removes a smooth illumination field by fitting a
/// quadratic surface to the difference image, refitting with the pixels that
/// stand out excluded. Unlike a local blur this keeps the interior of large
/// contacts such as a flat palm.
pub fn preprocess(
    raw: &GrayFrame,
    background: &GrayFrame,
    cfg: &PreprocessConfig,
    timestamp: f64,
) -> Result<ContactFrame, GestureError> {
    if raw.width != background.width || raw.height != background.height || raw.data.len() != raw.width * raw.height {
        return Err(GestureError::Dimension {
            expected: (background.width, background.height),
            got: (raw.width, raw.height),
        });
    }
    let (w, h) = (raw.width, raw.height);
    let diff: Vec<f32> = raw.data.iter().zip(&background.data).map(|(a, b)| a - b).collect();
    let surface = fit_illumination(&diff, w, h, cfg);
    let mut mask = Mask::new(w, h);
    let (sx, sy) = (1.0 / w.max(1) as f64, 1.0 / h.max(1) as f64);
    for y in 0..h {
        let v = y as f64 * sy - 0.5;
        for x in 0..w {
            let u = x as f64 * sx - 0.5;
            let i = y * w + x;
            mask.data[i] = (diff[i] as f64 - eval(&surface, u, v)) > cfg.threshold as f64;
        }
    }
    Ok(ContactFrame::from_mask(&mask, cfg.min_blob_area, timestamp))
}

fn basis(u: f64, v: f64) -> [f64; 6] {
    [1.0, u, v, u * u, u * v, v * v]
}

fn eval(c: &[f64; 6], u: f64, v: f64) -> f64 {
    basis(u, v).iter().zip(c).map(|(b, c)| b * c).sum()
}

fn fit_illumination(diff: &[f32], w: usize, h: usize, cfg: &PreprocessConfig) -> [f64; 6] {
    let stride = cfg.stride.max(1);
    let (sx, sy) = (1.0 / w.max(1) as f64, 1.0 / h.max(1) as f64);
    let mut coef = [0.0; 6];
    for pass in 0..=cfg.refits {
        let mut ata = [[0.0f64; 6]; 6];
        let mut atb = [0.0f64; 6];
        let mut used = 0usize;
        for y in (0..h).step_by(stride) {
            let v = y as f64 * sy - 0.5;
            for x in (0..w).step_by(stride) {
                let u = x as f64 * sx - 0.5;
                let d = diff[y * w + x] as f64;
                if pass > 0 && (d - eval(&coef, u, v)).abs() > cfg.threshold as f64 / 2.0 {
                    continue;
                }
                let b = basis(u, v);
                for r in 0..6 {
                    for c in 0..6 {
                        ata[r][c] += b[r] * b[c];
                    }
                    atb[r] += b[r] * d;
                }
                used += 1;
            }
        }
        if used < 6 {
            break;
        }
        match solve6(ata, atb) {
            Some(c) => coef = c,
            None => break,
        }
    }
    coef
}

/// Gaussian elimination with partial pivoting.
fn solve6(mut a: [[f64; 6]; 6], mut b: [f64; 6]) -> Option<[f64; 6]> {
    for col in 0..6 {
        let piv = (col..6).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..6 {
            let f = a[r][col] / a[col][col];
            for c in col..6 {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 6];
    for r in (0..6).rev() {
        let s: f64 = (r + 1..6).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}
