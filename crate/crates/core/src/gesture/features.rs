use serde::{Deserialize, Serialize};

use super::canonical::{canonicalize, CanonicalConfig};
use super::contour::trace_contour;
use super::efd::efd;
use super::frame::{Blob, ContactFrame, Mask};
use super::GestureError;
use crate::geom::Point;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    pub harmonics: usize,
    pub canonical: CanonicalConfig,
    /// Blob areas counted as a fingertip, px.
    pub fingertip_area: (usize, usize),
    /// Contacts moving less than this over the window count as stationary.
    pub stationary_px: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            harmonics: 8,
            canonical: CanonicalConfig::default(),
            fingertip_area: (30, 2500),
            stationary_px: 2.0,
        }
    }
}

/// Frames used for a dynamic decision.
pub const DYNAMIC_FRAMES: usize = 4;

const COUNT_FEATURES: usize = 3;
const TRAJECTORY_FEATURES: usize = 8;

/// Descriptor of a static pose: the hand is rotated upright, the wrist cut
/// away and the remaining outline described by normalised EFD coefficients.
pub fn static_descriptor(mask: &Mask, cfg: &FeatureConfig) -> Result<Vec<f64>, GestureError> {
    let c = canonicalize(mask, &cfg.canonical)?;
    efd(&trace_contour(&c.hand)?, cfg.harmonics)
}

pub fn static_blocks(cfg: &FeatureConfig) -> Vec<usize> {
    vec![4 * cfg.harmonics]
}

pub fn dynamic_blocks(cfg: &FeatureConfig) -> Vec<usize> {
    vec![4 * cfg.harmonics, COUNT_FEATURES, TRAJECTORY_FEATURES]
}

fn nearest(blobs: &[Blob], p: Point) -> Option<Point> {
    blobs
        .iter()
        .map(|b| b.centroid)
        .min_by(|a, b| a.distance(p).total_cmp(&b.distance(p)))
}

/// Follow each contact of the first frame through the later frames by
/// nearest-centroid matching.
fn tracks(frames: &[ContactFrame]) -> Vec<Vec<Point>> {
    frames[0]
        .blobs
        .iter()
        .map(|b| {
            let mut t = vec![b.centroid];
            for f in &frames[1..] {
                let last = *t.last().unwrap();
                t.push(nearest(&f.blobs, last).unwrap_or(last));
            }
            t
        })
        .collect()
}

/// Descriptor of the largest contact, contact counts and a rotation- and
/// translation-invariant summary of the contact trajectories.
pub fn dynamic_features(frames: &[ContactFrame], cfg: &FeatureConfig) -> Result<Vec<f64>, GestureError> {
    if frames.len() < DYNAMIC_FRAMES {
        return Err(GestureError::TooFewFrames(frames.len()));
    }
    let frames = &frames[..DYNAMIC_FRAMES];
    let first = &frames[0];
    if first.blobs.is_empty() {
        return Err(GestureError::EmptyMask);
    }
    let mut out = efd(&trace_contour(&first.mask)?, cfg.harmonics)?;

    let (lo, hi) = cfg.fingertip_area;
    let fingers = first.blobs.iter().filter(|b| (lo..=hi).contains(&b.area)).count();
    out.extend([fingers as f64, first.blobs.len() as f64, (first.blobs[0].area as f64).ln()]);

    let tr = tracks(frames);
    let n = tr.len() as f64;
    let centroid = {
        let (sx, sy) = tr.iter().fold((0.0, 0.0), |a, t| (a.0 + t[0].x, a.1 + t[0].y));
        Point::new(sx / n, sy / n)
    };
    let disp: Vec<(f64, f64)> = tr
        .iter()
        .map(|t| (t[t.len() - 1].x - t[0].x, t[t.len() - 1].y - t[0].y))
        .collect();
    let mags: Vec<f64> = disp.iter().map(|d| d.0.hypot(d.1)).collect();
    let mean_mag = mags.iter().sum::<f64>() / n;
    let max_mag = mags.iter().copied().fold(0.0, f64::max);
    let std_mag = (mags.iter().map(|m| (m - mean_mag).powi(2)).sum::<f64>() / n).sqrt();
    let net = {
        let (sx, sy) = disp.iter().fold((0.0, 0.0), |a, d| (a.0 + d.0, a.1 + d.1));
        (sx / n).hypot(sy / n)
    };
    let (mut radial, mut tangential, mut spread) = (0.0, 0.0, 0.0);
    for (t, d) in tr.iter().zip(&disp) {
        let (rx, ry) = (t[0].x - centroid.x, t[0].y - centroid.y);
        let r = rx.hypot(ry);
        spread += r;
        if r > 1e-9 {
            radial += (d.0 * rx + d.1 * ry) / r;
            tangential += ((d.0 * ry - d.1 * rx) / r).abs();
        }
    }
    let stationary = mags.iter().filter(|&&m| m < cfg.stationary_px).count() as f64 / n;
    out.extend([
        mean_mag,
        max_mag,
        std_mag,
        net,
        (radial / n).abs(),
        tangential / n,
        stationary,
        spread / n,
    ]);
    Ok(out)
}
