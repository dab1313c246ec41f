use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SensitivityError {
    #[error("sensitivity curve needs at least one anchor")]
    Empty,
    #[error("anchor frequencies must be positive and strictly ascending")]
    Order,
    #[error("thresholds must be positive")]
    Threshold,
    #[error("jnd must be positive")]
    Jnd,
}

/// Vibrotactile detection threshold versus frequency.
///
/// Thresholds (um peak displacement) are interpolated linearly in log-log
/// space between anchors and held constant outside the anchored range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensitivityCurve {
    /// `(Hz, um)` pairs, strictly ascending in frequency.
    anchors: Vec<(f64, f64)>,
    /// Just-noticeable difference in dB.
    jnd_db: f64,
}

impl Default for SensitivityCurve {
    fn default() -> Self {
        Self {
            anchors: vec![(10.0, 10.0), (100.0, 0.6), (250.0, 0.1), (625.0, 0.5)],
            jnd_db: 1.5,
        }
    }
}

impl SensitivityCurve {
    pub fn new(anchors: Vec<(f64, f64)>, jnd_db: f64) -> Result<Self, SensitivityError> {
        let curve = Self { anchors, jnd_db };
        curve.validate()?;
        Ok(curve)
    }

    pub fn validate(&self) -> Result<(), SensitivityError> {
        if self.anchors.is_empty() {
            return Err(SensitivityError::Empty);
        }
        if self.anchors.iter().any(|&(f, _)| !(f > 0.0 && f.is_finite()))
            || self.anchors.windows(2).any(|w| w[1].0 <= w[0].0)
        {
            return Err(SensitivityError::Order);
        }
        if self.anchors.iter().any(|&(_, t)| !(t > 0.0 && t.is_finite())) {
            return Err(SensitivityError::Threshold);
        }
        if !(self.jnd_db > 0.0) {
            return Err(SensitivityError::Jnd);
        }
        Ok(())
    }

    /// Uniform threshold at every frequency.
    pub fn flat(threshold_um: f64, jnd_db: f64) -> Self {
        Self {
            anchors: vec![(1.0, threshold_um)],
            jnd_db,
        }
    }

    pub fn anchors(&self) -> &[(f64, f64)] {
        &self.anchors
    }

    pub fn jnd_db(&self) -> f64 {
        self.jnd_db
    }

    /// Detection threshold in um at `hz`.
    pub fn threshold(&self, hz: f64) -> f64 {
        let a = &self.anchors;
        let (first, last) = (a[0], a[a.len() - 1]);
        if hz <= first.0 {
            return first.1;
        }
        if hz >= last.0 {
            return last.1;
        }
        let k = a.partition_point(|&(f, _)| f <= hz);
        let (lo, hi) = (a[k - 1], a[k]);
        let t = (hz.ln() - lo.0.ln()) / (hi.0.ln() - lo.0.ln());
        (lo.1.ln() + t * (hi.1.ln() - lo.1.ln())).exp()
    }

    /// Sensation level in dB of a displacement of `um` at `hz`.
    pub fn sensation_level(&self, um: f64, hz: f64) -> f64 {
        20.0 * (um / self.threshold(hz)).log10()
    }

    /// Displacement in um that sits exactly `level_db` above threshold.
    pub fn displacement_at_level(&self, level_db: f64, hz: f64) -> f64 {
        self.threshold(hz) * 10f64.powf(level_db / 20.0)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self, Box<dyn std::error::Error + Send + Sync>> {
        let curve: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        curve.validate()?;
        Ok(curve)
    }
}
