use serde::{Deserialize, Serialize};

use super::frame::{Blob, ContactFrame};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GateConfig {
    /// Contact displacement beyond which the gesture is dynamic, px.
    pub d_min_px: f64,
    /// Orientation change beyond which the gesture is dynamic, degrees.
    pub alpha_min_deg: f64,
    /// Frames observed before a gesture is declared static.
    pub window: usize,
    /// Orientation is only trusted for blobs at least this elongated.
    pub min_elongation: f64,
}

impl Default for GateConfig {
    fn default() -> Self {
        Self {
            d_min_px: 5.0,
            alpha_min_deg: 5.0,
            window: 4,
            min_elongation: 1.5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Motion {
    Static,
    Dynamic,
}

/// Largest displacement of any contact between two frames, matching each
/// blob to the nearest blob of the other frame in both directions.
fn contact_displacement(a: &[Blob], b: &[Blob]) -> f64 {
    let one_way = |from: &[Blob], to: &[Blob]| {
        from.iter()
            .map(|p| to.iter().map(|q| p.centroid.distance(q.centroid)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    one_way(a, b).max(one_way(b, a))
}

fn orientation_change(a: &[Blob], b: &[Blob], min_elongation: f64) -> f64 {
    match (a.first(), b.first()) {
        (Some(p), Some(q)) if p.elongation >= min_elongation && q.elongation >= min_elongation => {
            let d = (q.orientation_deg - p.orientation_deg).rem_euclid(180.0);
            d.min(180.0 - d)
        }
        _ => 0.0,
    }
}

/// True when `frame` has moved away from `reference` by more than the gate thresholds.
pub fn exceeds(reference: &ContactFrame, frame: &ContactFrame, cfg: &GateConfig) -> bool {
    contact_displacement(&reference.blobs, &frame.blobs) > cfg.d_min_px
        || orientation_change(&reference.blobs, &frame.blobs, cfg.min_elongation) > cfg.alpha_min_deg
}

/// Classify a window of frames; only the first `cfg.window` frames are used.
pub fn gate(frames: &[ContactFrame], cfg: &GateConfig) -> Motion {
    let Some(first) = frames.first() else {
        return Motion::Static;
    };
    let n = frames.len().min(cfg.window.max(2));
    if frames[1..n].iter().any(|f| exceeds(first, f, cfg)) {
        Motion::Dynamic
    } else {
        Motion::Static
    }
}

/// Streaming form of [`gate`]: declares Dynamic on the first frame that
/// moves, Static once the window has filled without motion.
#[derive(Clone, Debug)]
pub struct GateSession {
    cfg: GateConfig,
    first: Option<ContactFrame>,
    seen: usize,
    decision: Option<Motion>,
}

impl GateSession {
    pub fn new(cfg: GateConfig) -> Self {
        Self {
            cfg,
            first: None,
            seen: 0,
            decision: None,
        }
    }

    pub fn decision(&self) -> Option<Motion> {
        self.decision
    }

    pub fn frames_seen(&self) -> usize {
        self.seen
    }

    pub fn push(&mut self, frame: &ContactFrame) -> Option<Motion> {
        if self.decision.is_some() {
            return self.decision;
        }
        self.seen += 1;
        match &self.first {
            None => self.first = Some(frame.clone()),
            Some(first) => {
                if exceeds(first, frame, &self.cfg) {
                    self.decision = Some(Motion::Dynamic);
                } else if self.seen >= self.cfg.window.max(2) {
                    self.decision = Some(Motion::Static);
                }
            }
        }
        self.decision
    }

    pub fn reset(&mut self) {
        self.first = None;
        self.seen = 0;
        self.decision = None;
    }
}
