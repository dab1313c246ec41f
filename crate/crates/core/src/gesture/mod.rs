//! Touch gesture recognition from binary contact images.
//!
//! Static hand poses are rotated upright using the wrist, described by
//! normalised elliptic Fourier coefficients and classified with a linear
//! one-vs-rest max-margin model. Dynamic gestures add finger counts and a
//! summary of how the contacts move over the first four frames.

mod canonical;
mod circle;
mod classifier;
mod contour;
mod corpus;
mod efd;
mod features;
mod frame;
mod gate;
mod preprocess;
mod synth;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use canonical::{canonicalize, detect_pose, rotate_about, CanonicalConfig, Canonical, HandPose, ReferenceEdge};
pub use circle::{brute_force_circle, min_enclosing_circle, Circle};
pub use classifier::{cross_validate, train, CvReport, LinearModel, Sample, SvmConfig};
pub use contour::{signed_area, trace_contour};
pub use corpus::{
    classify_dynamic, classify_static, evaluate_corpus, Corpus, CorpusReport, DynamicSample, MaskFormat, StaticSample,
};
pub use efd::{efd, efd_coefficients, normalize, reconstruct, EfdCoefficients};
pub use features::{dynamic_blocks, dynamic_features, static_blocks, static_descriptor, FeatureConfig, DYNAMIC_FRAMES};
pub use frame::{Blob, Components, ContactFrame, GrayFrame, Mask, DEFAULT_HEIGHT, DEFAULT_WIDTH};
pub use gate::{gate, GateConfig, GateSession, Motion};
pub use preprocess::{preprocess, PreprocessConfig};
pub use synth::{dynamic_masks, render_raw, static_mask, static_mask_posed, HandTruth, SynthConfig};

#[derive(Debug, Error, PartialEq)]
pub enum GestureError {
    #[error("frame is {got:?} but background is {expected:?}")]
    Dimension { expected: (usize, usize), got: (usize, usize) },
    #[error("mask is empty")]
    EmptyMask,
    #[error("no wrist arc found on the bounding circle")]
    WristNotFound,
    #[error("degenerate contour: {0}")]
    Degenerate(String),
    #[error("dynamic classification needs 4 frames, got {0}")]
    TooFewFrames(usize),
    #[error("model is untrained")]
    Untrained,
    #[error("feature vector has {got} values, model expects {expected}")]
    FeatureMismatch { expected: usize, got: usize },
    #[error("class {0} has fewer than two examples")]
    MissingClass(GestureLabel),
    #[error("corpus: {0}")]
    Corpus(String),
    #[error("{0}")]
    Io(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GestureKind {
    Static,
    Dynamic,
}

impl GestureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GestureKind::Static => "static",
            GestureKind::Dynamic => "dynamic",
        }
    }

    pub fn labels(self) -> [GestureLabel; 5] {
        match self {
            GestureKind::Static => GestureLabel::STATIC,
            GestureKind::Dynamic => GestureLabel::DYNAMIC,
        }
    }
}

impl std::str::FromStr for GestureKind {
    type Err = GestureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "static" => Ok(GestureKind::Static),
            "dynamic" => Ok(GestureKind::Dynamic),
            _ => Err(GestureError::Corpus(format!("unknown gesture kind {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GestureLabel {
    #[serde(rename = "1-finger")]
    OneFinger,
    #[serde(rename = "2-finger")]
    TwoFinger,
    #[serde(rename = "L-shape")]
    LShape,
    #[serde(rename = "closed-hand")]
    ClosedHand,
    #[serde(rename = "open-hand")]
    OpenHand,
    #[serde(rename = "drag")]
    Drag,
    #[serde(rename = "rotate")]
    Rotate,
    #[serde(rename = "spread/pile")]
    SpreadPile,
    #[serde(rename = "wipe")]
    Wipe,
    #[serde(rename = "zoom")]
    Zoom,
}

impl GestureLabel {
    pub const STATIC: [GestureLabel; 5] = [
        GestureLabel::OneFinger,
        GestureLabel::TwoFinger,
        GestureLabel::LShape,
        GestureLabel::ClosedHand,
        GestureLabel::OpenHand,
    ];
    pub const DYNAMIC: [GestureLabel; 5] = [
        GestureLabel::Drag,
        GestureLabel::Rotate,
        GestureLabel::SpreadPile,
        GestureLabel::Wipe,
        GestureLabel::Zoom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GestureLabel::OneFinger => "1-finger",
            GestureLabel::TwoFinger => "2-finger",
            GestureLabel::LShape => "L-shape",
            GestureLabel::ClosedHand => "closed-hand",
            GestureLabel::OpenHand => "open-hand",
            GestureLabel::Drag => "drag",
            GestureLabel::Rotate => "rotate",
            GestureLabel::SpreadPile => "spread/pile",
            GestureLabel::Wipe => "wipe",
            GestureLabel::Zoom => "zoom",
        }
    }

    pub fn kind(self) -> GestureKind {
        if Self::STATIC.contains(&self) {
            GestureKind::Static
        } else {
            GestureKind::Dynamic
        }
    }
}

impl std::fmt::Display for GestureLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for GestureLabel {
    type Err = GestureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GestureLabel::STATIC
            .into_iter()
            .chain(GestureLabel::DYNAMIC)
            .find(|l| l.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| GestureError::Corpus(format!("unknown gesture label {s:?}")))
    }
}
