use std::fmt::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::classifier::{cross_validate, CvReport, LinearModel, SvmConfig};
use super::features::{dynamic_blocks, dynamic_features, static_blocks, static_descriptor, FeatureConfig, DYNAMIC_FRAMES};
use super::frame::{ContactFrame, Mask};
use super::synth::{dynamic_masks, static_mask, SynthConfig};
use super::{GestureError, GestureKind, GestureLabel};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MaskFormat {
    /// Run-length text, compact for sparse masks.
    Csv,
    Pgm,
}

impl MaskFormat {
    fn extension(self) -> &'static str {
        match self {
            MaskFormat::Csv => "csv",
            MaskFormat::Pgm => "pgm",
        }
    }
}

impl std::str::FromStr for MaskFormat {
    type Err = GestureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(MaskFormat::Csv),
            "pgm" => Ok(MaskFormat::Pgm),
            _ => Err(GestureError::Corpus(format!("unknown mask format {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StaticSample {
    pub id: String,
    pub label: GestureLabel,
    pub mask: Mask,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DynamicSample {
    pub id: String,
    pub label: GestureLabel,
    pub frames: Vec<Mask>,
}

impl DynamicSample {
    pub fn contact_frames(&self, min_area: usize, frame_dt: f64) -> Vec<ContactFrame> {
        self.frames
            .iter()
            .enumerate()
            .map(|(k, m)| ContactFrame::from_mask(m, min_area, k as f64 * frame_dt))
            .collect()
    }
}

/// Labelled static and dynamic gesture samples.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Corpus {
    pub statics: Vec<StaticSample>,
    pub dynamics: Vec<DynamicSample>,
}

fn sample_rng(seed: u64, class: usize, index: usize) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(((class as u64) << 32) | index as u64);
    r
}

fn file_stem(label: GestureLabel) -> String {
    label.as_str().replace('/', "-")
}

impl Corpus {
    /// Synthetic corpus with `per_class` samples of each of the ten classes.
    pub fn generate(per_class: usize, seed: u64, cfg: &SynthConfig) -> Self {
        let mut c = Corpus::default();
        for (ci, &label) in GestureLabel::STATIC.iter().enumerate() {
            for i in 0..per_class {
                let mut rng = sample_rng(seed, ci, i);
                let (mask, _) = static_mask(label, cfg, &mut rng);
                c.statics.push(StaticSample {
                    id: format!("s-{}-{i:04}", file_stem(label)),
                    label,
                    mask,
                });
            }
        }
        for (ci, &label) in GestureLabel::DYNAMIC.iter().enumerate() {
            for i in 0..per_class {
                let mut rng = sample_rng(seed, ci + GestureLabel::STATIC.len(), i);
                c.dynamics.push(DynamicSample {
                    id: format!("d-{}-{i:04}", file_stem(label)),
                    label,
                    frames: dynamic_masks(label, DYNAMIC_FRAMES, cfg, &mut rng),
                });
            }
        }
        c
    }

    pub fn len(&self) -> usize {
        self.statics.len() + self.dynamics.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Write masks and a `labels.csv` manifest (`id,kind,label,files`, files
    /// separated by `;`).
    pub fn save(&self, dir: impl AsRef<Path>, format: MaskFormat) -> Result<(), GestureError> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| GestureError::Io(format!("{}: {e}", dir.display())))?;
        let ext = format.extension();
        let mut manifest = String::from("id,kind,label,files\n");
        for s in &self.statics {
            let name = format!("{}.{ext}", s.id);
            s.mask.save(dir.join(&name))?;
            writeln!(manifest, "{},static,{},{name}", s.id, s.label).unwrap();
        }
        for s in &self.dynamics {
            let mut names = Vec::new();
            for (k, m) in s.frames.iter().enumerate() {
                let name = format!("{}-f{k}.{ext}", s.id);
                m.save(dir.join(&name))?;
                names.push(name);
            }
            writeln!(manifest, "{},dynamic,{},{}", s.id, s.label, names.join(";")).unwrap();
        }
        std::fs::write(dir.join("labels.csv"), manifest).map_err(|e| GestureError::Io(e.to_string()))
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self, GestureError> {
        let dir = dir.as_ref();
        let path = dir.join("labels.csv");
        let text = std::fs::read_to_string(&path).map_err(|e| GestureError::Io(format!("{}: {e}", path.display())))?;
        let mut c = Corpus::default();
        for (n, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.splitn(4, ',').collect();
            if cols.len() != 4 {
                return Err(GestureError::Corpus(format!("labels.csv line {}: expected 4 columns", n + 1)));
            }
            let kind: GestureKind = cols[1].parse()?;
            let label: GestureLabel = cols[2].parse()?;
            if label.kind() != kind {
                return Err(GestureError::Corpus(format!("labels.csv line {}: {label} is not {}", n + 1, kind.as_str())));
            }
            let masks = cols[3]
                .split(';')
                .map(|f| Mask::load(dir.join(f.trim())))
                .collect::<Result<Vec<_>, _>>()?;
            match kind {
                GestureKind::Static => {
                    let [mask] = <[Mask; 1]>::try_from(masks)
                        .map_err(|_| GestureError::Corpus(format!("labels.csv line {}: static sample needs one file", n + 1)))?;
                    c.statics.push(StaticSample { id: cols[0].to_string(), label, mask });
                }
                GestureKind::Dynamic => c.dynamics.push(DynamicSample {
                    id: cols[0].to_string(),
                    label,
                    frames: masks,
                }),
            }
        }
        Ok(c)
    }

    /// Static descriptors; `None` where extraction failed.
    pub fn static_features(&self, cfg: &FeatureConfig) -> Vec<(GestureLabel, Option<Vec<f64>>)> {
        let f = |s: &StaticSample| (s.label, static_descriptor(&s.mask, cfg).ok());
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            self.statics.par_iter().map(f).collect()
        }
        #[cfg(not(feature = "parallel"))]
        self.statics.iter().map(f).collect()
    }

    pub fn dynamic_features(&self, cfg: &FeatureConfig, min_area: usize) -> Vec<(GestureLabel, Option<Vec<f64>>)> {
        let f = |s: &DynamicSample| (s.label, dynamic_features(&s.contact_frames(min_area, 0.0), cfg).ok());
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            self.dynamics.par_iter().map(f).collect()
        }
        #[cfg(not(feature = "parallel"))]
        self.dynamics.iter().map(f).collect()
    }
}

fn expect_kind(model: &LinearModel, kind: GestureKind) -> Result<(), GestureError> {
    if model.kind != kind {
        return Err(GestureError::Corpus(format!(
            "model is {} but a {} gesture was given",
            model.kind.as_str(),
            kind.as_str()
        )));
    }
    Ok(())
}

pub fn classify_static(descriptor: &[f64], model: &LinearModel) -> Result<(GestureLabel, f64), GestureError> {
    expect_kind(model, GestureKind::Static)?;
    model.predict(descriptor)
}

/// Classify from the first four frames after the gate reported motion.
pub fn classify_dynamic(
    frames: &[ContactFrame],
    model: &LinearModel,
    cfg: &FeatureConfig,
) -> Result<(GestureLabel, f64), GestureError> {
    expect_kind(model, GestureKind::Dynamic)?;
    model.predict(&dynamic_features(frames, cfg)?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorpusReport {
    pub statics: Option<CvReport>,
    pub dynamics: Option<CvReport>,
}

/// Two-fold cross validation of both classifiers on a corpus. A kind with no
/// samples is skipped.
pub fn evaluate_corpus(
    corpus: &Corpus,
    features: &FeatureConfig,
    svm: &SvmConfig,
    min_area: usize,
) -> Result<CorpusReport, GestureError> {
    let statics = if corpus.statics.is_empty() {
        None
    } else {
        let rows = corpus.static_features(features);
        Some(cross_validate(&rows, GestureKind::Static, &static_blocks(features), 2, svm)?)
    };
    let dynamics = if corpus.dynamics.is_empty() {
        None
    } else {
        let rows = corpus.dynamic_features(features, min_area);
        Some(cross_validate(&rows, GestureKind::Dynamic, &dynamic_blocks(features), 2, svm)?)
    };
    Ok(CorpusReport { statics, dynamics })
}
