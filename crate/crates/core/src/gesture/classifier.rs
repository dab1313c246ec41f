//! Linear one-vs-rest max-margin classifier trained by averaged stochastic
//! subgradient descent on the regularised hinge loss.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{GestureError, GestureKind, GestureLabel};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmConfig {
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            lambda: 1e-4,
            epochs: 60,
            seed: 7,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub features: Vec<f64>,
    pub label: GestureLabel,
}

/// Trained weights plus the standardisation applied to inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearModel {
    pub kind: GestureKind,
    pub labels: Vec<GestureLabel>,
    /// Sizes of the feature blocks; each block gets equal total weight.
    pub blocks: Vec<usize>,
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

fn standardisation(samples: &[Sample], blocks: &[usize]) -> (Vec<f64>, Vec<f64>) {
    let d = samples[0].features.len();
    let n = samples.len() as f64;
    let mut mean = vec![0.0; d];
    for s in samples {
        for (m, v) in mean.iter_mut().zip(&s.features) {
            *m += v / n;
        }
    }
    let mut var = vec![0.0; d];
    for s in samples {
        for ((acc, v), m) in var.iter_mut().zip(&s.features).zip(&mean) {
            *acc += (v - m).powi(2) / n;
        }
    }
    let mut scale = Vec::with_capacity(d);
    let mut k = 0;
    for &b in blocks {
        let w = 1.0 / (b as f64).sqrt();
        for _ in 0..b {
            let sd = var[k].sqrt();
            scale.push(if sd > 1e-12 { w / sd } else { 0.0 });
            k += 1;
        }
    }
    (mean, scale)
}

fn check_blocks(blocks: &[usize], d: usize) -> Result<(), GestureError> {
    let total: usize = blocks.iter().sum();
    if total != d {
        return Err(GestureError::FeatureMismatch { expected: total, got: d });
    }
    Ok(())
}

/// Train one linear scorer per class of `kind`.
pub fn train(samples: &[Sample], kind: GestureKind, blocks: &[usize], cfg: &SvmConfig) -> Result<LinearModel, GestureError> {
    let labels = kind.labels().to_vec();
    for &l in &labels {
        if samples.iter().filter(|s| s.label == l).count() < 2 {
            return Err(GestureError::MissingClass(l));
        }
    }
    let d = samples[0].features.len();
    if let Some(s) = samples.iter().find(|s| s.features.len() != d) {
        return Err(GestureError::FeatureMismatch { expected: d, got: s.features.len() });
    }
    check_blocks(blocks, d)?;
    let (mean, scale) = standardisation(samples, blocks);
    let xs: Vec<Vec<f64>> = samples
        .iter()
        .map(|s| s.features.iter().zip(&mean).zip(&scale).map(|((v, m), k)| (v - m) * k).collect())
        .collect();

    let mut weights = Vec::new();
    let mut bias = Vec::new();
    for (ci, &label) in labels.iter().enumerate() {
        let ys: Vec<f64> = samples.iter().map(|s| if s.label == label { 1.0 } else { -1.0 }).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(ci as u64));
        let mut order: Vec<usize> = (0..xs.len()).collect();
        // The bias rides along as a constant feature.
        let mut w = vec![0.0; d + 1];
        let mut avg = vec![0.0; d + 1];
        let mut averaged = 0usize;
        let mut t = 0usize;
        for epoch in 0..cfg.epochs {
            order.shuffle(&mut rng);
            for &i in &order {
                t += 1;
                let eta = 1.0 / (cfg.lambda * t as f64);
                let x = &xs[i];
                let margin = ys[i] * (x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + w[d]);
                let shrink = 1.0 - eta * cfg.lambda;
                w.iter_mut().for_each(|v| *v *= shrink);
                if margin < 1.0 {
                    for (wj, xj) in w.iter_mut().zip(x) {
                        *wj += eta * ys[i] * xj;
                    }
                    w[d] += eta * ys[i];
                }
                if 2 * epoch >= cfg.epochs {
                    averaged += 1;
                    for (a, v) in avg.iter_mut().zip(&w) {
                        *a += v;
                    }
                }
            }
        }
        let k = averaged.max(1) as f64;
        let avg: Vec<f64> = if averaged > 0 { avg.iter().map(|v| v / k).collect() } else { w };
        bias.push(avg[d]);
        weights.push(avg[..d].to_vec());
    }
    Ok(LinearModel {
        kind,
        labels,
        blocks: blocks.to_vec(),
        mean,
        scale,
        weights,
        bias,
    })
}

impl LinearModel {
    pub fn dimension(&self) -> usize {
        self.mean.len()
    }

    pub fn scores(&self, features: &[f64]) -> Result<Vec<f64>, GestureError> {
        if self.labels.is_empty() || self.weights.is_empty() {
            return Err(GestureError::Untrained);
        }
        if features.len() != self.dimension() {
            return Err(GestureError::FeatureMismatch {
                expected: self.dimension(),
                got: features.len(),
            });
        }
        let x: Vec<f64> = features
            .iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((v, m), k)| if v.is_finite() { (v - m) * k } else { 0.0 })
            .collect();
        Ok(self
            .weights
            .iter()
            .zip(&self.bias)
            .map(|(w, b)| w.iter().zip(&x).map(|(a, c)| a * c).sum::<f64>() + b)
            .collect())
    }

    /// Best label and its score; ties go to the earlier class.
    pub fn predict(&self, features: &[f64]) -> Result<(GestureLabel, f64), GestureError> {
        let s = self.scores(features)?;
        let mut best = 0;
        for (i, v) in s.iter().enumerate() {
            if *v > s[best] {
                best = i;
            }
        }
        Ok((self.labels[best], s[best]))
    }

    pub fn write_to(&self, mut w: impl Write) -> std::io::Result<()> {
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        writeln!(w, "surfhap-svm 1")?;
        writeln!(w, "kind {}", self.kind.as_str())?;
        writeln!(w, "blocks {}", self.blocks.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(" "))?;
        writeln!(w, "mean {}", join(&self.mean))?;
        writeln!(w, "scale {}", join(&self.scale))?;
        for ((l, b), wt) in self.labels.iter().zip(&self.bias).zip(&self.weights) {
            writeln!(w, "class {l} {b} {}", join(wt))?;
        }
        Ok(())
    }

    pub fn read_from(r: impl BufRead) -> Result<Self, GestureError> {
        let bad = |m: &str| GestureError::Corpus(format!("model file: {m}"));
        let nums = |s: &str| -> Result<Vec<f64>, GestureError> {
            s.split_whitespace()
                .map(|v| v.parse::<f64>().map_err(|_| bad(&format!("bad number {v:?}"))))
                .collect()
        };
        let mut fields: BTreeMap<String, String> = BTreeMap::new();
        let mut classes = Vec::new();
        let mut lines = r.lines();
        match lines.next() {
            Some(Ok(l)) if l.trim() == "surfhap-svm 1" => {}
            _ => return Err(bad("missing 'surfhap-svm 1' header")),
        }
        for line in lines {
            let line = line.map_err(|e| GestureError::Io(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
            if key == "class" {
                let mut it = rest.splitn(3, ' ');
                let label: GestureLabel = it.next().unwrap_or_default().parse()?;
                let b: f64 = it
                    .next()
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| bad("class line lacks a bias"))?;
                classes.push((label, b, nums(it.next().unwrap_or(""))?));
            } else {
                fields.insert(key.to_string(), rest.to_string());
            }
        }
        let get = |k: &str| fields.get(k).ok_or_else(|| bad(&format!("missing '{k}'")));
        let kind: GestureKind = get("kind")?.parse()?;
        let blocks = get("blocks")?
            .split_whitespace()
            .map(|v| v.parse::<usize>().map_err(|_| bad("bad block size")))
            .collect::<Result<Vec<_>, _>>()?;
        let mean = nums(get("mean")?)?;
        let scale = nums(get("scale")?)?;
        if classes.is_empty() {
            return Err(GestureError::Untrained);
        }
        check_blocks(&blocks, mean.len())?;
        if scale.len() != mean.len() || classes.iter().any(|c| c.2.len() != mean.len()) {
            return Err(bad("weight vectors differ in length"));
        }
        Ok(Self {
            kind,
            labels: classes.iter().map(|c| c.0).collect(),
            blocks,
            mean,
            scale,
            bias: classes.iter().map(|c| c.1).collect(),
            weights: classes.into_iter().map(|c| c.2).collect(),
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), GestureError> {
        let f = std::fs::File::create(path.as_ref()).map_err(|e| GestureError::Io(e.to_string()))?;
        let mut w = std::io::BufWriter::new(f);
        self.write_to(&mut w).map_err(|e| GestureError::Io(e.to_string()))?;
        w.flush().map_err(|e| GestureError::Io(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GestureError> {
        let f = std::fs::File::open(path.as_ref()).map_err(|e| GestureError::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::read_from(std::io::BufReader::new(f))
    }
}

/// Outcome of a cross-validation run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CvReport {
    pub labels: Vec<GestureLabel>,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<usize>>,
    /// Samples whose features could not be extracted; counted as errors.
    pub failed: Vec<usize>,
    pub accuracy: f64,
    pub fold_accuracy: Vec<f64>,
}

impl CvReport {
    pub fn per_class_accuracy(&self) -> Vec<f64> {
        self.confusion
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let n = row.iter().sum::<usize>() + self.failed[i];
                if n == 0 {
                    0.0
                } else {
                    row[i] as f64 / n as f64
                }
            })
            .collect()
    }
}

/// Stratified k-fold cross validation. `None` entries are samples whose
/// features failed; they are never trained on and always count as wrong.
pub fn cross_validate(
    samples: &[(GestureLabel, Option<Vec<f64>>)],
    kind: GestureKind,
    blocks: &[usize],
    folds: usize,
    cfg: &SvmConfig,
) -> Result<CvReport, GestureError> {
    let labels = kind.labels().to_vec();
    let folds = folds.max(2);
    let mut fold_of = vec![0usize; samples.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xcf);
    for &l in &labels {
        let mut idx: Vec<usize> = (0..samples.len()).filter(|&i| samples[i].0 == l).collect();
        if idx.len() < folds {
            return Err(GestureError::MissingClass(l));
        }
        idx.shuffle(&mut rng);
        for (k, i) in idx.into_iter().enumerate() {
            fold_of[i] = k % folds;
        }
    }
    let pos = |l: GestureLabel| labels.iter().position(|&x| x == l);
    let mut confusion = vec![vec![0usize; labels.len()]; labels.len()];
    let mut failed = vec![0usize; labels.len()];
    let mut fold_accuracy = Vec::new();
    for f in 0..folds {
        let train_set: Vec<Sample> = samples
            .iter()
            .zip(&fold_of)
            .filter(|(_, &k)| k != f)
            .filter_map(|((l, x), _)| x.as_ref().map(|x| Sample { features: x.clone(), label: *l }))
            .collect();
        let model = train(&train_set, kind, blocks, cfg)?;
        let (mut right, mut total) = (0usize, 0usize);
        for ((l, x), _) in samples.iter().zip(&fold_of).filter(|(_, &k)| k == f) {
            let Some(t) = pos(*l) else { continue };
            total += 1;
            match x {
                Some(x) => {
                    let (p, _) = model.predict(x)?;
                    let pi = pos(p).expect("model labels come from the same kind");
                    confusion[t][pi] += 1;
                    right += (pi == t) as usize;
                }
                None => failed[t] += 1,
            }
        }
        fold_accuracy.push(if total == 0 { 0.0 } else { right as f64 / total as f64 });
    }
    let correct: usize = (0..labels.len()).map(|i| confusion[i][i]).sum();
    let total: usize = confusion.iter().flatten().sum::<usize>() + failed.iter().sum::<usize>();
    Ok(CvReport {
        labels,
        confusion,
        failed,
        accuracy: if total == 0 { 0.0 } else { correct as f64 / total as f64 },
        fold_accuracy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn toy(n_per: usize, seed: u64) -> Vec<Sample> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        for (k, &l) in GestureLabel::STATIC.iter().enumerate() {
            for _ in 0..n_per {
                let mut f: Vec<f64> = (0..6).map(|_| rng.random_range(-0.3..0.3)).collect();
                f[k] += 3.0;
                out.push(Sample { features: f, label: l });
            }
        }
        out
    }

    #[test]
    fn separable_corpus_is_learned_perfectly() {
        let s = toy(20, 1);
        let rows: Vec<_> = s.iter().map(|x| (x.label, Some(x.features.clone()))).collect();
        let r = cross_validate(&rows, GestureKind::Static, &[6], 2, &SvmConfig::default()).unwrap();
        assert_eq!(r.accuracy, 1.0);
        let m = train(&s, GestureKind::Static, &[6], &SvmConfig::default()).unwrap();
        assert_eq!(m.predict(&s[3].features).unwrap().0, s[3].label);
    }

    #[test]
    fn training_is_deterministic() {
        let s = toy(10, 2);
        let a = train(&s, GestureKind::Static, &[6], &SvmConfig::default()).unwrap();
        let b = train(&s, GestureKind::Static, &[6], &SvmConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn missing_class_is_reported() {
        let s: Vec<_> = toy(5, 3).into_iter().filter(|x| x.label != GestureLabel::LShape).collect();
        assert_eq!(
            train(&s, GestureKind::Static, &[6], &SvmConfig::default()),
            Err(GestureError::MissingClass(GestureLabel::LShape))
        );
    }

    #[test]
    fn zero_vector_still_gets_a_label() {
        let m = train(&toy(10, 4), GestureKind::Static, &[6], &SvmConfig::default()).unwrap();
        let (l, score) = m.predict(&[0.0; 6]).unwrap();
        assert!(GestureLabel::STATIC.contains(&l));
        assert!(score.is_finite());
    }

    #[test]
    fn untrained_and_mismatched_inputs() {
        let mut m = train(&toy(5, 5), GestureKind::Static, &[6], &SvmConfig::default()).unwrap();
        assert!(matches!(m.predict(&[0.0; 4]), Err(GestureError::FeatureMismatch { .. })));
        m.weights.clear();
        m.labels.clear();
        assert_eq!(m.predict(&[0.0; 6]), Err(GestureError::Untrained));
    }

    #[test]
    fn model_text_round_trip() {
        let m = train(&toy(6, 6), GestureKind::Static, &[4, 2], &SvmConfig::default()).unwrap();
        let mut buf = Vec::new();
        m.write_to(&mut buf).unwrap();
        assert_eq!(LinearModel::read_from(buf.as_slice()).unwrap(), m);
    }
}
