//! Two-channel drive signals and their exporters.
//!
//! The output stage has exactly two independent channels: one piezo signal,
//! routed through relays to a single patch or to all patches in parallel,
//! and one electrostatic signal for the touch screen. A [`Rendered`] buffer
//! mirrors that: one sample vector per channel plus the relay routing of the
//! piezo channel over time.

use std::io::Write;
use std::path::Path;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;
use thiserror::Error;

use crate::vibmap::Actuator;

#[derive(Debug, Error)]
pub enum WaveformError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("wav export failed: {0}")]
    Wav(#[from] hound::Error),
    #[error("full-scale voltage must be positive")]
    FullScale,
}

/// The piezo channel drives `actuator` for samples `start..end`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RouteSegment {
    pub start: usize,
    pub end: usize,
    pub actuator: Actuator,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Rendered {
    pub sample_rate: f64,
    /// Volts.
    pub piezo: Vec<f64>,
    /// Volts.
    pub electrostatic: Vec<f64>,
    pub routes: Vec<RouteSegment>,
}

impl Rendered {
    pub fn silent(sample_rate: f64, len: usize) -> Self {
        Self {
            sample_rate,
            piezo: vec![0.0; len],
            electrostatic: vec![0.0; len],
            routes: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.piezo.len().max(self.electrostatic.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn duration(&self) -> f64 {
        self.len() as f64 / self.sample_rate
    }

    pub fn route_at(&self, sample: usize) -> Option<Actuator> {
        self.routes
            .iter()
            .find(|r| r.start <= sample && sample < r.end)
            .map(|r| r.actuator)
    }

    /// True when no two route segments overlap, i.e. at most one piezo
    /// signal is live at any instant.
    pub fn routes_disjoint(&self) -> bool {
        let mut r = self.routes.clone();
        r.sort_by_key(|s| s.start);
        r.windows(2).all(|w| w[0].end <= w[1].start)
    }

    /// CSV with a time column, one column per output channel and the relay
    /// route of the piezo channel (`-` when idle).
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "time_s,piezo_v,electrostatic_v,piezo_route")?;
        for i in 0..self.len() {
            let t = i as f64 / self.sample_rate;
            let p = self.piezo.get(i).copied().unwrap_or(0.0);
            let e = self.electrostatic.get(i).copied().unwrap_or(0.0);
            let route = self.route_at(i).map_or("-", Actuator::as_str);
            writeln!(w, "{t},{p},{e},{route}")?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<(), WaveformError> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_csv(&mut w)?;
        w.flush()?;
        Ok(())
    }

    /// 16-bit stereo PCM, left = piezo, right = electrostatic; `full_scale`
    /// volts map to `i16::MAX` (inputs beyond it are clipped).
    pub fn save_wav(&self, path: impl AsRef<Path>, full_scale: f64) -> Result<(), WaveformError> {
        if !(full_scale > 0.0) {
            return Err(WaveformError::FullScale);
        }
        let spec = hound::WavSpec {
            channels: 2,
            sample_rate: self.sample_rate.round() as u32,
            bits_per_sample: 16,
            sample_format: hound::SampleFormat::Int,
        };
        let mut wav = hound::WavWriter::create(path, spec)?;
        let q = |v: f64| ((v / full_scale).clamp(-1.0, 1.0) * i16::MAX as f64).round() as i16;
        for i in 0..self.len() {
            wav.write_sample(q(self.piezo.get(i).copied().unwrap_or(0.0)))?;
            wav.write_sample(q(self.electrostatic.get(i).copied().unwrap_or(0.0)))?;
        }
        wav.finalize()?;
        Ok(())
    }
}

/// Local maxima of `|x|`: `(index, |x|)` for each sample at least as large as
/// both neighbours and strictly larger than one of them.
pub fn envelope_peaks(samples: &[f64]) -> Vec<(usize, f64)> {
    let a: Vec<f64> = samples.iter().map(|v| v.abs()).collect();
    (1..a.len().saturating_sub(1))
        .filter(|&i| a[i] >= a[i - 1] && a[i] >= a[i + 1] && (a[i] > a[i - 1] || a[i] > a[i + 1]) && a[i] > 0.0)
        .map(|i| (i, a[i]))
        .collect()
}

/// Index and width (Hz) of the largest FFT magnitude bin, DC excluded.
pub fn dominant_bin(samples: &[f64], sample_rate: f64) -> (usize, f64) {
    let n = samples.len();
    assert!(n >= 2, "need at least two samples");
    let mut buf: Vec<Complex<f64>> = samples.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let bin = (1..=n / 2)
        .max_by(|&i, &j| buf[i].norm_sqr().total_cmp(&buf[j].norm_sqr()))
        .unwrap_or(0);
    (bin, sample_rate / n as f64)
}

/// Frequency of the dominant FFT bin.
pub fn dominant_frequency(samples: &[f64], sample_rate: f64) -> f64 {
    let (bin, width) = dominant_bin(samples, sample_rate);
    bin as f64 * width
}
