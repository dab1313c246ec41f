use std::collections::VecDeque;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Point;

#[derive(Debug, Error, PartialEq)]
pub enum KnobError {
    #[error("timestamps must increase strictly: {prev} s then {next} s")]
    Stream { prev: f64, next: f64 },
    #[error("thumb and index finger coincide at t = {0} s")]
    Geometry(f64),
    #[error("invalid knob configuration: {0}")]
    Config(String),
    #[error("target sector not reached; session ended in sector {}", .0.final_sector)]
    Timeout(Box<super::ScenarioMetrics>),
}

/// Feedback condition of a knob session.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Condition {
    /// Visual only: the electrode stays at zero.
    #[serde(rename = "V")]
    Visual,
    /// Haptic detents: one square pulse per sector crossing.
    #[serde(rename = "HD")]
    Detents,
    /// Detents over a constant-frequency carrier.
    #[serde(rename = "HD+CF")]
    ConstantFriction,
    /// Detents over a carrier whose frequency follows rotation speed.
    #[serde(rename = "HD+VF")]
    VariableFriction,
}

impl Condition {
    pub const ALL: [Condition; 4] = [
        Condition::Visual,
        Condition::Detents,
        Condition::ConstantFriction,
        Condition::VariableFriction,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Condition::Visual => "V",
            Condition::Detents => "HD",
            Condition::ConstantFriction => "HD+CF",
            Condition::VariableFriction => "HD+VF",
        }
    }

    fn has_detents(self) -> bool {
        self != Condition::Visual
    }
}

impl std::fmt::Display for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Condition {
    type Err = KnobError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "V" => Ok(Condition::Visual),
            "HD" => Ok(Condition::Detents),
            "HD+CF" | "HDCF" | "CF" => Ok(Condition::ConstantFriction),
            "HD+VF" | "HDVF" | "VF" => Ok(Condition::VariableFriction),
            _ => Err(KnobError::Config(format!("unknown condition {s:?}"))),
        }
    }
}

/// Geometry of the rotary menu.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnobSpec {
    pub sectors: usize,
    /// Angle of the lower edge of sector 0, degrees counter-clockwise from +x.
    #[serde(default)]
    pub zero_deg: f64,
}

impl KnobSpec {
    pub fn new(sectors: usize) -> Self {
        Self { sectors, zero_deg: 0.0 }
    }

    pub fn sector_width(&self) -> f64 {
        360.0 / self.sectors as f64
    }

    /// Unwrapped sector index holding `angle_deg`.
    pub fn sector_of(&self, angle_deg: f64) -> i64 {
        ((angle_deg - self.zero_deg) / self.sector_width()).floor() as i64
    }

    /// Centre angle of an unwrapped sector.
    pub fn sector_center(&self, sector: i64) -> f64 {
        self.zero_deg + (sector as f64 + 0.5) * self.sector_width()
    }
}

/// Electrode waveform parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KnobConfig {
    pub sample_rate: f64,
    /// Detent pulse height, V.
    pub detent_v: f64,
    pub detent_s: f64,
    /// Minimum idle time between queued pulses.
    pub detent_gap_s: f64,
    /// Carrier peak, V (50 Vp is 100 Vpp).
    pub carrier_v: f64,
    pub carrier_hz: f64,
    pub vf_min_hz: f64,
    pub vf_max_hz: f64,
    /// Rotation speed at which the variable carrier reaches `vf_max_hz`, deg/s.
    pub vf_full_speed_dps: f64,
    /// Width of the hysteresis band around each sector boundary, degrees.
    pub hysteresis_deg: f64,
    pub velocity_window: usize,
    /// Hold time assumed for the first tracking sample.
    pub nominal_frame_s: f64,
}

impl Default for KnobConfig {
    fn default() -> Self {
        Self {
            sample_rate: 44_100.0,
            detent_v: 100.0,
            detent_s: 0.02,
            detent_gap_s: 0.005,
            carrier_v: 50.0,
            carrier_hz: 180.0,
            vf_min_hz: 60.0,
            vf_max_hz: 180.0,
            vf_full_speed_dps: 360.0,
            hysteresis_deg: 2.0,
            velocity_window: 5,
            nominal_frame_s: 1.0 / 60.0,
        }
    }
}

impl KnobConfig {
    pub fn validate(&self) -> Result<(), KnobError> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        let checks = [
            (pos(self.sample_rate), "sample rate must be positive"),
            (pos(self.detent_s), "detent duration must be positive"),
            (self.detent_gap_s >= 0.0, "detent gap must be non-negative"),
            (self.detent_v >= 0.0 && self.carrier_v >= 0.0, "amplitudes must be non-negative"),
            (pos(self.carrier_hz), "carrier frequency must be positive"),
            (pos(self.vf_min_hz) && self.vf_max_hz >= self.vf_min_hz, "variable carrier range is empty"),
            (pos(self.vf_full_speed_dps), "full-speed rotation rate must be positive"),
            (self.hysteresis_deg >= 0.0, "hysteresis must be non-negative"),
            (self.velocity_window >= 1, "velocity window must hold at least one sample"),
            (pos(self.nominal_frame_s), "nominal frame time must be positive"),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err(KnobError::Config((*msg).into())),
            None => Ok(()),
        }
    }

    /// Carrier frequency of the variable-friction condition at `speed_dps`.
    pub fn vf_frequency(&self, speed_dps: f64) -> f64 {
        let s = (speed_dps.abs() / self.vf_full_speed_dps).min(1.0);
        self.vf_min_hz + (self.vf_max_hz - self.vf_min_hz) * s
    }
}

/// A confirmed sector change.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Crossing {
    pub time_s: f64,
    pub from: i64,
    pub to: i64,
}

/// Samples emitted by one tracking step.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WaveSegment {
    /// Absolute index of `samples[0]` in the session stream.
    pub start_sample: usize,
    pub samples: Vec<f64>,
    /// Carrier frequency in effect at the end of the segment, if any.
    pub carrier_hz: Option<f64>,
    /// Sector crossings confirmed by this step.
    pub crossings: Vec<Crossing>,
}

/// Streaming knob: feed finger positions, receive electrode samples.
#[derive(Clone, Debug)]
pub struct KnobSession {
    spec: KnobSpec,
    condition: Condition,
    cfg: KnobConfig,
    last_t: Option<f64>,
    last_raw: f64,
    angle: f64,
    sector: i64,
    rates: VecDeque<f64>,
    velocity_dps: f64,
    last_dt: f64,
    cursor: usize,
    phase: f64,
    pulses: VecDeque<(usize, usize)>,
    last_pulse_end: Option<usize>,
    crossings: Vec<Crossing>,
    frequency_trace: Vec<(f64, f64)>,
}

impl KnobSession {
    pub fn new(spec: KnobSpec, condition: Condition, cfg: KnobConfig) -> Result<Self, KnobError> {
        cfg.validate()?;
        if spec.sectors == 0 || !spec.zero_deg.is_finite() {
            return Err(KnobError::Config("knob needs at least one sector".into()));
        }
        Ok(Self {
            spec,
            condition,
            last_dt: cfg.nominal_frame_s,
            cfg,
            last_t: None,
            last_raw: 0.0,
            angle: 0.0,
            sector: 0,
            rates: VecDeque::new(),
            velocity_dps: 0.0,
            cursor: 0,
            phase: 0.0,
            pulses: VecDeque::new(),
            last_pulse_end: None,
            crossings: Vec::new(),
            frequency_trace: Vec::new(),
        })
    }

    pub fn spec(&self) -> &KnobSpec {
        &self.spec
    }

    pub fn condition(&self) -> Condition {
        self.condition
    }

    pub fn config(&self) -> &KnobConfig {
        &self.cfg
    }

    /// Unwrapped knob angle in degrees.
    pub fn angle_deg(&self) -> f64 {
        self.angle
    }

    pub fn sector(&self) -> i64 {
        self.sector
    }

    /// Smoothed angular velocity, deg/s.
    pub fn velocity_dps(&self) -> f64 {
        self.velocity_dps
    }

    pub fn crossings(&self) -> &[Crossing] {
        &self.crossings
    }

    /// `(time, Hz)` of the carrier at each step, empty for carrier-less conditions.
    pub fn frequency_trace(&self) -> &[(f64, f64)] {
        &self.frequency_trace
    }

    /// Number of samples emitted so far.
    pub fn samples_emitted(&self) -> usize {
        self.cursor
    }

    /// Advance the session with the finger positions observed at `t`.
    pub fn knob_step(&mut self, t: f64, thumb: Point, index: Point) -> Result<WaveSegment, KnobError> {
        if !t.is_finite() {
            return Err(KnobError::Stream { prev: self.last_t.unwrap_or(f64::NAN), next: t });
        }
        if let Some(prev) = self.last_t {
            if t <= prev {
                return Err(KnobError::Stream { prev, next: t });
            }
        }
        let (dx, dy) = (index.x - thumb.x, index.y - thumb.y);
        if dx.hypot(dy) < 1e-9 {
            return Err(KnobError::Geometry(t));
        }
        let raw = dy.atan2(dx).to_degrees();

        let mut new_crossings = Vec::new();
        match self.last_t {
            None => {
                self.angle = raw;
                self.sector = self.spec.sector_of(raw);
            }
            Some(prev_t) => {
                let delta = (raw - self.last_raw + 180.0).rem_euclid(360.0) - 180.0;
                let prev_angle = self.angle;
                self.angle += delta;
                self.detect_crossings(prev_t, prev_angle, t, &mut new_crossings);
                let dt = t - prev_t;
                self.rates.push_back(delta / dt);
                if self.rates.len() > self.cfg.velocity_window {
                    self.rates.pop_front();
                }
                self.velocity_dps = self.rates.iter().sum::<f64>() / self.rates.len() as f64;
                self.last_dt = dt;
            }
        }
        self.last_raw = raw;
        self.last_t = Some(t);

        if self.condition.has_detents() {
            for c in &new_crossings {
                self.queue_pulse(c.time_s);
            }
        }
        self.crossings.extend_from_slice(&new_crossings);

        let carrier = self.carrier_hz();
        if let Some(f) = carrier {
            self.frequency_trace.push((t, f));
        }
        let end = ((t + self.last_dt) * self.cfg.sample_rate).ceil().max(0.0) as usize;
        let start = self.cursor;
        let samples = self.emit_until(end, carrier);
        Ok(WaveSegment {
            start_sample: start,
            samples,
            carrier_hz: carrier,
            crossings: new_crossings,
        })
    }

    /// Emit any queued detent pulses that extend past the last step.
    pub fn finish(&mut self) -> WaveSegment {
        let end = self.pulses.back().map_or(self.cursor, |&(_, e)| e.max(self.cursor));
        let start = self.cursor;
        let carrier = self.carrier_hz();
        let samples = self.emit_until(end, carrier);
        WaveSegment {
            start_sample: start,
            samples,
            carrier_hz: carrier,
            crossings: Vec::new(),
        }
    }

    fn carrier_hz(&self) -> Option<f64> {
        match self.condition {
            Condition::ConstantFriction => Some(self.cfg.carrier_hz),
            Condition::VariableFriction => Some(self.cfg.vf_frequency(self.velocity_dps)),
            _ => None,
        }
    }

    fn detect_crossings(&mut self, t0: f64, a0: f64, t1: f64, out: &mut Vec<Crossing>) {
        let w = self.spec.sector_width();
        let half = self.cfg.hysteresis_deg / 2.0;
        let a1 = self.angle;
        let at = |trigger: f64| t0 + (trigger - a0) / (a1 - a0) * (t1 - t0);
        loop {
            let upper = self.spec.zero_deg + (self.sector + 1) as f64 * w + half;
            let lower = self.spec.zero_deg + self.sector as f64 * w - half;
            if a1 >= upper && a1 > a0 {
                out.push(Crossing { time_s: at(upper), from: self.sector, to: self.sector + 1 });
                self.sector += 1;
            } else if a1 < lower && a1 < a0 {
                out.push(Crossing { time_s: at(lower), from: self.sector, to: self.sector - 1 });
                self.sector -= 1;
            } else {
                break;
            }
        }
    }

    fn queue_pulse(&mut self, time_s: f64) {
        let fs = self.cfg.sample_rate;
        let len = (self.cfg.detent_s * fs).round().max(1.0) as usize;
        let gap = (self.cfg.detent_gap_s * fs).round() as usize;
        let floor = self.last_pulse_end.map_or(0, |e| e + gap);
        let start = ((time_s * fs).ceil().max(0.0) as usize).max(self.cursor).max(floor);
        self.pulses.push_back((start, start + len));
        self.last_pulse_end = Some(start + len);
    }

    fn emit_until(&mut self, end: usize, carrier: Option<f64>) -> Vec<f64> {
        let fs = self.cfg.sample_rate;
        let mut out = Vec::with_capacity(end.saturating_sub(self.cursor));
        while self.cursor < end {
            let n = self.cursor;
            while self.pulses.front().is_some_and(|&(_, e)| e <= n) {
                self.pulses.pop_front();
            }
            let in_pulse = self.pulses.front().is_some_and(|&(s, _)| s <= n);
            let carrier_v = match carrier {
                Some(f) => {
                    let v = self.cfg.carrier_v * self.phase.sin();
                    self.phase = (self.phase + 2.0 * PI * f / fs) % (2.0 * PI);
                    v
                }
                None => 0.0,
            };
            out.push(if in_pulse { self.cfg.detent_v } else { carrier_v });
            self.cursor += 1;
        }
        out
    }
}
