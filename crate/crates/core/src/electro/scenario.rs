use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::knob::{Condition, Crossing, KnobConfig, KnobError, KnobSession, KnobSpec};
use crate::geom::Point;

/// Finger positions seen by the tracker at one instant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FingerSample {
    pub t: f64,
    pub thumb: Point,
    pub index: Point,
}

/// A recorded or synthesised two-finger rotation.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<FingerSample>,
}

const CSV_HEADER: &str = "t,thumb_x,thumb_y,index_x,index_y";

impl Trajectory {
    /// Index finger orbiting a fixed thumb along a piecewise-linear angle
    /// profile given as `(time, degrees)` keyframes, sampled at `frame_rate`.
    pub fn from_keyframes(pivot: Point, radius: f64, keys: &[(f64, f64)], frame_rate: f64) -> Self {
        let Some(&(t_end, _)) = keys.last() else {
            return Self::default();
        };
        let t0 = keys[0].0;
        let frames = ((t_end - t0) * frame_rate).ceil() as usize;
        let angle_at = |t: f64| {
            let k = keys.partition_point(|&(kt, _)| kt <= t);
            if k == 0 {
                return keys[0].1;
            }
            if k == keys.len() {
                return keys[k - 1].1;
            }
            let ((ta, aa), (tb, ab)) = (keys[k - 1], keys[k]);
            aa + (ab - aa) * (t - ta) / (tb - ta)
        };
        let samples = (0..=frames)
            .map(|k| {
                let t = t0 + k as f64 / frame_rate;
                let a = angle_at(t).to_radians();
                FingerSample {
                    t,
                    thumb: pivot,
                    index: Point::new(pivot.x + radius * a.cos(), pivot.y + radius * a.sin()),
                }
            })
            .collect();
        Self { samples }
    }

    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for s in &self.samples {
            writeln!(w, "{},{},{},{},{}", s.t, s.thumb.x, s.thumb.y, s.index.x, s.index.y)?;
        }
        Ok(())
    }

    pub fn read_csv(r: impl BufRead) -> Result<Self, KnobError> {
        let mut lines = r.lines();
        let bad = |msg: String| KnobError::Config(msg);
        match lines.next() {
            Some(Ok(h)) if h.trim() == CSV_HEADER => {}
            _ => return Err(bad(format!("trajectory must start with header {CSV_HEADER:?}"))),
        }
        let mut samples = Vec::new();
        for (n, line) in lines.enumerate() {
            let line = line.map_err(|e| bad(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let v: Vec<f64> = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| bad(format!("trajectory line {}: {e}", n + 2)))?;
            if v.len() != 5 {
                return Err(bad(format!("trajectory line {} has {} fields, expected 5", n + 2, v.len())));
            }
            samples.push(FingerSample {
                t: v[0],
                thumb: Point::new(v[1], v[2]),
                index: Point::new(v[3], v[4]),
            });
        }
        Ok(Self { samples })
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?))
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self, KnobError> {
        let f = std::fs::File::open(path).map_err(|e| KnobError::Config(e.to_string()))?;
        Self::read_csv(std::io::BufReader::new(f))
    }
}

/// A synthetic menu-selection trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioPreset {
    pub condition: Condition,
    pub sectors: usize,
    pub start_sector: i64,
    /// Signed rotation from the start sector centre to the target centre.
    pub distance_deg: f64,
    pub speed_dps: f64,
    /// Extra rotation past the target before turning back.
    pub overshoot_deg: f64,
    pub frame_rate: f64,
    /// Still time before motion starts and after it ends.
    pub hold_s: f64,
}

impl Default for ScenarioPreset {
    fn default() -> Self {
        Self {
            condition: Condition::Detents,
            sectors: 8,
            start_sector: 0,
            distance_deg: 135.0,
            speed_dps: 180.0,
            overshoot_deg: 0.0,
            frame_rate: 60.0,
            hold_s: 0.0,
        }
    }
}

impl ScenarioPreset {
    /// All combinations of the three distances and three menu sizes.
    pub fn grid(condition: Condition, speed_dps: f64) -> Vec<Self> {
        let mut out = Vec::new();
        for distance in [135.0, 270.0, 450.0] {
            for sectors in [8, 16, 32] {
                out.push(Self {
                    condition,
                    sectors,
                    distance_deg: distance,
                    speed_dps,
                    ..Self::default()
                });
            }
        }
        out
    }

    pub fn spec(&self) -> KnobSpec {
        KnobSpec::new(self.sectors)
    }

    pub fn target_sector(&self) -> i64 {
        self.start_sector + (self.distance_deg / self.spec().sector_width()).round() as i64
    }

    pub fn trajectory(&self) -> Trajectory {
        let spec = self.spec();
        let a0 = spec.sector_center(self.start_sector);
        let a1 = spec.sector_center(self.target_sector());
        let sign = (a1 - a0).signum();
        let speed = self.speed_dps.abs();
        let mut keys = vec![(0.0, a0)];
        let mut t = self.hold_s;
        keys.push((t, a0));
        if self.overshoot_deg > 0.0 {
            let peak = a1 + sign * self.overshoot_deg;
            t += (peak - a0).abs() / speed;
            keys.push((t, peak));
            t += self.overshoot_deg / speed;
        } else {
            t += (a1 - a0).abs() / speed;
        }
        keys.push((t, a1));
        if self.hold_s > 0.0 {
            keys.push((t + self.hold_s, a1));
        }
        keys.dedup_by(|b, a| b.0 == a.0);
        Trajectory::from_keyframes(Point::new(0.0, 0.0), 50.0, &keys, self.frame_rate)
    }
}

/// Outcome measures of one trial. Times are relative to the first sample.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ScenarioMetrics {
    /// Time of the last moving sample.
    pub completion_time_s: f64,
    /// Number of times the knob left the target sector.
    pub overshoots: usize,
    /// From the first exit of the target to the final entry; zero without overshoot.
    pub recovery_time_s: f64,
    pub crossings: usize,
    pub final_sector: i64,
    pub reached_target: bool,
}

/// Metrics plus everything the session produced.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioOutcome {
    pub metrics: ScenarioMetrics,
    pub crossings: Vec<Crossing>,
    /// Electrode samples at `sample_rate`.
    pub waveform: Vec<f64>,
    pub sample_rate: f64,
    pub frequency_trace: Vec<(f64, f64)>,
}

/// Replay `traj` through a knob session and score the selection of `target`.
///
/// Fails with [`KnobError::Timeout`] carrying partial metrics when the
/// session does not end inside the target sector.
pub fn run_knob_scenario(
    spec: KnobSpec,
    condition: Condition,
    cfg: &KnobConfig,
    traj: &Trajectory,
    start_sector: i64,
    target_sector: i64,
) -> Result<ScenarioOutcome, KnobError> {
    let first = traj
        .samples
        .first()
        .ok_or_else(|| KnobError::Config("trajectory is empty".into()))?;
    let mut session = KnobSession::new(spec, condition, cfg.clone())?;
    let mut waveform = Vec::new();
    let mut last_motion = first.t;
    let mut prev_angle = None;
    for s in &traj.samples {
        let seg = session.knob_step(s.t, s.thumb, s.index)?;
        waveform.extend(seg.samples);
        if prev_angle.is_none() && session.sector() != start_sector {
            return Err(KnobError::Config(format!(
                "trajectory starts in sector {}, expected {start_sector}",
                session.sector()
            )));
        }
        if prev_angle.is_some_and(|a: f64| (session.angle_deg() - a).abs() > 1e-9) {
            last_motion = s.t;
        }
        prev_angle = Some(session.angle_deg());
    }
    waveform.extend(session.finish().samples);

    let t0 = first.t;
    let crossings = session.crossings().to_vec();
    let first_miss = crossings.iter().find(|c| c.from == target_sector).map(|c| c.time_s);
    let final_entry = crossings.iter().rev().find(|c| c.to == target_sector).map(|c| c.time_s);
    let reached = session.sector() == target_sector;
    let metrics = ScenarioMetrics {
        completion_time_s: last_motion - t0,
        overshoots: crossings.iter().filter(|c| c.from == target_sector).count(),
        recovery_time_s: match (first_miss, final_entry) {
            (Some(m), Some(e)) if reached && e > m => e - m,
            _ => 0.0,
        },
        crossings: crossings.len(),
        final_sector: session.sector(),
        reached_target: reached,
    };
    if !reached {
        return Err(KnobError::Timeout(Box::new(metrics)));
    }
    Ok(ScenarioOutcome {
        metrics,
        crossings,
        waveform,
        sample_rate: cfg.sample_rate,
        frequency_trace: session.frequency_trace().to_vec(),
    })
}

impl ScenarioPreset {
    pub fn run(&self, cfg: &KnobConfig) -> Result<ScenarioOutcome, KnobError> {
        run_knob_scenario(
            self.spec(),
            self.condition,
            cfg,
            &self.trajectory(),
            self.start_sector,
            self.target_sector(),
        )
    }
}
