use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{record_between, ExcitationLookup, FlowError, LookupRecord, SensitivityCurve};
use crate::geom::Point;
use crate::vibmap::{Actuator, VibrationMap};
use crate::waveform::{Rendered, RouteSegment};

/// One constant-frequency tone of a flow stimulus.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StimulusPart {
    pub actuator: Actuator,
    pub freq_hz: f64,
    /// Peak volts.
    pub amplitude_v: f64,
    pub duration_s: f64,
    /// Length of the linear fade at each end.
    pub ramp_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowOptions {
    pub part_duration_s: f64,
    pub ramp_s: f64,
    /// Drive voltage available to the louder part, Vp.
    pub drive_v: f64,
    pub max_drive_v: f64,
    pub margin_db: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            part_duration_s: 1.5,
            ramp_s: 0.05,
            drive_v: super::DEFAULT_DRIVE_V,
            max_drive_v: 100.0,
            margin_db: 0.0,
        }
    }
}

/// Two-part point-to-point flow: part 1 favours `from`, part 2 favours `to`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowPlan {
    pub from: Point,
    pub to: Point,
    pub parts: [StimulusPart; 2],
    /// `(from -> to)` and `(to -> from)` records used for the two parts.
    pub records: [LookupRecord; 2],
    /// FRF magnitude of each part's active point at its frequency, um/Vp.
    pub active_gain: [f64; 2],
    /// Sensation level of each part at its active point, dB.
    pub sensation_db: [f64; 2],
}

/// A plan together with its rendered samples.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowStimulus {
    pub plan: FlowPlan,
    pub rendered: Rendered,
}

fn grid_index(map: &VibrationMap, p: Point) -> Option<usize> {
    (1..=map.point_count()).find(|&i| map.grid().point(i).distance(p) < 1e-9)
}

fn pair_record(
    lut: &ExcitationLookup,
    map: &VibrationMap,
    sens: &SensitivityCurve,
    active: Point,
    passive: Point,
) -> Result<LookupRecord, FlowError> {
    match (grid_index(map, active), grid_index(map, passive)) {
        (Some(a), Some(p)) => Ok(*lut.record(a, p)?),
        _ => record_between(map, sens, lut.config(), active, passive),
    }
}

/// Plan a flow from `from` to `to` and equalise the two parts so both present
/// the same sensation level at their active points.
pub fn plan_point_flow(
    lut: &ExcitationLookup,
    map: &VibrationMap,
    sens: &SensitivityCurve,
    from: Point,
    to: Point,
    opts: &FlowOptions,
) -> Result<FlowPlan, FlowError> {
    if from.distance(to) < 1e-9 {
        return Err(FlowError::Coincident);
    }
    lut.check_map(map)?;
    for p in [from, to] {
        map.stencil(p)?;
    }
    if !(opts.drive_v > 0.0 && opts.drive_v <= opts.max_drive_v) {
        return Err(FlowError::Config(format!(
            "drive {} V must lie in (0, {}]",
            opts.drive_v, opts.max_drive_v
        )));
    }
    let forward = pair_record(lut, map, sens, from, to)?;
    let backward = pair_record(lut, map, sens, to, from)?;

    let mut gains = [0.0; 2];
    let mut levels = [0.0; 2];
    for (k, (rec, active, passive)) in [(forward, from, to), (backward, to, from)].into_iter().enumerate() {
        let gain = map.interpolate_frf(active, rec.actuator)?.magnitudes()[rec.bin];
        let level = sens.sensation_level(gain * opts.drive_v, rec.freq_hz);
        if !(rec.feasible && rec.max_diff > 0.0 && level >= opts.margin_db) {
            return Err(FlowError::NoDiscriminatingExcitation { active, passive });
        }
        gains[k] = gain;
        levels[k] = level;
    }

    // The quieter part runs at full drive, the louder one is attenuated.
    let target = levels[0].min(levels[1]);
    let parts = [0, 1].map(|k| {
        let rec = if k == 0 { forward } else { backward };
        let volts = sens.displacement_at_level(target, rec.freq_hz) / gains[k];
        StimulusPart {
            actuator: rec.actuator,
            freq_hz: rec.freq_hz,
            amplitude_v: volts.min(opts.drive_v),
            duration_s: opts.part_duration_s,
            ramp_s: opts.ramp_s,
        }
    });
    let sensation_db = [0, 1].map(|k| sens.sensation_level(parts[k].amplitude_v * gains[k], parts[k].freq_hz));
    Ok(FlowPlan {
        from,
        to,
        parts,
        records: [forward, backward],
        active_gain: gains,
        sensation_db,
    })
}

/// Render parts back to back on the piezo channel.
///
/// Each part is `A * env(t) * sin(2 pi f t)` with `t` measured from the part
/// start and `env` a trapezoid rising over `ramp_s` and falling over the last
/// `ramp_s`. The relay route switches to the part's actuator for its span.
pub fn render_stimulus(parts: &[StimulusPart], sample_rate: f64) -> Result<Rendered, FlowError> {
    if !(sample_rate > 0.0) {
        return Err(FlowError::Config("sample rate must be positive".into()));
    }
    let mut out = Rendered {
        sample_rate,
        ..Rendered::default()
    };
    for part in parts {
        if !(part.duration_s > 0.0) || part.ramp_s < 0.0 {
            return Err(FlowError::Config("part duration must be positive and ramp non-negative".into()));
        }
        if part.ramp_s > part.duration_s / 2.0 {
            return Err(FlowError::Config(format!(
                "ramp {} s exceeds half the part duration {} s",
                part.ramp_s, part.duration_s
            )));
        }
        if !(part.amplitude_v.is_finite() && part.amplitude_v >= 0.0) {
            return Err(FlowError::Config("amplitude must be finite and non-negative".into()));
        }
        let n = (part.duration_s * sample_rate).round() as usize;
        let start = out.piezo.len();
        out.piezo.extend((0..n).map(|k| {
            let t = k as f64 / sample_rate;
            part.amplitude_v * trapezoid(t, part.duration_s, part.ramp_s) * (2.0 * PI * part.freq_hz * t).sin()
        }));
        out.routes.push(RouteSegment {
            start,
            end: start + n,
            actuator: part.actuator,
        });
    }
    out.electrostatic = vec![0.0; out.piezo.len()];
    Ok(out)
}

/// Unit trapezoid envelope of a part at local time `t`.
pub(crate) fn trapezoid(t: f64, duration: f64, ramp: f64) -> f64 {
    if ramp <= 0.0 {
        return 1.0;
    }
    (t / ramp).min((duration - t) / ramp).clamp(0.0, 1.0)
}

impl FlowStimulus {
    pub fn render(plan: FlowPlan, sample_rate: f64) -> Result<Self, FlowError> {
        let rendered = render_stimulus(&plan.parts, sample_rate)?;
        Ok(Self { plan, rendered })
    }
}
