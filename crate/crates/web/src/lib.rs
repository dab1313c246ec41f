//! Browser bindings for the surface haptics engine.
//!
//! Results are returned as JSON strings; failures come back as
//! `{"error": "..."}` so the page can show them inline.

use serde::Serialize;
use serde_json::json;
use wasm_bindgen::prelude::*;

use surfhap_core::electro::{Condition, ScenarioPreset};
use surfhap_core::flowlut::{build_lookup, plan_point_flow, ExcitationLookup, FlowOptions, FlowStimulus, SensitivityCurve};
use surfhap_core::platesim::seeded_map;
use surfhap_core::{Actuator, Point, VibrationMap};

const PREVIEW_POINTS: usize = 600;

fn error(msg: impl std::fmt::Display) -> String {
    json!({ "error": msg.to_string() }).to_string()
}

/// Peak-hold decimation of `samples` to at most `n` (min, max) pairs.
fn preview(samples: &[f64], n: usize) -> Vec<[f64; 2]> {
    if samples.is_empty() {
        return Vec::new();
    }
    let per = samples.len().div_ceil(n).max(1);
    samples
        .chunks(per)
        .map(|c| {
            let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            [lo, hi]
        })
        .collect()
}

#[derive(Serialize)]
struct Extent {
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
    rows: usize,
    cols: usize,
    spacing: f64,
}

/// A synthetic plate with its lookup table.
#[wasm_bindgen]
pub struct Demo {
    map: VibrationMap,
    lut: ExcitationLookup,
    sens: SensitivityCurve,
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u32) -> Demo {
        let map = seeded_map(seed as u64);
        let sens = SensitivityCurve::default();
        let lut = build_lookup(&map, &sens);
        Demo { map, lut, sens }
    }

    /// Grid rectangle in mm as JSON.
    pub fn extent(&self) -> String {
        let g = self.map.grid();
        let far = g.extent();
        serde_json::to_string(&Extent {
            x0: g.origin.x,
            y0: g.origin.y,
            x1: far.x,
            y1: far.y,
            rows: g.rows,
            cols: g.cols,
            spacing: g.spacing,
        })
        .unwrap()
    }

    /// Sensation level in dB on an `nx` x `ny` raster over the grid, row-major,
    /// for one actuator case driven at `drive_v` and `freq_hz`.
    pub fn sensation_field(&self, actuator: &str, freq_hz: f64, drive_v: f64, nx: usize, ny: usize) -> Vec<f64> {
        let Ok(act) = actuator.parse::<Actuator>() else {
            return Vec::new();
        };
        let bin = self.map.axis().nearest_bin(freq_hz);
        let hz = self.map.axis().freq(bin);
        let g = self.map.grid();
        let far = g.extent();
        let (nx, ny) = (nx.max(2), ny.max(2));
        let mut out = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            let y = g.origin.y + (far.y - g.origin.y) * j as f64 / (ny - 1) as f64;
            for i in 0..nx {
                let x = g.origin.x + (far.x - g.origin.x) * i as f64 / (nx - 1) as f64;
                let level = match self.map.stencil(Point::new(x, y)) {
                    Ok(s) => self.sens.sensation_level(drive_v * self.map.sample(&s, act, bin), hz),
                    Err(_) => f64::NAN,
                };
                out.push(level);
            }
        }
        out
    }

    /// Two-part flow from one point to another: plan plus a waveform preview.
    pub fn flow(&self, from_x: f64, from_y: f64, to_x: f64, to_y: f64, drive_v: f64) -> String {
        let opts = FlowOptions {
            drive_v,
            ..FlowOptions::default()
        };
        let plan = match plan_point_flow(
            &self.lut,
            &self.map,
            &self.sens,
            Point::new(from_x, from_y),
            Point::new(to_x, to_y),
            &opts,
        ) {
            Ok(p) => p,
            Err(e) => return error(e),
        };
        let stim = match FlowStimulus::render(plan, 8000.0) {
            Ok(s) => s,
            Err(e) => return error(e),
        };
        json!({
            "plan": stim.plan,
            "duration_s": stim.rendered.duration(),
            "preview": preview(&stim.rendered.piezo, PREVIEW_POINTS),
        })
        .to_string()
    }

    /// Replay a synthetic menu selection on the electrostatic knob.
    pub fn knob(&self, condition: &str, sectors: usize, distance_deg: f64, speed_dps: f64, overshoot_deg: f64) -> String {
        knob_trial(condition, sectors, distance_deg, speed_dps, overshoot_deg)
    }
}

fn knob_trial(condition: &str, sectors: usize, distance_deg: f64, speed_dps: f64, overshoot_deg: f64) -> String {
    let condition: Condition = match condition.parse() {
        Ok(c) => c,
        Err(e) => return error(e),
    };
    if sectors == 0 || !(speed_dps > 0.0) {
        return error("sectors and speed must be positive");
    }
    let preset = ScenarioPreset {
        condition,
        sectors,
        distance_deg,
        speed_dps,
        overshoot_deg: overshoot_deg.max(0.0),
        hold_s: 0.1,
        ..ScenarioPreset::default()
    };
    let cfg = surfhap_core::electro::KnobConfig {
        sample_rate: 8000.0,
        ..Default::default()
    };
    match preset.run(&cfg) {
        Ok(o) => json!({
            "metrics": o.metrics,
            "crossings": o.crossings,
            "target": preset.target_sector(),
            "duration_s": o.waveform.len() as f64 / o.sample_rate,
            "preview": preview(&o.waveform, PREVIEW_POINTS),
            "carrier": o.frequency_trace,
        })
        .to_string(),
        Err(e) => error(e),
    }
}
