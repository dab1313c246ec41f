//! Excitation lookup tables and point-to-point vibrotactile flow.
//!
//! For an ordered pair of grid points (active, passive) the table stores the
//! largest displacement difference `|H_active| - |H_passive|` over every
//! actuator case and frequency bin, together with the frequency and actuator
//! that achieve it. Ties go to the lowest frequency, then to the actuator
//! order PA < PB < PC < PD < PALL.

mod sensitivity;
mod stimulus;

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use sensitivity::{SensitivityCurve, SensitivityError};
pub use stimulus::{
    plan_point_flow, render_stimulus, FlowOptions, FlowPlan, FlowStimulus, StimulusPart,
};

use crate::geom::Point;
use crate::vibmap::{Actuator, FreqAxis, MapError, VibrationMap};

/// Default peak drive voltage.
pub const DEFAULT_DRIVE_V: f64 = 100.0;

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("flow is undefined between coincident points")]
    Coincident,
    #[error("no discriminating excitation from {active} to {passive}")]
    NoDiscriminatingExcitation { active: Point, passive: Point },
    #[error("grid index {index} outside 1..={max}")]
    Index { index: usize, max: usize },
    #[error("invalid stimulus: {0}")]
    Config(String),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("lookup table was built for a different map ({0})")]
    Mismatch(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Best excitation for one ordered pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LookupRecord {
    /// um/Vp
    pub max_diff: f64,
    pub bin: usize,
    pub freq_hz: f64,
    pub actuator: Actuator,
    pub feasible: bool,
}

/// Feasibility settings used when building a table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LookupConfig {
    pub drive_v: f64,
    /// Required sensation level of the active point, dB above threshold.
    pub margin_db: f64,
}

impl Default for LookupConfig {
    fn default() -> Self {
        Self {
            drive_v: DEFAULT_DRIVE_V,
            margin_db: 0.0,
        }
    }
}

/// Argmax of `active - passive` over bins (outer, ascending) and actuators
/// (inner, canonical order); strict comparison keeps the first maximum.
///
/// Returns `(max_diff, bin, actuator)`.
pub fn best_difference(active: [&[f64]; 5], passive: [&[f64]; 5]) -> (f64, usize, Actuator) {
    let bins = active[0].len();
    let mut best = (f64::NEG_INFINITY, 0, Actuator::PA);
    for b in 0..bins {
        for a in Actuator::ALL {
            let d = active[a.index()][b] - passive[a.index()][b];
            if d > best.0 {
                best = (d, b, a);
            }
        }
    }
    best
}

fn record_for(
    active: [&[f64]; 5],
    passive: [&[f64]; 5],
    axis: &FreqAxis,
    sens: &SensitivityCurve,
    cfg: &LookupConfig,
) -> LookupRecord {
    let (max_diff, bin, actuator) = best_difference(active, passive);
    let freq_hz = axis.freq(bin);
    let level = sens.sensation_level(active[actuator.index()][bin] * cfg.drive_v, freq_hz);
    LookupRecord {
        max_diff,
        bin,
        freq_hz,
        actuator,
        feasible: max_diff > 0.0 && level >= cfg.margin_db,
    }
}

/// Excitation lookup over every ordered pair of grid points.
#[derive(Clone, Debug, PartialEq)]
pub struct ExcitationLookup {
    points: usize,
    axis: FreqAxis,
    config: LookupConfig,
    /// Row-major `(active - 1) * points + (passive - 1)`; the diagonal is unused.
    records: Vec<LookupRecord>,
}

const DIAGONAL: LookupRecord = LookupRecord {
    max_diff: 0.0,
    bin: 0,
    freq_hz: 0.0,
    actuator: Actuator::PA,
    feasible: false,
};

/// Build the table for `map` with default feasibility settings.
pub fn build_lookup(map: &VibrationMap, sens: &SensitivityCurve) -> ExcitationLookup {
    build_lookup_with(map, sens, &LookupConfig::default())
}

pub fn build_lookup_with(map: &VibrationMap, sens: &SensitivityCurve, cfg: &LookupConfig) -> ExcitationLookup {
    let n = map.point_count();
    let axis = *map.axis();
    let curves = |i: usize| Actuator::ALL.map(|a| map.magnitudes(i, a));
    let row = |active: usize| -> Vec<LookupRecord> {
        let act = curves(active);
        (1..=n)
            .map(|passive| {
                if passive == active {
                    DIAGONAL
                } else {
                    record_for(act, curves(passive), &axis, sens, cfg)
                }
            })
            .collect()
    };
    #[cfg(feature = "parallel")]
    let rows: Vec<Vec<LookupRecord>> = {
        use rayon::prelude::*;
        (1..=n).into_par_iter().map(row).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Vec<LookupRecord>> = (1..=n).map(row).collect();
    ExcitationLookup {
        points: n,
        axis,
        config: *cfg,
        records: rows.into_iter().flatten().collect(),
    }
}

/// Record for an arbitrary (possibly off-grid) pair, from interpolated FRFs.
pub fn record_between(
    map: &VibrationMap,
    sens: &SensitivityCurve,
    cfg: &LookupConfig,
    active: Point,
    passive: Point,
) -> Result<LookupRecord, FlowError> {
    let a = map.interpolate_all(active)?;
    let p = map.interpolate_all(passive)?;
    Ok(record_for(
        a.each_ref().map(|c| c.magnitudes()),
        p.each_ref().map(|c| c.magnitudes()),
        map.axis(),
        sens,
        cfg,
    ))
}

/// `active - passive` for one actuator, bin by bin.
pub fn difference_curve(map: &VibrationMap, active: usize, passive: usize, actuator: Actuator) -> Result<Vec<f64>, FlowError> {
    let a = map.curve(active, actuator)?;
    let p = map.curve(passive, actuator)?;
    Ok(a.magnitudes().iter().zip(p.magnitudes()).map(|(x, y)| x - y).collect())
}

/// CSV of the five difference curves of a pair: `freq_hz,PA,PB,PC,PD,PALL`.
pub fn write_difference_csv(map: &VibrationMap, active: usize, passive: usize, mut w: impl Write) -> Result<(), FlowError> {
    let diffs = Actuator::ALL
        .iter()
        .map(|&a| difference_curve(map, active, passive, a))
        .collect::<Result<Vec<_>, _>>()?;
    writeln!(w, "freq_hz,PA,PB,PC,PD,PALL")?;
    for b in 0..map.axis().count {
        write!(w, "{}", map.axis().freq(b))?;
        for d in &diffs {
            write!(w, ",{}", d[b])?;
        }
        writeln!(w)?;
    }
    Ok(())
}

impl ExcitationLookup {
    pub fn points(&self) -> usize {
        self.points
    }

    pub fn axis(&self) -> &FreqAxis {
        &self.axis
    }

    pub fn config(&self) -> &LookupConfig {
        &self.config
    }

    pub fn record(&self, active: usize, passive: usize) -> Result<&LookupRecord, FlowError> {
        for index in [active, passive] {
            if index == 0 || index > self.points {
                return Err(FlowError::Index {
                    index,
                    max: self.points,
                });
            }
        }
        if active == passive {
            return Err(FlowError::Coincident);
        }
        Ok(&self.records[(active - 1) * self.points + (passive - 1)])
    }

    /// Every off-diagonal record as `(active, passive, record)`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &LookupRecord)> {
        self.records.iter().enumerate().filter_map(move |(k, r)| {
            let (a, p) = (k / self.points + 1, k % self.points + 1);
            (a != p).then_some((a, p, r))
        })
    }

    pub fn check_map(&self, map: &VibrationMap) -> Result<(), FlowError> {
        if map.point_count() != self.points || map.axis() != &self.axis {
            return Err(FlowError::Mismatch(format!(
                "table has {} points, map has {}",
                self.points,
                map.point_count()
            )));
        }
        Ok(())
    }

    pub fn write_to(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "surfhap-lut 1")?;
        writeln!(w, "points {}", self.points)?;
        writeln!(w, "axis_hz {} {} {}", self.axis.start_hz, self.axis.step_hz, self.axis.count)?;
        writeln!(w, "drive_v {}", self.config.drive_v)?;
        writeln!(w, "margin_db {}", self.config.margin_db)?;
        writeln!(w, "# active passive max_diff_um_per_vp freq_hz actuator feasible")?;
        for (a, p, r) in self.iter() {
            writeln!(w, "{a} {p} {} {} {} {}", r.max_diff, r.freq_hz, r.actuator, u8::from(r.feasible))?;
        }
        Ok(())
    }

    pub fn read_from(r: impl BufRead) -> Result<Self, FlowError> {
        let perr = |line: usize, message: String| FlowError::Parse { line, message };
        let mut lines = r.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut header = |key: &str, n: usize| -> Result<(usize, Vec<String>), FlowError> {
            let (no, line) = lines.next().ok_or_else(|| perr(0, format!("missing `{key}` header")))?;
            let line = line?;
            let mut parts = line.split_whitespace();
            if parts.next() != Some(key) {
                return Err(perr(no, format!("expected `{key}` header")));
            }
            let v: Vec<String> = parts.map(str::to_string).collect();
            if v.len() != n {
                return Err(perr(no, format!("`{key}` takes {n} value(s)")));
            }
            Ok((no, v))
        };
        let (no, v) = header("surfhap-lut", 1)?;
        if v[0] != "1" {
            return Err(perr(no, format!("unsupported version `{}`", v[0])));
        }
        fn num<T: std::str::FromStr>(line: usize, s: &str) -> Result<T, FlowError> {
            s.parse().map_err(|_| FlowError::Parse {
                line,
                message: format!("malformed value `{s}`"),
            })
        }
        let (no, v) = header("points", 1)?;
        let points: usize = num(no, &v[0])?;
        let (no, v) = header("axis_hz", 3)?;
        let axis = FreqAxis::new(num(no, &v[0])?, num(no, &v[1])?, num(no, &v[2])?);
        let (no, v) = header("drive_v", 1)?;
        let drive_v = num(no, &v[0])?;
        let (no, v) = header("margin_db", 1)?;
        let margin_db = num(no, &v[0])?;

        let mut records = vec![DIAGONAL; points * points];
        let mut seen = vec![false; points * points];
        let mut count = 0usize;
        for (no, line) in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 6 {
                return Err(perr(no, "record needs 6 fields".into()));
            }
            let (a, p): (usize, usize) = (num(no, f[0])?, num(no, f[1])?);
            if a == 0 || p == 0 || a > points || p > points || a == p {
                return Err(perr(no, format!("invalid pair {a} -> {p}")));
            }
            let k = (a - 1) * points + (p - 1);
            if seen[k] {
                return Err(perr(no, format!("duplicate pair {a} -> {p}")));
            }
            let freq_hz: f64 = num(no, f[3])?;
            let bin = axis
                .bin_of(freq_hz)
                .ok_or_else(|| perr(no, format!("frequency {freq_hz} is not on the axis")))?;
            let feasible = match f[5] {
                "1" => true,
                "0" => false,
                other => return Err(perr(no, format!("feasible flag must be 0 or 1, got `{other}`"))),
            };
            records[k] = LookupRecord {
                max_diff: num(no, f[2])?,
                bin,
                freq_hz,
                actuator: f[4].parse().map_err(|e: String| perr(no, e))?,
                feasible,
            };
            seen[k] = true;
            count += 1;
        }
        let expected = points * points.saturating_sub(1);
        if count != expected {
            return Err(perr(0, format!("expected {expected} records, found {count}")));
        }
        Ok(Self {
            points,
            axis,
            config: LookupConfig { drive_v, margin_db },
            records,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), FlowError> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, FlowError> {
        Self::read_from(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}
