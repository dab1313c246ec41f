//! Directional vibrotactile flow under a hand.
//!
//! The hand covers a square region split into 3 x 3 squares `s_ij`
//! (`i` = column from the left, `j` = row from the top), each sampled on a
//! 15 x 15 cell-centred subgrid. A square is active for an excitation when
//! at least 113 of its 225 subgrid points vibrate at three JNDs or more above
//! the detection threshold.
//!
//! A flow needs two excitations. For a left-to-right flow the first must
//! activate at least one square of the left column, none of the right
//! column, and be mirror-symmetric top/bottom about the horizontal line
//! through the region centre; the second is the mirror image with left and
//! right exchanged. Vertical flows swap the roles of rows and columns.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::flowlut::{render_stimulus, FlowError, SensitivityCurve, StimulusPart};
use crate::geom::Point;
use crate::vibmap::{Actuator, FreqAxis, MapError, Stencil, VibrationMap};
use crate::waveform::Rendered;

pub const SQUARES: usize = 3;
pub const SUBGRID: usize = 15;
/// At least half of the 225 subgrid points of a square.
pub const ACTIVE_MIN_POINTS: usize = (SUBGRID * SUBGRID + 1) / 2;
/// Level slack for the inclusive boundary comparison.
const LEVEL_EPS_DB: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum HandFlowError {
    #[error("hand region {0} does not fit inside the instrumented grid")]
    Geometry(String),
    #[error("{0} Hz is not a bin of the map's frequency axis")]
    OffAxis(f64),
    #[error("no feasible excitation for {direction} part {part}; closest candidates: {near_misses}")]
    NoFeasible {
        direction: Direction,
        part: usize,
        near_misses: String,
    },
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Render(#[from] FlowError),
}

/// Square hand region centred at `center`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HandRegion {
    pub center: Point,
    /// Side length, mm.
    pub side: f64,
}

impl HandRegion {
    pub fn new(center: Point) -> Self {
        Self { center, side: 120.0 }
    }

    /// Subgrid point `(u, v)` of square `(col, row)`, all 0-based.
    pub fn subgrid_point(&self, col: usize, row: usize, u: usize, v: usize) -> Point {
        let sq = self.side / SQUARES as f64;
        let cell = sq / SUBGRID as f64;
        let x0 = self.center.x - self.side / 2.0 + col as f64 * sq;
        let y0 = self.center.y - self.side / 2.0 + row as f64 * sq;
        Point::new(x0 + (u as f64 + 0.5) * cell, y0 + (v as f64 + 0.5) * cell)
    }

    /// All 2025 subgrid points in global row-major order (45 x 45).
    pub fn points(&self) -> Vec<Point> {
        let n = SQUARES * SUBGRID;
        (0..n)
            .flat_map(|gy| (0..n).map(move |gx| (gx, gy)))
            .map(|(gx, gy)| self.subgrid_point(gx / SUBGRID, gy / SUBGRID, gx % SUBGRID, gy % SUBGRID))
            .collect()
    }

    fn check(&self, map: &VibrationMap) -> Result<(), HandFlowError> {
        let h = self.side / 2.0;
        let corners = [
            Point::new(self.center.x - h, self.center.y - h),
            Point::new(self.center.x + h, self.center.y + h),
        ];
        if !(self.side > 0.0) || corners.iter().any(|&c| !map.grid().contains(c)) {
            return Err(HandFlowError::Geometry(format!("centred at {} with side {}", self.center, self.side)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Direction {
    LeftToRight,
    RightToLeft,
    UpToDown,
    DownToUp,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::LeftToRight,
        Direction::RightToLeft,
        Direction::UpToDown,
        Direction::DownToUp,
    ];

    pub fn reversed(self) -> Self {
        match self {
            Direction::LeftToRight => Direction::RightToLeft,
            Direction::RightToLeft => Direction::LeftToRight,
            Direction::UpToDown => Direction::DownToUp,
            Direction::DownToUp => Direction::UpToDown,
        }
    }

    fn horizontal(self) -> bool {
        matches!(self, Direction::LeftToRight | Direction::RightToLeft)
    }

    /// `(source, destination)` line index for the first part: a column for
    /// horizontal flow, a row for vertical flow.
    fn source_destination(self) -> (usize, usize) {
        match self {
            Direction::LeftToRight | Direction::UpToDown => (0, 2),
            Direction::RightToLeft | Direction::DownToUp => (2, 0),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::LeftToRight => "L->R",
            Direction::RightToLeft => "R->L",
            Direction::UpToDown => "U->D",
            Direction::DownToUp => "D->U",
        })
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace("->", "2").as_str() {
            "l2r" | "lr" => Ok(Direction::LeftToRight),
            "r2l" | "rl" => Ok(Direction::RightToLeft),
            "u2d" | "ud" => Ok(Direction::UpToDown),
            "d2u" | "du" => Ok(Direction::DownToUp),
            other => Err(format!("unknown direction `{other}` (use l2r, r2l, u2d, d2u)")),
        }
    }
}

/// Per-square activity: `active[col][row]` and the passing subgrid counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Activity {
    pub active: [[bool; SQUARES]; SQUARES],
    pub counts: [[usize; SQUARES]; SQUARES],
}

impl Activity {
    fn from_counts(counts: [[usize; SQUARES]; SQUARES]) -> Self {
        Self {
            active: counts.map(|col| col.map(|c| c >= ACTIVE_MIN_POINTS)),
            counts,
        }
    }

    /// Number of the three flow rules violated by this activity when used as
    /// part `part` (1 or 2) of a flow in `direction`.
    pub fn violations(&self, direction: Direction, part: usize) -> usize {
        let (mut src, mut dst) = direction.source_destination();
        if part == 2 {
            std::mem::swap(&mut src, &mut dst);
        }
        let at = |line: usize, k: usize| -> bool {
            if direction.horizontal() {
                self.active[line][k]
            } else {
                self.active[k][line]
            }
        };
        let source_on = (0..SQUARES).any(|k| at(src, k));
        let destination_off = (0..SQUARES).all(|k| !at(dst, k));
        // Horizontal flow: rows 1 and 3 must match in every column.
        let symmetric = (0..SQUARES).all(|line| at(line, 0) == at(line, 2));
        [source_on, destination_off, symmetric].iter().filter(|ok| !**ok).count()
    }

    pub fn satisfies(&self, direction: Direction, part: usize) -> bool {
        self.violations(direction, part) == 0
    }
}

/// Interpolation stencils for the 2025 subgrid points of a region, grouped
/// by square.
pub struct RegionSampler<'a> {
    map: &'a VibrationMap,
    /// `stencils[col][row]` holds the 225 stencils of square `(col, row)`.
    stencils: Vec<Vec<Vec<Stencil>>>,
}

impl<'a> RegionSampler<'a> {
    pub fn new(map: &'a VibrationMap, region: &HandRegion) -> Result<Self, HandFlowError> {
        region.check(map)?;
        let mut stencils = vec![vec![Vec::with_capacity(SUBGRID * SUBGRID); SQUARES]; SQUARES];
        for (col, column) in stencils.iter_mut().enumerate() {
            for (row, square) in column.iter_mut().enumerate() {
                for v in 0..SUBGRID {
                    for u in 0..SUBGRID {
                        square.push(map.stencil(region.subgrid_point(col, row, u, v))?);
                    }
                }
            }
        }
        Ok(Self { map, stencils })
    }

    /// Square activity for one excitation given by its axis bin.
    pub fn activity(&self, sens: &SensitivityCurve, actuator: Actuator, bin: usize, drive_v: f64) -> Activity {
        let f = self.map.axis().freq(bin);
        let required = 3.0 * sens.jnd_db() - LEVEL_EPS_DB;
        let mut counts = [[0usize; SQUARES]; SQUARES];
        for (col, column) in self.stencils.iter().enumerate() {
            for (row, square) in column.iter().enumerate() {
                counts[col][row] = square
                    .iter()
                    .filter(|s| {
                        let d = drive_v * self.map.sample(s, actuator, bin);
                        d > 0.0 && sens.sensation_level(d, f) >= required
                    })
                    .count();
            }
        }
        Activity::from_counts(counts)
    }
}

/// Which squares are active for excitation `(actuator, freq_hz)` at `drive_v`.
pub fn square_activity(
    map: &VibrationMap,
    sens: &SensitivityCurve,
    region: &HandRegion,
    actuator: Actuator,
    freq_hz: f64,
    drive_v: f64,
) -> Result<Activity, HandFlowError> {
    let bin = map.axis().bin_of(freq_hz).ok_or(HandFlowError::OffAxis(freq_hz))?;
    Ok(RegionSampler::new(map, region)?.activity(sens, actuator, bin, drive_v))
}

/// One excitation of a hand flow.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HandFlowPart {
    pub actuator: Actuator,
    pub freq_hz: f64,
    pub drive_v: f64,
    pub activity: Activity,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HandFlowPlan {
    pub direction: Direction,
    pub region: HandRegion,
    pub parts: [HandFlowPart; 2],
}

/// Candidate excitations in search order: ascending frequency, then actuator.
#[derive(Clone, Debug, PartialEq)]
pub struct Candidates {
    pub bins: Vec<usize>,
    pub actuators: Vec<Actuator>,
}

impl Candidates {
    /// Every axis bin in [20, 625] Hz with all five actuator cases.
    pub fn default_for(axis: &FreqAxis) -> Self {
        Self {
            bins: (0..axis.count)
                .filter(|&b| (20.0..=625.0).contains(&axis.freq(b)))
                .collect(),
            actuators: Actuator::ALL.to_vec(),
        }
    }
}

pub fn plan_hand_flow(
    map: &VibrationMap,
    sens: &SensitivityCurve,
    region: &HandRegion,
    direction: Direction,
    candidates: &Candidates,
    drive_v: f64,
) -> Result<HandFlowPlan, HandFlowError> {
    let sampler = RegionSampler::new(map, region)?;
    let mut order: Vec<(usize, Actuator)> = candidates
        .bins
        .iter()
        .flat_map(|&b| candidates.actuators.iter().map(move |&a| (b, a)))
        .collect();
    order.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.cmp(&y.1)));
    order.dedup();

    // Candidates are scored in chunks until both parts have a match.
    const CHUNK: usize = 64;
    let eval = |&(bin, act): &(usize, Actuator)| sampler.activity(sens, act, bin, drive_v);
    let mut evaluated: Vec<Activity> = Vec::with_capacity(order.len());
    let mut found: [Option<usize>; 2] = [None, None];
    for chunk in order.chunks(CHUNK) {
        #[cfg(feature = "parallel")]
        let scored: Vec<Activity> = {
            use rayon::prelude::*;
            chunk.par_iter().map(eval).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let scored: Vec<Activity> = chunk.iter().map(eval).collect();
        let offset = evaluated.len();
        evaluated.extend(scored);
        for (slot, part) in found.iter_mut().zip([1, 2]) {
            if slot.is_none() {
                *slot = evaluated[offset..].iter().position(|a| a.satisfies(direction, part)).map(|k| k + offset);
            }
        }
        if found.iter().all(Option::is_some) {
            break;
        }
    }

    let mut parts = Vec::with_capacity(2);
    for part in [1, 2] {
        match found[part - 1] {
            Some(k) => {
                let (bin, actuator) = order[k];
                parts.push(HandFlowPart {
                    actuator,
                    freq_hz: map.axis().freq(bin),
                    drive_v,
                    activity: evaluated[k],
                });
            }
            None => {
                let mut ranked: Vec<(usize, usize)> = evaluated
                    .iter()
                    .enumerate()
                    .map(|(k, a)| (a.violations(direction, part), k))
                    .collect();
                ranked.sort();
                let near_misses = ranked
                    .iter()
                    .take(3)
                    .map(|&(v, k)| {
                        let (bin, act) = order[k];
                        format!("{act}@{}Hz ({v} rule(s) broken)", map.axis().freq(bin))
                    })
                    .collect::<Vec<_>>()
                    .join(", ");
                return Err(HandFlowError::NoFeasible {
                    direction,
                    part,
                    near_misses: if near_misses.is_empty() { "none".into() } else { near_misses },
                });
            }
        }
    }
    let second = parts.pop().expect("two parts");
    let first = parts.pop().expect("two parts");
    Ok(HandFlowPlan {
        direction,
        region: *region,
        parts: [first, second],
    })
}

/// Two back-to-back ramped tones at the plan's excitations.
pub fn render_hand_flow(plan: &HandFlowPlan, duration_s: f64, ramp_s: f64, sample_rate: f64) -> Result<Rendered, HandFlowError> {
    let parts: Vec<StimulusPart> = plan
        .parts
        .iter()
        .map(|p| StimulusPart {
            actuator: p.actuator,
            freq_hz: p.freq_hz,
            amplitude_v: p.drive_v,
            duration_s,
            ramp_s,
        })
        .collect();
    Ok(render_stimulus(&parts, sample_rate)?)
}

/// Sensation level in dB at each of the 45 x 45 subgrid points, row-major.
pub fn sensation_grid(
    map: &VibrationMap,
    sens: &SensitivityCurve,
    region: &HandRegion,
    actuator: Actuator,
    freq_hz: f64,
    drive_v: f64,
) -> Result<Vec<f64>, HandFlowError> {
    region.check(map)?;
    let bin = map.axis().bin_of(freq_hz).ok_or(HandFlowError::OffAxis(freq_hz))?;
    region
        .points()
        .into_iter()
        .map(|p| {
            let s = map.stencil(p)?;
            Ok(sens.sensation_level(drive_v * map.sample(&s, actuator, bin), freq_hz))
        })
        .collect()
}

impl HandFlowPlan {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serialises")
    }

    /// 3 x 3 activity grids for both parts: `part,row,s1,s2,s3` with the
    /// passing subgrid count per square (rows top to bottom).
    pub fn write_activity_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "part,row,col1,col2,col3")?;
        for (k, part) in self.parts.iter().enumerate() {
            for row in 0..SQUARES {
                let c = part.activity.counts;
                writeln!(w, "{},{},{},{},{}", k + 1, row + 1, c[0][row], c[1][row], c[2][row])?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vibmap::{FrfCurve, GridSpec, Provenance};

    fn uniform_map(value: f64) -> VibrationMap {
        let grid = GridSpec::default();
        let axis = FreqAxis::new(20.0, 10.0, 5);
        let curves = (0..grid.len() * 5).map(|_| FrfCurve::new(axis, vec![value; axis.count])).collect();
        VibrationMap::new(grid, axis, curves, Provenance::Synthetic).unwrap()
    }

    fn region() -> HandRegion {
        HandRegion::new(Point::new(300.0, 220.0))
    }

    #[test]
    fn subgrid_has_2025_points() {
        let r = region();
        let pts = r.points();
        assert_eq!(pts.len(), 2025);
        assert_eq!(pts[0], r.subgrid_point(0, 0, 0, 0));
        assert_eq!(pts[2024], r.subgrid_point(2, 2, 14, 14));
        assert_eq!(ACTIVE_MIN_POINTS, 113);
    }

    #[test]
    fn zero_drive_is_all_passive() {
        let map = uniform_map(1.0);
        let a = square_activity(&map, &SensitivityCurve::default(), &region(), Actuator::PA, 40.0, 0.0).unwrap();
        assert!(a.active.iter().flatten().all(|x| !x));
    }

    #[test]
    fn exact_three_jnd_boundary_counts_as_active() {
        let sens = SensitivityCurve::flat(0.5, 1.5);
        let drive = 100.0;
        let value = sens.displacement_at_level(4.5, 40.0) / drive;
        let map = uniform_map(value);
        let a = square_activity(&map, &sens, &region(), Actuator::PB, 40.0, drive).unwrap();
        assert!(a.active.iter().flatten().all(|x| *x));
        assert!(a.counts.iter().flatten().all(|&c| c == 225));
    }

    #[test]
    fn region_outside_grid_is_rejected() {
        let map = uniform_map(1.0);
        let r = HandRegion::new(Point::new(60.0, 60.0));
        let err = square_activity(&map, &SensitivityCurve::default(), &r, Actuator::PA, 40.0, 1.0).unwrap_err();
        assert!(matches!(err, HandFlowError::Geometry(_)));
    }

    #[test]
    fn off_axis_frequency_is_rejected() {
        let map = uniform_map(1.0);
        let err = square_activity(&map, &SensitivityCurve::default(), &region(), Actuator::PA, 41.0, 1.0).unwrap_err();
        assert!(matches!(err, HandFlowError::OffAxis(_)));
    }

    #[test]
    fn rules_for_left_to_right() {
        let mut a = Activity::from_counts([[0; 3]; 3]);
        a.active[0] = [true, true, true];
        assert!(a.satisfies(Direction::LeftToRight, 1));
        assert!(!a.satisfies(Direction::LeftToRight, 2));
        assert!(a.satisfies(Direction::RightToLeft, 2));
        // Top-left alone breaks the top/bottom symmetry.
        a.active[0] = [true, false, false];
        assert_eq!(a.violations(Direction::LeftToRight, 1), 1);
        // Middle column is unconstrained.
        a.active[0] = [false, true, false];
        a.active[1] = [true, true, true];
        assert!(a.satisfies(Direction::LeftToRight, 1));
        // Vertical flow uses rows: top row active, bottom silent, left/right mirror.
        let mut v = Activity::from_counts([[0; 3]; 3]);
        for col in 0..3 {
            v.active[col][0] = true;
        }
        assert!(v.satisfies(Direction::UpToDown, 1));
        assert!(v.satisfies(Direction::DownToUp, 2));
        assert!(!v.satisfies(Direction::UpToDown, 2));
    }

    #[test]
    fn saturating_map_cannot_plan() {
        let map = uniform_map(1.0);
        let sens = SensitivityCurve::default();
        let cand = Candidates::default_for(map.axis());
        let err = plan_hand_flow(&map, &sens, &region(), Direction::LeftToRight, &cand, 100.0).unwrap_err();
        match err {
            HandFlowError::NoFeasible { part, near_misses, .. } => {
                assert_eq!(part, 1);
                assert!(near_misses.contains("rule"));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn direction_parsing() {
        assert_eq!("l2r".parse::<Direction>().unwrap(), Direction::LeftToRight);
        assert_eq!("D->U".parse::<Direction>().unwrap(), Direction::DownToUp);
        assert!("sideways".parse::<Direction>().is_err());
    }
}
