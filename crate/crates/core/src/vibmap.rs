//! Vibration maps: FRF magnitudes on a rectangular grid of surface points
//! for each actuator case, with bilinear interpolation and a lossless text
//! file format.
//!
//! Grid points are numbered row-major from 1, starting at `origin` (the
//! top-left point as drawn) and increasing along a row first. Row `r`
//! lies at `origin.y + r * spacing`.
//!
//! File layout (`.vmap`):
//!
//! ```text
//! surfhap-vibmap 1
//! numbering row-major-top-left
//! grid <rows> <cols>
//! spacing_mm <spacing>
//! origin_mm <x> <y>
//! axis_hz <start> <step> <count>
//! provenance <synthetic|measured|fixture>
//! curves <rows * cols * 5>
//! <point> <actuator> <m_0> <m_1> ... <m_count-1>
//! ```
//!
//! Magnitudes are written with Rust's shortest round-trip float formatting,
//! so a save/load cycle is bit-exact.

use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Point;

/// Excitation case: one of the four patches alone, or all four in parallel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Actuator {
    PA,
    PB,
    PC,
    PD,
    #[serde(rename = "PALL")]
    PAll,
}

impl Actuator {
    /// Canonical order, also used for argmax tie-breaking.
    pub const ALL: [Actuator; 5] = [Actuator::PA, Actuator::PB, Actuator::PC, Actuator::PD, Actuator::PAll];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Actuator::PA => "PA",
            Actuator::PB => "PB",
            Actuator::PC => "PC",
            Actuator::PD => "PD",
            Actuator::PAll => "PALL",
        }
    }
}

impl fmt::Display for Actuator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Actuator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "PA" => Ok(Actuator::PA),
            "PB" => Ok(Actuator::PB),
            "PC" => Ok(Actuator::PC),
            "PD" => Ok(Actuator::PD),
            "PALL" => Ok(Actuator::PAll),
            other => Err(format!("unknown actuator `{other}`")),
        }
    }
}

/// Uniform frequency axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreqAxis {
    pub start_hz: f64,
    pub step_hz: f64,
    pub count: usize,
}

impl FreqAxis {
    pub const fn new(start_hz: f64, step_hz: f64, count: usize) -> Self {
        Self {
            start_hz,
            step_hz,
            count,
        }
    }

    /// 0 to 625 Hz in 1 Hz bins.
    pub const fn sweep_default() -> Self {
        Self::new(0.0, 1.0, 626)
    }

    pub fn freq(&self, bin: usize) -> f64 {
        self.start_hz + bin as f64 * self.step_hz
    }

    /// Bin whose frequency equals `hz` to within a millionth of a step.
    pub fn bin_of(&self, hz: f64) -> Option<usize> {
        if self.count == 0 {
            return None;
        }
        if self.count == 1 || self.step_hz == 0.0 {
            return ((hz - self.start_hz).abs() < 1e-9).then_some(0);
        }
        let pos = (hz - self.start_hz) / self.step_hz;
        let bin = pos.round();
        ((pos - bin).abs() < 1e-6 && bin >= 0.0 && (bin as usize) < self.count).then_some(bin as usize)
    }

    /// Nearest bin, clamped to the axis.
    pub fn nearest_bin(&self, hz: f64) -> usize {
        if self.count <= 1 || self.step_hz == 0.0 {
            return 0;
        }
        let pos = ((hz - self.start_hz) / self.step_hz).round();
        pos.clamp(0.0, (self.count - 1) as f64) as usize
    }
}

/// Magnitude FRF in um/Vp over a frequency axis.
#[derive(Clone, Debug, PartialEq)]
pub struct FrfCurve {
    axis: FreqAxis,
    magnitudes: Vec<f64>,
}

impl FrfCurve {
    pub fn new(axis: FreqAxis, magnitudes: Vec<f64>) -> Self {
        assert_eq!(axis.count, magnitudes.len(), "curve length must match its axis");
        Self { axis, magnitudes }
    }

    pub fn axis(&self) -> &FreqAxis {
        &self.axis
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    /// Value at `hz`, linearly interpolated between bins and clamped at the ends.
    pub fn at(&self, hz: f64) -> f64 {
        let n = self.magnitudes.len();
        if n == 1 || self.axis.step_hz == 0.0 {
            return self.magnitudes[0];
        }
        let pos = ((hz - self.axis.start_hz) / self.axis.step_hz).clamp(0.0, (n - 1) as f64);
        let i = (pos.floor() as usize).min(n - 2);
        let t = pos - i as f64;
        self.magnitudes[i] * (1.0 - t) + self.magnitudes[i + 1] * t
    }

    /// `(bin, magnitude)` of the maximum; first bin on ties.
    pub fn peak(&self) -> (usize, f64) {
        self.magnitudes
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &m)| if m > best.1 { (i, m) } else { best })
    }
}

/// Measurement grid over the surface.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
    /// mm
    pub spacing: f64,
    /// Position of point 1, mm.
    pub origin: Point,
}

impl Default for GridSpec {
    /// 7 x 12 points at 60 mm, centred on the default 743.46 x 447.29 mm plate.
    fn default() -> Self {
        Self {
            rows: 7,
            cols: 12,
            spacing: 60.0,
            origin: Point::new((743.46 - 660.0) / 2.0, (447.29 - 360.0) / 2.0),
        }
    }
}

impl GridSpec {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinates of 1-based `index`; panics when out of range.
    pub fn point(&self, index: usize) -> Point {
        assert!(index >= 1 && index <= self.len(), "grid index {index} out of range");
        let k = index - 1;
        let (row, col) = (k / self.cols, k % self.cols);
        Point::new(
            self.origin.x + col as f64 * self.spacing,
            self.origin.y + row as f64 * self.spacing,
        )
    }

    /// 1-based index of the grid point at `(row, col)`, both 0-based.
    pub fn index_of(&self, row: usize, col: usize) -> usize {
        row * self.cols + col + 1
    }

    /// Far corner of the grid rectangle.
    pub fn extent(&self) -> Point {
        Point::new(
            self.origin.x + (self.cols - 1) as f64 * self.spacing,
            self.origin.y + (self.rows - 1) as f64 * self.spacing,
        )
    }

    pub fn contains(&self, p: Point) -> bool {
        let far = self.extent();
        let tol = 1e-9 * self.spacing.max(1.0);
        p.x >= self.origin.x - tol && p.x <= far.x + tol && p.y >= self.origin.y - tol && p.y <= far.y + tol
    }

    fn validate(&self) -> Result<(), MapError> {
        if self.rows == 0 || self.cols == 0 || !(self.spacing > 0.0) || !self.spacing.is_finite() {
            return Err(MapError::InvalidGrid);
        }
        Ok(())
    }
}

/// Where the magnitudes came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Synthetic,
    Measured,
    Fixture,
}

impl Provenance {
    fn as_str(self) -> &'static str {
        match self {
            Provenance::Synthetic => "synthetic",
            Provenance::Measured => "measured",
            Provenance::Fixture => "fixture",
        }
    }
}

#[derive(Debug, Error)]
pub enum MapError {
    #[error("grid index {index} outside 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("point {0} lies outside the grid; extrapolation is not supported")]
    Extrapolation(Point),
    #[error("grid needs rows, cols >= 1 and a positive spacing")]
    InvalidGrid,
    #[error("expected {expected} curves, got {got}")]
    CurveCount { expected: usize, got: usize },
    #[error("curve for point {point} / {actuator} does not use the map axis")]
    AxisMismatch { point: usize, actuator: Actuator },
    #[error("magnitude for point {point} / {actuator} is negative or not finite")]
    BadMagnitude { point: usize, actuator: Actuator },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// FRFs of every grid point for all five actuator cases.
#[derive(Clone, Debug, PartialEq)]
pub struct VibrationMap {
    grid: GridSpec,
    axis: FreqAxis,
    /// Indexed `(point - 1) * 5 + actuator`.
    curves: Vec<FrfCurve>,
    provenance: Provenance,
}

impl VibrationMap {
    /// Curves must be ordered by point, then actuator in [`Actuator::ALL`] order.
    pub fn new(grid: GridSpec, axis: FreqAxis, curves: Vec<FrfCurve>, provenance: Provenance) -> Result<Self, MapError> {
        grid.validate()?;
        let expected = grid.len() * Actuator::ALL.len();
        if curves.len() != expected {
            return Err(MapError::CurveCount {
                expected,
                got: curves.len(),
            });
        }
        for (k, c) in curves.iter().enumerate() {
            let (point, actuator) = (k / 5 + 1, Actuator::ALL[k % 5]);
            if c.axis != axis {
                return Err(MapError::AxisMismatch { point, actuator });
            }
            if c.magnitudes.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
                return Err(MapError::BadMagnitude { point, actuator });
            }
        }
        Ok(Self {
            grid,
            axis,
            curves,
            provenance,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn axis(&self) -> &FreqAxis {
        &self.axis
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn curve_count(&self) -> usize {
        self.curves.len()
    }

    pub fn point_count(&self) -> usize {
        self.grid.len()
    }

    fn check_index(&self, index: usize) -> Result<(), MapError> {
        if index == 0 || index > self.grid.len() {
            Err(MapError::IndexOutOfRange {
                index,
                max: self.grid.len(),
            })
        } else {
            Ok(())
        }
    }

    pub fn point_coordinates(&self, index: usize) -> Result<Point, MapError> {
        self.check_index(index)?;
        Ok(self.grid.point(index))
    }

    pub fn curve(&self, index: usize, actuator: Actuator) -> Result<&FrfCurve, MapError> {
        self.check_index(index)?;
        Ok(&self.curves[(index - 1) * 5 + actuator.index()])
    }

    /// Magnitudes of a stored curve; `index` must be valid.
    pub(crate) fn magnitudes(&self, index: usize, actuator: Actuator) -> &[f64] {
        &self.curves[(index - 1) * 5 + actuator.index()].magnitudes
    }

    /// Bilinear weights of the four grid points surrounding `p`.
    pub fn stencil(&self, p: Point) -> Result<Stencil, MapError> {
        if !p.x.is_finite() || !p.y.is_finite() || !self.grid.contains(p) {
            return Err(MapError::Extrapolation(p));
        }
        let g = &self.grid;
        let locate = |coord: f64, origin: f64, n: usize| -> (usize, f64) {
            if n == 1 {
                return (0, 0.0);
            }
            let mut u = ((coord - origin) / g.spacing).clamp(0.0, (n - 1) as f64);
            if (u - u.round()).abs() < 1e-9 {
                u = u.round();
            }
            let i = (u.floor() as usize).min(n - 2);
            (i, u - i as f64)
        };
        let (c0, fx) = locate(p.x, g.origin.x, g.cols);
        let (r0, fy) = locate(p.y, g.origin.y, g.rows);
        let c1 = (c0 + 1).min(g.cols - 1);
        let r1 = (r0 + 1).min(g.rows - 1);
        Ok(Stencil {
            points: [g.index_of(r0, c0), g.index_of(r0, c1), g.index_of(r1, c0), g.index_of(r1, c1)],
            weights: [(1.0 - fx) * (1.0 - fy), fx * (1.0 - fy), (1.0 - fx) * fy, fx * fy],
        })
    }

    /// Single-bin magnitude at `p` through a precomputed stencil.
    pub fn sample(&self, stencil: &Stencil, actuator: Actuator, bin: usize) -> f64 {
        stencil
            .points
            .iter()
            .zip(stencil.weights)
            .map(|(&i, w)| self.magnitudes(i, actuator)[bin] * w)
            .sum()
    }

    /// Bilinearly interpolated FRF at `p`. Exact at grid nodes.
    pub fn interpolate_frf(&self, p: Point, actuator: Actuator) -> Result<FrfCurve, MapError> {
        let s = self.stencil(p)?;
        let m = (0..self.axis.count).map(|b| self.sample(&s, actuator, b)).collect();
        Ok(FrfCurve::new(self.axis, m))
    }

    /// Interpolated FRFs for all five actuator cases.
    pub fn interpolate_all(&self, p: Point) -> Result<[FrfCurve; 5], MapError> {
        let s = self.stencil(p)?;
        Ok(Actuator::ALL.map(|a| FrfCurve::new(self.axis, (0..self.axis.count).map(|b| self.sample(&s, a, b)).collect())))
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<(), MapError> {
        let g = &self.grid;
        writeln!(w, "surfhap-vibmap 1")?;
        writeln!(w, "numbering row-major-top-left")?;
        writeln!(w, "grid {} {}", g.rows, g.cols)?;
        writeln!(w, "spacing_mm {}", g.spacing)?;
        writeln!(w, "origin_mm {} {}", g.origin.x, g.origin.y)?;
        writeln!(w, "axis_hz {} {} {}", self.axis.start_hz, self.axis.step_hz, self.axis.count)?;
        writeln!(w, "provenance {}", self.provenance.as_str())?;
        writeln!(w, "curves {}", self.curves.len())?;
        for (k, c) in self.curves.iter().enumerate() {
            write!(w, "{} {}", k / 5 + 1, Actuator::ALL[k % 5])?;
            for m in &c.magnitudes {
                write!(w, " {m}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn read_from(r: impl BufRead) -> Result<Self, MapError> {
        let mut lines = r.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut next = |what: &str| -> Result<(usize, String), MapError> {
            match lines.next() {
                Some((n, Ok(l))) => Ok((n, l)),
                Some((_, Err(e))) => Err(e.into()),
                None => Err(MapError::Parse {
                    line: 0,
                    message: format!("unexpected end of file, expected {what}"),
                }),
            }
        };
        let err = |line: usize, message: String| MapError::Parse { line, message };

        let header = |line: &(usize, String), key: &str, n: usize| -> Result<Vec<String>, MapError> {
            let mut parts = line.1.split_whitespace();
            if parts.next() != Some(key) {
                return Err(err(line.0, format!("expected `{key}` header")));
            }
            let vals: Vec<String> = parts.map(str::to_string).collect();
            if vals.len() != n {
                return Err(err(line.0, format!("`{key}` takes {n} value(s)")));
            }
            Ok(vals)
        };
        fn num<T: FromStr>(line: usize, s: &str, what: &str) -> Result<T, MapError> {
            s.parse().map_err(|_| MapError::Parse {
                line,
                message: format!("malformed {what} `{s}`"),
            })
        }

        let magic = next("magic line")?;
        if magic.1.trim() != "surfhap-vibmap 1" {
            return Err(err(magic.0, "not a surfhap vibration map (bad magic line)".into()));
        }
        let l = next("numbering")?;
        let v = header(&l, "numbering", 1)?;
        if v[0] != "row-major-top-left" {
            return Err(err(l.0, format!("unsupported numbering `{}`", v[0])));
        }
        let l = next("grid")?;
        let v = header(&l, "grid", 2)?;
        let (rows, cols): (usize, usize) = (num(l.0, &v[0], "row count")?, num(l.0, &v[1], "column count")?);
        let l = next("spacing_mm")?;
        let spacing: f64 = num(l.0, &header(&l, "spacing_mm", 1)?[0], "spacing")?;
        let l = next("origin_mm")?;
        let v = header(&l, "origin_mm", 2)?;
        let origin = Point::new(num(l.0, &v[0], "origin x")?, num(l.0, &v[1], "origin y")?);
        let l = next("axis_hz")?;
        let v = header(&l, "axis_hz", 3)?;
        let axis = FreqAxis::new(
            num(l.0, &v[0], "axis start")?,
            num(l.0, &v[1], "axis step")?,
            num(l.0, &v[2], "axis count")?,
        );
        let l = next("provenance")?;
        let provenance = match header(&l, "provenance", 1)?[0].as_str() {
            "synthetic" => Provenance::Synthetic,
            "measured" => Provenance::Measured,
            "fixture" => Provenance::Fixture,
            other => return Err(err(l.0, format!("unknown provenance `{other}`"))),
        };
        let l = next("curves")?;
        let declared: usize = num(l.0, &header(&l, "curves", 1)?[0], "curve count")?;
        let grid = GridSpec {
            rows,
            cols,
            spacing,
            origin,
        };
        grid.validate().map_err(|e| err(l.0, e.to_string()))?;
        let expected = grid.len() * 5;
        if declared != expected {
            return Err(err(
                l.0,
                format!("declared {declared} curves but a {rows}x{cols} grid needs {expected}"),
            ));
        }

        let mut curves = Vec::with_capacity(expected);
        for k in 0..expected {
            let (point, actuator) = (k / 5 + 1, Actuator::ALL[k % 5]);
            let l = match lines.next() {
                Some((n, line)) => (n, line?),
                None => {
                    return Err(err(0, format!("missing curve for point {point} / {actuator} (file has {k} of {expected})")))
                }
            };
            let mut parts = l.1.split_whitespace();
            let p: usize = num(l.0, parts.next().unwrap_or(""), "point index")?;
            let a: Actuator = parts
                .next()
                .unwrap_or("")
                .parse()
                .map_err(|e: String| err(l.0, e))?;
            if p != point || a != actuator {
                return Err(err(l.0, format!("expected curve {point} / {actuator}, found {p} / {a}")));
            }
            let mags = parts
                .map(|s| num::<f64>(l.0, s, "magnitude"))
                .collect::<Result<Vec<_>, _>>()?;
            if mags.len() != axis.count {
                return Err(err(
                    l.0,
                    format!("curve {point} / {actuator} has {} bins, axis has {}", mags.len(), axis.count),
                ));
            }
            curves.push(FrfCurve::new(axis, mags));
        }
        if let Some((n, Ok(extra))) = lines.next() {
            if !extra.trim().is_empty() {
                return Err(err(n, "trailing data after last curve".into()));
            }
        }
        Self::new(grid, axis, curves, provenance)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), MapError> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, MapError> {
        Self::read_from(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

/// Four corner points and bilinear weights for one interpolation site.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stencil {
    pub points: [usize; 4],
    pub weights: [f64; 4],
}

/// Grid points of the worked L/R example: point 51 is L, point 52 is R.
pub const FIXTURE_LEFT: usize = 51;
pub const FIXTURE_RIGHT: usize = 52;

/// A 7 x 12 fixture map around the two-point flow example.
///
/// Points 51 and 52 share a smooth background response whose differences stay
/// below 0.05 um/Vp, except for two designed bins: PA at 465 Hz, where point
/// 51 exceeds point 52 by 0.201 um/Vp, and PALL at 428 Hz, where point 52
/// exceeds point 51 by 1.607 um/Vp. All other points carry the same smooth
/// background scaled by their position.
pub fn fixture_map() -> VibrationMap {
    let grid = GridSpec::default();
    let axis = FreqAxis::sweep_default();
    let background = |point: usize, act: Actuator, bin: usize| -> f64 {
        let f = axis.freq(bin);
        let centre = 90.0 + 85.0 * act.index() as f64;
        let bump = |c: f64, w: f64| 1.0 / (1.0 + ((f - c) / w).powi(2));
        let shape = 0.08 * bump(centre, 6.0) + 0.04 * bump(centre + 180.0, 9.0) + 0.01;
        let p = grid.point(point);
        let scale = 0.6 + 0.4 * ((p.x / 120.0).sin() * (p.y / 90.0).cos()).abs();
        shape * scale
    };
    let mut curves = Vec::with_capacity(grid.len() * 5);
    for point in 1..=grid.len() {
        for act in Actuator::ALL {
            let mut m: Vec<f64> = (0..axis.count).map(|b| background(point, act, b)).collect();
            if point == FIXTURE_RIGHT {
                // Keep the designed bins as the unique extremes.
                for (b, v) in m.iter_mut().enumerate() {
                    *v = background(FIXTURE_LEFT, act, b) * 0.9 + 0.002;
                }
            }
            curves.push(m);
        }
    }
    let slot = |point: usize, act: Actuator| (point - 1) * 5 + act.index();
    let pa465 = axis.bin_of(465.0).expect("on axis");
    let pall428 = axis.bin_of(428.0).expect("on axis");
    curves[slot(FIXTURE_LEFT, Actuator::PA)][pa465] = 0.25;
    curves[slot(FIXTURE_RIGHT, Actuator::PA)][pa465] = 0.049;
    curves[slot(FIXTURE_LEFT, Actuator::PAll)][pall428] = 0.093;
    curves[slot(FIXTURE_RIGHT, Actuator::PAll)][pall428] = 1.7;
    let curves = curves.into_iter().map(|m| FrfCurve::new(axis, m)).collect();
    VibrationMap::new(grid, axis, curves, Provenance::Fixture).expect("fixture is consistent")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn affine_map(grid: GridSpec, axis: FreqAxis) -> VibrationMap {
        // Per bin b and actuator k: m = c0 + cx x + cy y, positive on the grid.
        let mut curves = Vec::new();
        for i in 1..=grid.len() {
            let p = grid.point(i);
            for a in Actuator::ALL {
                let k = a.index() as f64;
                curves.push(FrfCurve::new(
                    axis,
                    (0..axis.count)
                        .map(|b| 3.0 + 0.01 * b as f64 + (0.002 + 0.0001 * k) * p.x + (0.004 - 0.0003 * b as f64 / 10.0) * p.y)
                        .collect(),
                ));
            }
        }
        VibrationMap::new(grid, axis, curves, Provenance::Synthetic).unwrap()
    }

    #[test]
    fn point_coordinates_row_major() {
        let map = fixture_map();
        let g = GridSpec::default();
        assert_eq!(map.point_coordinates(1).unwrap(), g.origin);
        assert_eq!(map.point_coordinates(13).unwrap(), Point::new(g.origin.x, g.origin.y + 60.0));
        assert_eq!(
            map.point_coordinates(84).unwrap(),
            Point::new(g.origin.x + 11.0 * 60.0, g.origin.y + 6.0 * 60.0)
        );
        assert!(matches!(map.point_coordinates(0), Err(MapError::IndexOutOfRange { .. })));
        assert!(matches!(map.point_coordinates(85), Err(MapError::IndexOutOfRange { .. })));
    }

    #[test]
    fn interpolation_passes_through_nodes() {
        let map = fixture_map();
        for i in [1, 12, 51, 52, 73, 84] {
            let p = map.point_coordinates(i).unwrap();
            for a in Actuator::ALL {
                assert_eq!(&map.interpolate_frf(p, a).unwrap(), map.curve(i, a).unwrap());
            }
        }
    }

    #[test]
    fn interpolation_at_cell_centre_is_corner_mean() {
        let map = fixture_map();
        let g = map.grid().clone();
        let p = Point::new(g.origin.x + 3.5 * g.spacing, g.origin.y + 2.5 * g.spacing);
        let corners = [g.index_of(2, 3), g.index_of(2, 4), g.index_of(3, 3), g.index_of(3, 4)];
        let got = map.interpolate_frf(p, Actuator::PC).unwrap();
        for b in 0..map.axis().count {
            let mean: f64 = corners.iter().map(|&i| map.curve(i, Actuator::PC).unwrap().magnitudes()[b]).sum::<f64>() / 4.0;
            assert!((got.magnitudes()[b] - mean).abs() <= 1e-15 * mean.max(1.0));
        }
    }

    #[test]
    fn interpolation_reproduces_affine_fields() {
        let axis = FreqAxis::new(0.0, 5.0, 20);
        let map = affine_map(GridSpec::default(), axis);
        let g = map.grid().clone();
        let far = g.extent();
        for k in 0..50 {
            let t = k as f64 / 49.0;
            let p = Point::new(g.origin.x + t * (far.x - g.origin.x), g.origin.y + (1.0 - t * t) * (far.y - g.origin.y));
            let c = map.interpolate_frf(p, Actuator::PD).unwrap();
            for b in 0..axis.count {
                let exact = 3.0 + 0.01 * b as f64 + 0.0023 * p.x + (0.004 - 0.0003 * b as f64 / 10.0) * p.y;
                assert!((c.magnitudes()[b] - exact).abs() <= 1e-9 * exact);
            }
        }
    }

    #[test]
    fn extrapolation_is_rejected() {
        let map = fixture_map();
        let g = map.grid();
        let outside = Point::new(g.origin.x - 1.0, g.origin.y + 10.0);
        assert!(matches!(map.interpolate_frf(outside, Actuator::PA), Err(MapError::Extrapolation(_))));
        let beyond = Point::new(g.extent().x + 0.5, g.origin.y);
        assert!(map.stencil(beyond).is_err());
    }

    #[test]
    fn single_row_grid_interpolates_along_columns() {
        let grid = GridSpec {
            rows: 1,
            cols: 3,
            spacing: 10.0,
            origin: Point::new(0.0, 0.0),
        };
        let map = affine_map(grid, FreqAxis::new(0.0, 1.0, 2));
        assert!(map.interpolate_frf(Point::new(15.0, 0.0), Actuator::PA).is_ok());
        assert!(map.interpolate_frf(Point::new(15.0, 1.0), Actuator::PA).is_err());
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let map = fixture_map();
        let mut buf = Vec::new();
        map.write_to(&mut buf).unwrap();
        let back = VibrationMap::read_from(buf.as_slice()).unwrap();
        assert_eq!(back, map);
        assert_eq!(back.provenance(), Provenance::Fixture);
    }

    #[test]
    fn count_mismatch_is_a_parse_error() {
        let map = fixture_map();
        let mut buf = Vec::new();
        map.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        // Drop the five curves of point 84: 83 points declared as 7x12.
        let lines: Vec<&str> = text.lines().collect();
        let truncated = lines[..lines.len() - 5].join("\n");
        let err = VibrationMap::read_from(truncated.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("missing curve for point 84"), "{err}");

        let wrong_count = text.replacen("curves 420", "curves 415", 1);
        let err = VibrationMap::read_from(wrong_count.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("declared 415"), "{err}");
    }

    #[test]
    fn malformed_headers_are_named() {
        let err = VibrationMap::read_from("hello\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("magic"), "{err}");
        let text = "surfhap-vibmap 1\nnumbering row-major-top-left\ngrid 7 x\n";
        let err = VibrationMap::read_from(text.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("column count"), "{err}");
        let axis_bad = "surfhap-vibmap 1\nnumbering row-major-top-left\ngrid 1 1\nspacing_mm 1\norigin_mm 0 0\naxis_hz 0 1 3\nprovenance synthetic\ncurves 5\n1 PA 1 2 3\n1 PB 1 2\n";
        let err = VibrationMap::read_from(axis_bad.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("has 2 bins"), "{err}");
    }

    #[test]
    fn axis_bins() {
        let axis = FreqAxis::sweep_default();
        assert_eq!(axis.bin_of(465.0), Some(465));
        assert_eq!(axis.bin_of(465.5), None);
        assert_eq!(axis.bin_of(626.0), None);
        assert_eq!(axis.nearest_bin(1000.0), 625);
    }
}
