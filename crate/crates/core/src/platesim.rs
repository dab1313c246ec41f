//! Synthetic vibration maps from modal superposition.
//!
//! The surface is modelled as a simply supported Kirchhoff plate. Each piezo
//! patch applies a uniform pressure over its footprint, which projects onto
//! the mass-normalised mode shapes
//!
//! ```text
//! phi_mn(x, y) = 2 / sqrt(rho_h * a * b) * sin(m pi x / a) * sin(n pi y / b)
//! ```
//!
//! and the displacement per volt at a point is the complex modal sum
//! `sum phi_mn(p) Q_mn / (w_mn^2 - w^2 + 2 j zeta w_mn w)`. Magnitudes are
//! reported in micrometres per volt-peak.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Point;
use crate::vibmap::{Actuator, FreqAxis, FrfCurve, GridSpec, Provenance, VibrationMap};

/// Upper end of the excitation sweep.
pub const SWEEP_LIMIT_HZ: f64 = 625.0;

#[derive(Debug, Error, PartialEq)]
pub enum PlateError {
    #[error("invalid plate spec: {0}")]
    InvalidSpec(String),
    #[error("mode ({m}, {n}) outside retained range 1..={max_m} x 1..={max_n}")]
    ModeIndex {
        m: usize,
        n: usize,
        max_m: usize,
        max_n: usize,
    },
    #[error("point {0} lies outside the plate")]
    OutsidePlate(Point),
    #[error("patch {0} is invalid or does not fit inside the plate")]
    InvalidPatch(Actuator),
    #[error("no patch in the layout drives {0}")]
    MissingPatch(Actuator),
    #[error("patch layout is empty")]
    EmptyLayout,
    #[error("frequency axis exceeds the {limit} Hz sweep limit or is not ascending")]
    InvalidAxis { limit: f64 },
    #[error("grid point {index} at {point} lies outside the plate")]
    GridOutside { index: usize, point: Point },
}

/// Geometry and material of the plate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlateSpec {
    /// mm
    pub length_x: f64,
    /// mm
    pub length_y: f64,
    /// mm; informational, the dynamics use `bending_stiffness` and `areal_density`.
    pub thickness: f64,
    /// N·m
    pub bending_stiffness: f64,
    /// kg/m²
    pub areal_density: f64,
    /// Uniform modal damping ratio.
    pub damping_ratio: f64,
    /// Optional per-mode override, indexed `(m - 1) * modes_y + (n - 1)`.
    pub mode_damping: Option<Vec<f64>>,
    pub modes_x: usize,
    pub modes_y: usize,
}

impl Default for PlateSpec {
    fn default() -> Self {
        Self {
            length_x: 743.46,
            length_y: 447.29,
            thickness: 3.18,
            bending_stiffness: 200.0,
            areal_density: 7.95,
            damping_ratio: 0.01,
            mode_damping: None,
            modes_x: 20,
            modes_y: 12,
        }
    }
}

impl PlateSpec {
    pub fn validate(&self) -> Result<(), PlateError> {
        let positive = [
            ("length_x", self.length_x),
            ("length_y", self.length_y),
            ("thickness", self.thickness),
            ("bending_stiffness", self.bending_stiffness),
            ("areal_density", self.areal_density),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(PlateError::InvalidSpec(format!("{name} must be positive")));
            }
        }
        if self.modes_x == 0 || self.modes_y == 0 {
            return Err(PlateError::InvalidSpec("mode counts must be at least 1".into()));
        }
        let bad_zeta = |z: f64| !(z > 0.0 && z < 1.0);
        if bad_zeta(self.damping_ratio) {
            return Err(PlateError::InvalidSpec("damping ratio must lie in (0, 1)".into()));
        }
        if let Some(per_mode) = &self.mode_damping {
            if per_mode.len() != self.modes_x * self.modes_y {
                return Err(PlateError::InvalidSpec(format!(
                    "mode_damping has {} entries, expected {}",
                    per_mode.len(),
                    self.modes_x * self.modes_y
                )));
            }
            if per_mode.iter().copied().any(bad_zeta) {
                return Err(PlateError::InvalidSpec("damping ratio must lie in (0, 1)".into()));
            }
        }
        Ok(())
    }

    fn damping(&self, m: usize, n: usize) -> f64 {
        match &self.mode_damping {
            Some(z) => z[(m - 1) * self.modes_y + (n - 1)],
            None => self.damping_ratio,
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= 0.0 && p.x <= self.length_x && p.y >= 0.0 && p.y <= self.length_y
    }

    /// Lowest frequency among the modes just beyond the truncation limits.
    pub fn first_discarded_frequency(&self) -> f64 {
        let wider = PlateSpec {
            modes_x: self.modes_x + 1,
            modes_y: self.modes_y + 1,
            mode_damping: None,
            ..self.clone()
        };
        let fx = modal_frequency(&wider, self.modes_x + 1, 1).expect("in range");
        let fy = modal_frequency(&wider, 1, self.modes_y + 1).expect("in range");
        fx.min(fy)
    }
}

/// A rectangular piezo patch bonded to the plate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatchSpec {
    pub id: Actuator,
    /// Footprint centre, mm.
    pub center: Point,
    /// Footprint width and height, mm.
    pub size: (f64, f64),
    /// Total force per volt, N/V.
    pub force_scale: f64,
}

impl PatchSpec {
    fn bounds(&self) -> (f64, f64, f64, f64) {
        let (w, h) = self.size;
        (
            self.center.x - w / 2.0,
            self.center.x + w / 2.0,
            self.center.y - h / 2.0,
            self.center.y + h / 2.0,
        )
    }

    pub fn validate(&self, plate: &PlateSpec) -> Result<(), PlateError> {
        let (x0, x1, y0, y1) = self.bounds();
        let ok = self.id != Actuator::PAll
            && self.force_scale > 0.0
            && self.size.0 > 0.0
            && self.size.1 > 0.0
            && x0 >= 0.0
            && y0 >= 0.0
            && x1 <= plate.length_x
            && y1 <= plate.length_y;
        if ok {
            Ok(())
        } else {
            Err(PlateError::InvalidPatch(self.id))
        }
    }
}

/// Default layout: 61 x 35 mm patches near the middle of each edge, long side
/// along the edge. PA/PC mirror each other about the vertical centre line and
/// PB/PD about the horizontal one.
pub fn default_patches(plate: &PlateSpec) -> Vec<PatchSpec> {
    let (a, b) = (plate.length_x, plate.length_y);
    let inset = 30.0;
    let force_scale = 0.01;
    vec![
        PatchSpec {
            id: Actuator::PA,
            center: Point::new(inset, 0.4 * b),
            size: (35.0, 61.0),
            force_scale,
        },
        PatchSpec {
            id: Actuator::PB,
            center: Point::new(0.4 * a, inset),
            size: (61.0, 35.0),
            force_scale,
        },
        PatchSpec {
            id: Actuator::PC,
            center: Point::new(a - inset, 0.4 * b),
            size: (35.0, 61.0),
            force_scale,
        },
        PatchSpec {
            id: Actuator::PD,
            center: Point::new(0.4 * a, b - inset),
            size: (61.0, 35.0),
            force_scale,
        },
    ]
}

/// Natural frequency of mode `(m, n)` in Hz.
pub fn modal_frequency(spec: &PlateSpec, m: usize, n: usize) -> Result<f64, PlateError> {
    if m == 0 || n == 0 || m > spec.modes_x || n > spec.modes_y {
        return Err(PlateError::ModeIndex {
            m,
            n,
            max_m: spec.modes_x,
            max_n: spec.modes_y,
        });
    }
    let a = spec.length_x * 1e-3;
    let b = spec.length_y * 1e-3;
    let (mf, nf) = (m as f64, n as f64);
    let omega = PI * PI
        * (spec.bending_stiffness / spec.areal_density).sqrt()
        * ((mf / a).powi(2) + (nf / b).powi(2));
    Ok(omega / (2.0 * PI))
}

struct Mode {
    m: f64,
    n: f64,
    omega: f64,
    zeta: f64,
    /// Modal force per volt for each patch, in layout order.
    forcing: Vec<f64>,
}

/// Precomputed modal model of a plate plus patch layout.
pub struct PlateModel {
    spec: PlateSpec,
    patches: Vec<PatchSpec>,
    modes: Vec<Mode>,
    norm: f64,
}

impl PlateModel {
    pub fn new(spec: &PlateSpec, patches: &[PatchSpec]) -> Result<Self, PlateError> {
        spec.validate()?;
        for p in patches {
            p.validate(spec)?;
        }
        let a = spec.length_x * 1e-3;
        let b = spec.length_y * 1e-3;
        let norm = 2.0 / (spec.areal_density * a * b).sqrt();
        let mut modes = Vec::with_capacity(spec.modes_x * spec.modes_y);
        for m in 1..=spec.modes_x {
            for n in 1..=spec.modes_y {
                let omega = 2.0 * PI * modal_frequency(spec, m, n)?;
                let (mf, nf) = (m as f64, n as f64);
                let forcing = patches
                    .iter()
                    .map(|p| {
                        let (x0, x1, y0, y1) = p.bounds();
                        let (x0, x1, y0, y1) = (x0 * 1e-3, x1 * 1e-3, y0 * 1e-3, y1 * 1e-3);
                        let ix = a / (mf * PI) * ((mf * PI * x0 / a).cos() - (mf * PI * x1 / a).cos());
                        let iy = b / (nf * PI) * ((nf * PI * y0 / b).cos() - (nf * PI * y1 / b).cos());
                        let pressure = p.force_scale / ((x1 - x0) * (y1 - y0));
                        pressure * norm * ix * iy
                    })
                    .collect();
                modes.push(Mode {
                    m: mf,
                    n: nf,
                    omega,
                    zeta: spec.damping(m, n),
                    forcing,
                });
            }
        }
        Ok(Self {
            spec: spec.clone(),
            patches: patches.to_vec(),
            modes,
            norm,
        })
    }

    pub fn spec(&self) -> &PlateSpec {
        &self.spec
    }

    pub fn patches(&self) -> &[PatchSpec] {
        &self.patches
    }

    /// Modal weights `sum_k Q_mn^(k)` for the patches that make up `actuator`.
    fn actuator_weights(&self, actuator: Actuator) -> Result<Vec<f64>, PlateError> {
        if self.patches.is_empty() {
            return Err(PlateError::EmptyLayout);
        }
        let selected: Vec<usize> = match actuator {
            Actuator::PAll => (0..self.patches.len()).collect(),
            single => self
                .patches
                .iter()
                .position(|p| p.id == single)
                .map(|i| vec![i])
                .ok_or(PlateError::MissingPatch(single))?,
        };
        Ok(self
            .modes
            .iter()
            .map(|mode| selected.iter().map(|&k| mode.forcing[k]).sum())
            .collect())
    }

    /// Displacement FRF magnitude in um/Vp at `point` for `actuator`.
    pub fn frf(&self, point: Point, actuator: Actuator, axis: &FreqAxis) -> Result<FrfCurve, PlateError> {
        if !self.spec.contains(point) {
            return Err(PlateError::OutsidePlate(point));
        }
        check_axis(axis)?;
        let weights = self.actuator_weights(actuator)?;
        let a = self.spec.length_x * 1e-3;
        let b = self.spec.length_y * 1e-3;
        let (x, y) = (point.x * 1e-3, point.y * 1e-3);
        // Participation of each mode at the point: phi(p) * Q.
        let participation: Vec<f64> = self
            .modes
            .iter()
            .zip(&weights)
            .map(|(mode, q)| {
                let phi = self.norm * (mode.m * PI * x / a).sin() * (mode.n * PI * y / b).sin();
                phi * q
            })
            .collect();
        let magnitudes = (0..axis.count)
            .map(|i| {
                let w = 2.0 * PI * axis.freq(i);
                let (mut re, mut im) = (0.0, 0.0);
                for (mode, &c) in self.modes.iter().zip(&participation) {
                    // c / (dr + j di) = c (dr - j di) / (dr^2 + di^2)
                    let dr = mode.omega * mode.omega - w * w;
                    let di = 2.0 * mode.zeta * mode.omega * w;
                    let den = dr * dr + di * di;
                    re += c * dr / den;
                    im -= c * di / den;
                }
                re.hypot(im) * 1e6
            })
            .collect();
        Ok(FrfCurve::new(*axis, magnitudes))
    }

    /// Natural frequencies of all retained modes, ascending.
    pub fn modal_frequencies(&self) -> Vec<f64> {
        let mut f: Vec<f64> = self.modes.iter().map(|m| m.omega / (2.0 * PI)).collect();
        f.sort_by(f64::total_cmp);
        f
    }
}

fn check_axis(axis: &FreqAxis) -> Result<(), PlateError> {
    let limit = SWEEP_LIMIT_HZ;
    let ok = axis.count >= 1
        && axis.start_hz >= 0.0
        && (axis.count == 1 || axis.step_hz > 0.0)
        && axis.freq(axis.count - 1) <= limit + 1e-9;
    if ok {
        Ok(())
    } else {
        Err(PlateError::InvalidAxis { limit })
    }
}

pub fn synthesize_frf(
    spec: &PlateSpec,
    patches: &[PatchSpec],
    point: Point,
    actuator: Actuator,
    axis: &FreqAxis,
) -> Result<FrfCurve, PlateError> {
    PlateModel::new(spec, patches)?.frf(point, actuator, axis)
}

/// FRFs of every grid point for all five actuator cases.
pub fn generate_vibration_map(
    spec: &PlateSpec,
    patches: &[PatchSpec],
    grid: &GridSpec,
    axis: &FreqAxis,
) -> Result<VibrationMap, PlateError> {
    let model = PlateModel::new(spec, patches)?;
    check_axis(axis)?;
    let points: Vec<(usize, Point)> = (1..=grid.len()).map(|i| (i, grid.point(i))).collect();
    for &(index, point) in &points {
        if !spec.contains(point) {
            return Err(PlateError::GridOutside { index, point });
        }
    }
    let per_point = |&(_, point): &(usize, Point)| -> Result<Vec<FrfCurve>, PlateError> {
        Actuator::ALL
            .iter()
            .map(|&act| model.frf(point, act, axis))
            .collect()
    };
    #[cfg(feature = "parallel")]
    let rows: Vec<Result<Vec<FrfCurve>, PlateError>> = {
        use rayon::prelude::*;
        points.par_iter().map(per_point).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Result<Vec<FrfCurve>, PlateError>> = points.iter().map(per_point).collect();

    let mut curves = Vec::with_capacity(grid.len() * Actuator::ALL.len());
    for row in rows {
        curves.extend(row?);
    }
    Ok(VibrationMap::new(grid.clone(), *axis, curves, Provenance::Synthetic)
        .expect("generated map is consistent"))
}

/// Deterministic perturbation of the default plate and patch layout, used to
/// produce families of distinct but plausible synthetic maps.
///
/// Patch pairs keep their mirror symmetry; stiffness, density, damping, patch
/// placement and per-patch gain vary with the seed.
pub fn seeded_layout(seed: u64) -> (PlateSpec, Vec<PatchSpec>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = PlateSpec::default();
    let spec = PlateSpec {
        bending_stiffness: base.bending_stiffness * rng.random_range(0.7..1.4),
        areal_density: base.areal_density * rng.random_range(0.85..1.15),
        damping_ratio: rng.random_range(0.006..0.02),
        ..base
    };
    let mut patches = default_patches(&spec);
    let along_y = rng.random_range(0.2..0.8) * spec.length_y;
    let along_x = rng.random_range(0.2..0.8) * spec.length_x;
    for p in &mut patches {
        match p.id {
            Actuator::PA | Actuator::PC => p.center.y = along_y,
            _ => p.center.x = along_x,
        }
        p.force_scale *= rng.random_range(0.6..1.6);
    }
    (spec, patches)
}

/// Vibration map for [`seeded_layout`] on the default grid and sweep axis.
pub fn seeded_map(seed: u64) -> VibrationMap {
    let (spec, patches) = seeded_layout(seed);
    generate_vibration_map(&spec, &patches, &GridSpec::default(), &FreqAxis::sweep_default())
        .expect("seeded layouts are valid")
}
