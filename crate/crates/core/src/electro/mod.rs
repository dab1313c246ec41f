//! Electrostatic friction and the virtual haptic knob.
//!
//! A voltage on the conductive layer of a capacitive screen attracts the
//! fingertip with
//!
//! ```text
//! f_e = eps0 V^2 A / (2 (t_i + t_s) (t_i / eps_i + t_s / eps_s))
//! ```
//!
//! which a sliding finger feels as extra friction `mu (F_N + f_e)`.

mod knob;
mod scenario;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use knob::{Condition, Crossing, KnobConfig, KnobError, KnobSession, KnobSpec, WaveSegment};
pub use scenario::{run_knob_scenario, FingerSample, ScenarioMetrics, ScenarioOutcome, ScenarioPreset, Trajectory};

/// Vacuum permittivity, F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.854e-12;

#[derive(Debug, Error, PartialEq)]
pub enum ElectroError {
    #[error("invalid electrostatic parameters: {0}")]
    InvalidParams(&'static str),
}

/// Material and contact parameters of the finger/screen capacitor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElectroParams {
    /// F/m
    pub eps0: f64,
    /// Relative permittivity of the screen insulator.
    pub eps_i: f64,
    /// Relative permittivity of the outer skin layer.
    pub eps_s: f64,
    /// Insulator thickness, m.
    pub t_i: f64,
    /// Outer skin thickness, m.
    pub t_s: f64,
    /// Contact area, m².
    pub area: f64,
    /// Friction coefficient.
    pub mu: f64,
    /// Normal load, N.
    pub normal_force: f64,
}

impl Default for ElectroParams {
    fn default() -> Self {
        Self {
            eps0: VACUUM_PERMITTIVITY,
            eps_i: 3.0,
            eps_s: 1000.0,
            t_i: 1e-6,
            t_s: 2e-4,
            area: 1e-4,
            mu: 0.5,
            normal_force: 0.5,
        }
    }
}

impl ElectroParams {
    pub fn validate(&self) -> Result<(), ElectroError> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !(pos(self.eps0) && pos(self.t_i) && pos(self.t_s) && pos(self.area) && pos(self.mu) && pos(self.normal_force)) {
            return Err(ElectroError::InvalidParams("all quantities must be positive"));
        }
        if !(self.eps_i >= 1.0 && self.eps_s >= 1.0) {
            return Err(ElectroError::InvalidParams("relative permittivities must be at least 1"));
        }
        Ok(())
    }
}

/// Normal attraction force in newtons at instantaneous voltage `volts`.
pub fn electrostatic_force(p: &ElectroParams, volts: f64) -> f64 {
    p.eps0 * volts * volts * p.area / (2.0 * (p.t_i + p.t_s) * (p.t_i / p.eps_i + p.t_s / p.eps_s))
}

/// Tangential friction felt by the finger; zero while it is not sliding.
pub fn friction_force(p: &ElectroParams, volts: f64, sliding: bool) -> f64 {
    if sliding {
        p.mu * (p.normal_force + electrostatic_force(p, volts))
    } else {
        0.0
    }
}
