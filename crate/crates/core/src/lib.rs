//! Surface haptics rendering engine.
//!
//! The crate is organised around the data flow of a piezo-actuated touch
//! surface with an electrostatic layer:
//!
//! * [`platesim`] synthesises frequency response functions (FRFs) of a
//!   damped rectangular plate driven by rectangular piezo patches.
//! * [`vibmap`] stores those FRFs on a measurement grid ("vibration map"),
//!   persists them and interpolates between grid points.
//! * [`flowlut`] turns a vibration map into excitation lookup tables and
//!   point-to-point vibrotactile flow stimuli.
//! * [`handflow`] plans directional flow under a whole hand.
//! * [`electro`] models electrostatic friction and drives a virtual knob.
//! * [`gesture`] recognises static and dynamic touch gestures from binary
//!   contact images.
//! * [`waveform`] holds rendered two-channel output buffers and exporters.

pub mod electro;
pub mod flowlut;
pub mod geom;
pub mod gesture;
pub mod handflow;
pub mod platesim;
pub mod vibmap;
pub mod waveform;

pub use geom::Point;
pub use vibmap::{Actuator, FreqAxis, FrfCurve, GridSpec, VibrationMap};
