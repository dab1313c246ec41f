use std::fmt;

use surfhap_core::electro::KnobError;
use surfhap_core::flowlut::FlowError;
use surfhap_core::gesture::GestureError;
use surfhap_core::handflow::HandFlowError;
use surfhap_core::platesim::PlateError;
use surfhap_core::vibmap::MapError;
use surfhap_core::waveform::WaveformError;

/// A command failure and the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    /// Bad or missing input data: exit code 3.
    Data(String),
    /// A valid request with no solution: exit code 4.
    Planning(String),
}

impl Failure {
    pub fn data(msg: impl Into<String>) -> Self {
        Failure::Data(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Data(_) => 3,
            Failure::Planning(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Data(m) => write!(f, "error: {m}"),
            Failure::Planning(m) => write!(f, "planning failed: {m}"),
        }
    }
}

impl From<FlowError> for Failure {
    fn from(e: FlowError) -> Self {
        match e {
            FlowError::NoDiscriminatingExcitation { .. } => Failure::Planning(e.to_string()),
            other => Failure::Data(other.to_string()),
        }
    }
}

impl From<HandFlowError> for Failure {
    fn from(e: HandFlowError) -> Self {
        match e {
            HandFlowError::NoFeasible { .. } => Failure::Planning(e.to_string()),
            other => Failure::Data(other.to_string()),
        }
    }
}

impl From<KnobError> for Failure {
    fn from(e: KnobError) -> Self {
        match e {
            KnobError::Timeout(_) => Failure::Planning(e.to_string()),
            other => Failure::Data(other.to_string()),
        }
    }
}

macro_rules! data_errors {
    ($($t:ty),*) => {
        $(impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure::Data(e.to_string())
            }
        })*
    };
}

data_errors!(GestureError, PlateError, MapError, WaveformError, std::io::Error, serde_json::Error);
