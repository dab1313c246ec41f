use std::path::{Path, PathBuf};

use serde::Deserialize;
use surfhap_core::electro::{KnobConfig, ScenarioPreset};
use surfhap_core::flowlut::{FlowOptions, LookupConfig, SensitivityCurve};
use surfhap_core::gesture::{FeatureConfig, GateConfig, PreprocessConfig, SvmConfig, SynthConfig};
use surfhap_core::platesim::{PatchSpec, PlateSpec};
use surfhap_core::{FreqAxis, GridSpec};

use crate::failure::Failure;

pub const CONFIG_ENV: &str = "SURFHAP_CONFIG";

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HandSettings {
    pub side_mm: f64,
    pub drive_v: f64,
}

impl Default for HandSettings {
    fn default() -> Self {
        Self {
            side_mm: 120.0,
            drive_v: 100.0,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GestureSettings {
    pub synth: SynthConfig,
    pub features: FeatureConfig,
    pub svm: SvmConfig,
    pub preprocess: PreprocessConfig,
    pub gate: GateConfig,
}

/// Settings shared by all commands. Every section is optional in the file.
#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub plate: PlateSpec,
    /// Defaults to the standard layout for the plate.
    pub patches: Option<Vec<PatchSpec>>,
    pub grid: Option<GridSpec>,
    pub axis: FreqAxis,
    pub sensitivity: Option<SensitivityCurve>,
    pub lookup: LookupConfig,
    pub flow: FlowOptions,
    pub sample_rate: f64,
    pub hand: HandSettings,
    pub knob: KnobConfig,
    pub scenario: ScenarioPreset,
    pub gesture: GestureSettings,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            plate: PlateSpec::default(),
            patches: None,
            grid: None,
            axis: FreqAxis::sweep_default(),
            sensitivity: None,
            lookup: LookupConfig::default(),
            flow: FlowOptions::default(),
            sample_rate: 44_100.0,
            hand: HandSettings::default(),
            knob: KnobConfig::default(),
            scenario: ScenarioPreset::default(),
            gesture: GestureSettings::default(),
        }
    }
}

impl Config {
    /// Built-in defaults, overlaid by the file named on the command line or
    /// in the environment.
    pub fn load(flag: Option<&Path>) -> Result<Self, Failure> {
        let path: Option<PathBuf> = flag
            .map(Path::to_path_buf)
            .or_else(|| std::env::var_os(CONFIG_ENV).filter(|v| !v.is_empty()).map(PathBuf::from));
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(&path).map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
        let cfg: Config = serde_json::from_str(&text).map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
        if let Some(s) = &cfg.sensitivity {
            s.validate().map_err(|e| Failure::data(format!("{}: sensitivity: {e}", path.display())))?;
        }
        Ok(cfg)
    }

    /// Sensitivity from `flag`, else the configured curve, else the default.
    pub fn sensitivity(&self, flag: Option<&Path>) -> Result<SensitivityCurve, Failure> {
        match flag {
            Some(p) => SensitivityCurve::load(p).map_err(|e| Failure::data(format!("{}: {e}", p.display()))),
            None => Ok(self.sensitivity.clone().unwrap_or_default()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg: Config = serde_json::from_str("{}").unwrap();
        assert_eq!(cfg.sample_rate, 44_100.0);
        assert_eq!(cfg.flow, FlowOptions::default());
    }

    #[test]
    fn partial_sections_keep_other_defaults() {
        let cfg: Config = serde_json::from_str(r#"{"knob": {"carrier_hz": 150}, "flow": {"ramp_s": 0.1}}"#).unwrap();
        assert_eq!(cfg.knob.carrier_hz, 150.0);
        assert_eq!(cfg.knob.detent_v, 100.0);
        assert_eq!(cfg.flow.ramp_s, 0.1);
        assert_eq!(cfg.flow.part_duration_s, 1.5);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<Config>(r#"{"plates": {}}"#).is_err());
    }
}
