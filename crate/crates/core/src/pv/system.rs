use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::diode::ModuleParamsCec;
use super::inverter::InverterParamsSnl;
use super::irradiance::ArrayGeometry;
use super::solar_position::Location;
use super::temperature::CellTempParams;
use crate::{Error, Result};

const TRINA_TOML: &str = include_str!("../../data/systems/trina.toml");
const CANADIAN_TOML: &str = include_str!("../../data/systems/canadian.toml");

fn one() -> u32 {
    1
}

/// A complete PV system: site, array, module, inverter and thermal model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PvSystemSpec {
    pub name: String,
    pub location: Location,
    pub array: ArrayGeometry,
    pub module: ModuleParamsCec,
    pub inverter: InverterParamsSnl,
    #[serde(default)]
    pub thermal: CellTempParams,
    #[serde(default = "one")]
    pub modules_per_string: u32,
    #[serde(default = "one")]
    pub strings: u32,
    /// Fraction of plane-of-array irradiance lost before the module, [0, 1).
    #[serde(default)]
    pub loss_fraction: f64,
    /// Offset added to record timestamps before computing the sun position.
    #[serde(default)]
    pub position_offset_minutes: i64,
}

/// Systems shipped with the library.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BundledSystem {
    Trina,
    Canadian,
}

impl BundledSystem {
    pub const ALL: [BundledSystem; 2] = [BundledSystem::Trina, BundledSystem::Canadian];

    pub fn name(self) -> &'static str {
        match self {
            BundledSystem::Trina => "trina",
            BundledSystem::Canadian => "canadian",
        }
    }

    pub fn toml(self) -> &'static str {
        match self {
            BundledSystem::Trina => TRINA_TOML,
            BundledSystem::Canadian => CANADIAN_TOML,
        }
    }

    pub fn spec(self) -> Result<PvSystemSpec> {
        PvSystemSpec::from_toml_str(self.toml())
    }
}

impl FromStr for BundledSystem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "trina" => Ok(BundledSystem::Trina),
            "canadian" => Ok(BundledSystem::Canadian),
            other => Err(Error::Config(format!(
                "unknown bundled system '{other}' (expected trina or canadian)"
            ))),
        }
    }
}

impl PvSystemSpec {
    /// Parses and validates a TOML system description.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: PvSystemSpec =
            toml::from_str(text).map_err(|e| Error::Config(format!("system spec: {e}")))?;
        spec.resolve()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("system spec: {e}")))
    }

    fn resolve(mut self) -> Result<Self> {
        self.module = self.module.resolve()?;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        self.location.validate()?;
        self.array.validate()?;
        self.module.validate()?;
        self.inverter.validate()?;
        self.thermal.validate()?;
        if self.modules_per_string == 0 || self.strings == 0 {
            return Err(Error::InvalidParameter(
                "modules_per_string and strings must be at least 1".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.loss_fraction) {
            return Err(Error::InvalidParameter(format!(
                "loss_fraction {} outside [0, 1)",
                self.loss_fraction
            )));
        }
        Ok(())
    }

    /// Scales a single-module operating point to the array: `(P_dc, V_dc)`.
    pub fn array_dc(&self, module_power: f64, module_voltage: f64) -> (f64, f64) {
        let n = f64::from(self.modules_per_string * self.strings);
        (module_power * n, module_voltage * f64::from(self.modules_per_string))
    }
}
