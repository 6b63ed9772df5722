use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Heat-loss coefficients of the Faiman module temperature model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellTempParams {
    /// Constant heat transfer component, W/(m²·K).
    pub u0: f64,
    /// Convective heat transfer component, W·s/(m³·K).
    pub u1: f64,
}

impl Default for CellTempParams {
    fn default() -> Self {
        CellTempParams { u0: 25.0, u1: 6.84 }
    }
}

impl CellTempParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.u0 > 0.0) || !(self.u1 >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Faiman coefficients need u0 > 0 and u1 >= 0 (got {}, {})",
                self.u0, self.u1
            )));
        }
        Ok(())
    }
}

/// Module temperature `T_a + G / (u0 + u1·V)`, °C.
pub fn faiman_cell_temp(g_poa: f64, t_ambient: f64, wind_speed: f64, params: &CellTempParams) -> f64 {
    t_ambient + g_poa / (params.u0 + params.u1 * wind_speed)
}
