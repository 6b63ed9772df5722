//! Sandia grid-tied inverter performance model.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Sandia inverter coefficients (CEC inverter database layout).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InverterParamsSnl {
    pub name: String,
    /// Rated AC output, W.
    pub paco: f64,
    /// DC input at which rated AC output is reached, W.
    pub pdco: f64,
    /// DC voltage at which the coefficients were fitted, V.
    pub vdco: f64,
    /// DC power needed to start inversion, W.
    pub pso: f64,
    /// Curvature of the AC–DC relation at Vdco, 1/W.
    pub c0: f64,
    /// Voltage sensitivity of Pdco, 1/V.
    pub c1: f64,
    /// Voltage sensitivity of Pso, 1/V.
    pub c2: f64,
    /// Voltage sensitivity of C0, 1/V.
    pub c3: f64,
    /// Night tare, W.
    pub pnt: f64,
    pub vdcmax: f64,
    #[serde(default)]
    pub idcmax: f64,
    pub mppt_low: f64,
    pub mppt_high: f64,
}

impl InverterParamsSnl {
    /// Fronius Primo GEN24 3.8 208-240, CEC inverter database.
    pub fn fronius_primo_gen24_3_8() -> Self {
        InverterParamsSnl {
            name: "Fronius Primo GEN24 3.8 208-240".into(),
            paco: 3802.0,
            pdco: 3904.29,
            vdco: 400.0,
            pso: 27.8054,
            c0: -0.000002,
            c1: -0.000033,
            c2: -0.001674,
            c3: -0.000169,
            pnt: 8.3,
            vdcmax: 480.0,
            idcmax: 9.76072,
            mppt_low: 200.0,
            mppt_high: 480.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.paco < self.pdco) || !(self.pso > 0.0) || !(self.mppt_low < self.mppt_high) {
            return Err(Error::InvalidParameter(format!(
                "inverter '{}' needs Paco < Pdco, Pso > 0 and mppt_low < mppt_high",
                self.name
            )));
        }
        Ok(())
    }
}

/// AC output for a DC operating point, W.
///
/// Below the start-up power the inverter draws its night tare (negative
/// output); above rated output the result is clipped at `paco`.
pub fn inverter_ac_power(p_dc: f64, v_dc: f64, params: &InverterParamsSnl) -> Result<f64> {
    if !(0.0..=params.vdcmax).contains(&v_dc) {
        return Err(Error::InvalidParameter(format!(
            "DC voltage {v_dc} V outside [0, {}] V",
            params.vdcmax
        )));
    }
    if p_dc <= params.pso {
        return Ok(-params.pnt);
    }
    let dv = v_dc - params.vdco;
    let a = params.pdco * (1.0 + params.c1 * dv);
    let b = params.pso * (1.0 + params.c2 * dv);
    let c = params.c0 * (1.0 + params.c3 * dv);
    if a <= b {
        return Err(Error::InvalidParameter(format!(
            "inverter model undefined at {v_dc} V (A = {a} <= B = {b})"
        )));
    }
    // Algebraically (Paco/(A−B) − C(A−B))(Pdc−B) + C(Pdc−B)², arranged so that
    // Pdc = A yields Paco without rounding.
    let x = p_dc - b;
    let p_ac = params.paco * (x / (a - b)) + c * x * (p_dc - a);
    Ok(p_ac.min(params.paco))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rated_point_gives_rated_output() {
        let inv = InverterParamsSnl::fronius_primo_gen24_3_8();
        assert_eq!(inverter_ac_power(inv.pdco, inv.vdco, &inv).unwrap(), 3802.0);
    }

    #[test]
    fn night_tare_below_start_up() {
        let inv = InverterParamsSnl::fronius_primo_gen24_3_8();
        assert_eq!(inverter_ac_power(10.0, 350.0, &inv).unwrap(), -8.3);
        assert_eq!(inverter_ac_power(inv.pso, 350.0, &inv).unwrap(), -8.3);
        assert_eq!(inverter_ac_power(0.0, 0.0, &inv).unwrap(), -8.3);
    }

    #[test]
    fn clips_at_rated_output() {
        let inv = InverterParamsSnl::fronius_primo_gen24_3_8();
        assert_eq!(inverter_ac_power(2.0 * inv.pdco, inv.vdco, &inv).unwrap(), inv.paco);
    }

    #[test]
    fn efficiency_is_plausible() {
        let inv = InverterParamsSnl::fronius_primo_gen24_3_8();
        for p in [400.0, 1000.0, 2000.0, 3000.0] {
            let ac = inverter_ac_power(p, 340.0, &inv).unwrap();
            let eff = ac / p;
            assert!((0.9..1.0).contains(&eff), "{p}: {eff}");
        }
    }

    #[test]
    fn voltage_outside_range_is_rejected() {
        let inv = InverterParamsSnl::fronius_primo_gen24_3_8();
        assert!(inverter_ac_power(1000.0, 500.0, &inv).is_err());
        assert!(inverter_ac_power(1000.0, -1.0, &inv).is_err());
    }

    #[test]
    fn degenerate_coefficients_are_rejected() {
        let mut inv = InverterParamsSnl::fronius_primo_gen24_3_8();
        inv.pso = 5000.0;
        inv.pdco = 3904.29;
        assert!(inverter_ac_power(6000.0, 400.0, &inv).is_err());
    }
}
