//! Five-parameter single-diode module model with CEC parameter translation.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const BOLTZMANN_EV: f64 = 8.617_333_262e-5;
const T_REF_K: f64 = 298.15;
const IRRADIANCE_REF: f64 = 1000.0;
const EG_REF: f64 = 1.121;
const D_EG_DT: f64 = -0.000_267_7;
const CURRENT_TOL: f64 = 1e-10;
const MAX_ITER: usize = 200;

/// CEC module parameters at reference conditions (1000 W/m², 25 °C).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuleParamsCec {
    pub name: String,
    /// Cells in series.
    pub n_s: u32,
    pub i_sc_ref: f64,
    pub v_oc_ref: f64,
    pub i_mp_ref: f64,
    pub v_mp_ref: f64,
    /// Short-circuit current temperature coefficient, A/°C.
    pub alpha_sc: f64,
    /// Open-circuit voltage temperature coefficient, V/°C.
    pub beta_oc: f64,
    /// Nominal operating cell temperature, °C. Carried for completeness only.
    #[serde(default)]
    pub t_noct: f64,
    /// Modified ideality factor n·Ns·Vth at reference, V.
    pub a_ref: f64,
    pub i_l_ref: f64,
    /// Diode saturation current at reference, A. A value ≤ 0 is recovered
    /// from the open-circuit condition by [`ModuleParamsCec::resolve`].
    pub i_o_ref: f64,
    pub r_s: f64,
    pub r_sh_ref: f64,
    /// Adjustment to `alpha_sc`, percent.
    pub adjust: f64,
    /// Power temperature coefficient, %/°C.
    #[serde(default)]
    pub gamma_r: f64,
    /// Rated power at STC, W.
    pub stc: f64,
}

impl ModuleParamsCec {
    /// Trina Solar TSM-500DE18M(II). The saturation current is published
    /// rounded to zero and is recovered on resolve.
    pub fn trina_tsm_500de18m_ii() -> Self {
        ModuleParamsCec {
            name: "Trina Solar TSM-500DE18M(II)".into(),
            n_s: 75,
            i_sc_ref: 12.28,
            v_oc_ref: 51.7,
            i_mp_ref: 11.69,
            v_mp_ref: 42.8,
            alpha_sc: 0.006754,
            beta_oc: -0.136488,
            t_noct: 45.0,
            a_ref: 1.9071,
            i_l_ref: 12.2823,
            i_o_ref: 0.0,
            r_s: 0.257757,
            r_sh_ref: 1373.48,
            adjust: 7.10179,
            gamma_r: -0.337,
            stc: 500.332,
        }
    }

    /// Canadian Solar CS3Y-500MS.
    pub fn canadian_cs3y_500ms() -> Self {
        ModuleParamsCec {
            name: "Canadian Solar CS3Y-500MS".into(),
            n_s: 78,
            i_sc_ref: 11.77,
            v_oc_ref: 53.7,
            i_mp_ref: 11.12,
            v_mp_ref: 45.0,
            alpha_sc: 0.005885,
            beta_oc: -0.13962,
            t_noct: 45.0,
            a_ref: 1.9949684337270626,
            i_l_ref: 11.77787226112155,
            i_o_ref: 2.3707571494843015e-11,
            r_s: 0.22363339190852521,
            r_sh_ref: 334.35946849747984,
            adjust: 10.480869653415862,
            gamma_r: -0.34,
            stc: 500.4,
        }
    }

    /// Saturation current that puts the reference I-V curve through
    /// `(V_oc_ref, 0)`.
    pub fn saturation_current_from_voc(&self) -> f64 {
        (self.i_l_ref - self.v_oc_ref / self.r_sh_ref) / (self.v_oc_ref / self.a_ref).exp_m1()
    }

    /// Fills in a non-positive `i_o_ref` and validates the result.
    pub fn resolve(mut self) -> Result<Self> {
        if self.i_o_ref <= 0.0 {
            let recovered = self.saturation_current_from_voc();
            tracing::debug!(module = %self.name, i_o_ref = recovered, "recovered saturation current");
            self.i_o_ref = recovered;
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("i_o_ref", self.i_o_ref),
            ("a_ref", self.a_ref),
            ("r_s", self.r_s),
            ("r_sh_ref", self.r_sh_ref),
            ("i_l_ref", self.i_l_ref),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "module '{}': {name} must be positive and finite (got {v})",
                    self.name
                )));
            }
        }
        let stc = single_diode_max_power(self, IRRADIANCE_REF, 25.0)?;
        let nameplate = self.v_mp_ref * self.i_mp_ref;
        if ((stc.p_mp - nameplate) / nameplate).abs() > 0.01 {
            return Err(Error::InvalidParameter(format!(
                "module '{}': STC maximum power {:.3} W is not within 1% of Vmp·Imp = {:.3} W",
                self.name, stc.p_mp, nameplate
            )));
        }
        Ok(())
    }
}

/// Diode-equation parameters at one operating condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiodeParams {
    pub photocurrent: f64,
    pub saturation_current: f64,
    pub series_resistance: f64,
    pub shunt_resistance: f64,
    /// n·Ns·Vth, V.
    pub n_ns_vth: f64,
}

/// Translates reference parameters to an operating condition (De Soto
/// equations with the CEC adjustment of `alpha_sc`).
pub fn calc_params_cec(module: &ModuleParamsCec, irradiance: f64, cell_temp: f64) -> DiodeParams {
    let tc = cell_temp + 273.15;
    let dt = tc - T_REF_K;
    let alpha = module.alpha_sc * (1.0 - module.adjust / 100.0);
    let eg = EG_REF * (1.0 + D_EG_DT * dt);
    let ratio = irradiance / IRRADIANCE_REF;
    DiodeParams {
        photocurrent: ratio * (module.i_l_ref + alpha * dt),
        saturation_current: module.i_o_ref
            * (tc / T_REF_K).powi(3)
            * (EG_REF / (BOLTZMANN_EV * T_REF_K) - eg / (BOLTZMANN_EV * tc)).exp(),
        series_resistance: module.r_s,
        shunt_resistance: module.r_sh_ref / ratio,
        n_ns_vth: module.a_ref * tc / T_REF_K,
    }
}

impl DiodeParams {
    /// `I_L − I_o(exp((V+I·R_s)/a) − 1) − (V+I·R_s)/R_sh − I`.
    pub fn residual(&self, voltage: f64, current: f64) -> f64 {
        let vd = voltage + current * self.series_resistance;
        self.photocurrent
            - self.saturation_current * (vd / self.n_ns_vth).exp_m1()
            - vd / self.shunt_resistance
            - current
    }

    fn residual_derivative(&self, voltage: f64, current: f64) -> f64 {
        let vd = voltage + current * self.series_resistance;
        -self.saturation_current * self.series_resistance / self.n_ns_vth
            * (vd / self.n_ns_vth).exp()
            - self.series_resistance / self.shunt_resistance
            - 1.0
    }

    /// Terminal current at `voltage ≥ 0`.
    pub fn current_at(&self, voltage: f64) -> Result<f64> {
        // The residual is strictly decreasing in I and is ≤ 0 at I = I_L.
        let hi = self.photocurrent;
        let mut lo = hi - 1.0;
        let mut widen = 0;
        while self.residual(voltage, lo) < 0.0 {
            lo -= (hi - lo).max(1.0);
            widen += 1;
            if widen > 60 {
                return Err(Error::Convergence(format!(
                    "no current bracket at V = {voltage} V ({self:?})"
                )));
            }
        }
        safeguarded_newton(
            |i| self.residual(voltage, i),
            |i| self.residual_derivative(voltage, i),
            lo,
            hi,
            hi.max(0.0),
        )
        .map_err(|e| Error::Convergence(format!("current at V = {voltage} V: {e} ({self:?})")))
    }

    /// Open-circuit voltage.
    pub fn open_circuit_voltage(&self) -> Result<f64> {
        let f = |v: f64| {
            self.photocurrent
                - self.saturation_current * (v / self.n_ns_vth).exp_m1()
                - v / self.shunt_resistance
        };
        let df = |v: f64| {
            -self.saturation_current / self.n_ns_vth * (v / self.n_ns_vth).exp()
                - 1.0 / self.shunt_resistance
        };
        let hi = self.n_ns_vth * (self.photocurrent / self.saturation_current).ln_1p();
        safeguarded_newton(f, df, 0.0, hi, hi)
            .map_err(|e| Error::Convergence(format!("open-circuit voltage: {e} ({self:?})")))
    }

    /// Maximum power point by golden-section search on `P(V)` over `[0, V_oc]`.
    pub fn max_power_point(&self) -> Result<MaxPowerPoint> {
        if !(self.photocurrent > 0.0) {
            return Ok(MaxPowerPoint::default());
        }
        let v_oc = self.open_circuit_voltage()?;
        let i_sc = self.current_at(0.0)?;
        let power = |v: f64| -> Result<f64> { Ok(v * self.current_at(v)?) };

        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = (0.0, v_oc);
        let mut c = b - inv_phi * (b - a);
        let mut d = a + inv_phi * (b - a);
        let (mut pc, mut pd) = (power(c)?, power(d)?);
        while b - a > 1e-9 * v_oc.max(1.0) {
            if pc > pd {
                b = d;
                d = c;
                pd = pc;
                c = b - inv_phi * (b - a);
                pc = power(c)?;
            } else {
                a = c;
                c = d;
                pc = pd;
                d = a + inv_phi * (b - a);
                pd = power(d)?;
            }
        }
        let v_mp = 0.5 * (a + b);
        let i_mp = self.current_at(v_mp)?;
        Ok(MaxPowerPoint {
            v_mp,
            i_mp,
            p_mp: v_mp * i_mp,
            v_oc,
            i_sc,
        })
    }
}

/// Newton iteration kept inside a sign-change bracket `[lo, hi]` of a
/// decreasing function; falls back to bisection when a step leaves it.
fn safeguarded_newton(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    start: f64,
) -> std::result::Result<f64, String> {
    let mut x = start.clamp(lo, hi);
    for _ in 0..MAX_ITER {
        let fx = f(x);
        if !fx.is_finite() {
            return Err(format!("non-finite residual at {x}"));
        }
        if fx.abs() < CURRENT_TOL {
            return Ok(x);
        }
        if fx > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let step = fx / df(x);
        let next = x - step;
        x = if next.is_finite() && next > lo && next < hi {
            next
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= f64::EPSILON * x.abs().max(1.0) {
            let fx = f(x);
            if fx.abs() < CURRENT_TOL {
                return Ok(x);
            }
            return Err(format!("bracket collapsed at {x} with residual {fx:e}"));
        }
    }
    Err(format!("no convergence after {MAX_ITER} iterations (last {x})"))
}

/// Operating point summary of an I-V curve.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct MaxPowerPoint {
    pub v_mp: f64,
    pub i_mp: f64,
    pub p_mp: f64,
    pub v_oc: f64,
    pub i_sc: f64,
}

/// Maximum power point of one module at the given effective irradiance
/// (W/m²) and cell temperature (°C). Zero irradiance yields all zeros.
pub fn single_diode_max_power(
    module: &ModuleParamsCec,
    effective_irradiance: f64,
    cell_temp: f64,
) -> Result<MaxPowerPoint> {
    if !effective_irradiance.is_finite() || !cell_temp.is_finite() {
        return Err(Error::NonFinite(format!(
            "irradiance {effective_irradiance}, cell temperature {cell_temp}"
        )));
    }
    if effective_irradiance <= 0.0 {
        return Ok(MaxPowerPoint::default());
    }
    calc_params_cec(module, effective_irradiance, cell_temp).max_power_point()
}
