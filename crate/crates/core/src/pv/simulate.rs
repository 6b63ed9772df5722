//! Hourly PV power and daily energy from irradiance and weather.

use std::io::Write;

use chrono::{Duration, NaiveDate, NaiveDateTime};
use rayon::prelude::*;
use serde::Serialize;

use super::diode::single_diode_max_power;
use super::inverter::inverter_ac_power;
use super::irradiance::{poa_total, SolarGeometry};
use super::solar_position::{extraterrestrial_dni, solar_position};
use super::system::PvSystemSpec;
use super::temperature::faiman_cell_temp;
use crate::ingest::HourlyRecord;
use crate::{Error, Result};

/// Horizontal irradiance components for one hour, W/m².
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IrradianceHour {
    pub timestamp: NaiveDateTime,
    pub ghi: f64,
    pub dni: f64,
    pub dhi: f64,
}

impl IrradianceHour {
    pub fn observed(record: &HourlyRecord) -> Self {
        IrradianceHour {
            timestamp: record.timestamp,
            ghi: record.ghi,
            dni: record.dni,
            dhi: record.dhi,
        }
    }
}

/// Simulated operating point for one hour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HourlyPower {
    pub timestamp: NaiveDateTime,
    pub g_poa: f64,
    pub cell_temp: f64,
    pub p_dc: f64,
    pub v_dc: f64,
    pub p_ac: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DailyEnergy {
    pub date: NaiveDate,
    pub energy_kwh: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergySimulation {
    pub hourly: Vec<HourlyPower>,
    pub daily: Vec<DailyEnergy>,
}

fn simulate_hour(
    irr: &IrradianceHour,
    weather: &HourlyRecord,
    system: &PvSystemSpec,
) -> Result<HourlyPower> {
    let local = irr.timestamp + Duration::minutes(system.position_offset_minutes);
    let position = solar_position(system.location.to_utc(local), &system.location)?;
    let geometry = SolarGeometry::new(&position, &system.array, extraterrestrial_dni(local.date()));
    let albedo = system.array.albedo.unwrap_or(weather.surface_albedo);
    let poa = poa_total(irr.ghi, irr.dhi, irr.dni, &geometry, system.array.tilt, albedo);
    let cell_temp = faiman_cell_temp(poa.global, weather.temperature, weather.wind_speed, &system.thermal);
    let effective = poa.global * (1.0 - system.loss_fraction);
    let mpp = single_diode_max_power(&system.module, effective, cell_temp)?;
    let (p_dc, v_dc) = system.array_dc(mpp.p_mp, mpp.v_mp);
    let p_ac = inverter_ac_power(p_dc, v_dc, &system.inverter)?;
    Ok(HourlyPower {
        timestamp: irr.timestamp,
        g_poa: poa.global,
        cell_temp,
        p_dc,
        v_dc,
        p_ac,
    })
}

/// Runs the PV chain hour by hour and sums AC energy per calendar day.
///
/// `irradiance` and `weather` must carry the same timestamps in the same
/// order. Night tare (negative AC power) does not count toward energy.
pub fn simulate_energy(
    irradiance: &[IrradianceHour],
    weather: &[HourlyRecord],
    system: &PvSystemSpec,
) -> Result<EnergySimulation> {
    if irradiance.len() != weather.len() {
        return Err(Error::Misaligned(format!(
            "{} irradiance hours vs {} weather hours",
            irradiance.len(),
            weather.len()
        )));
    }
    if let Some((i, (a, b))) = irradiance
        .iter()
        .zip(weather)
        .enumerate()
        .find(|(_, (a, b))| a.timestamp != b.timestamp)
    {
        return Err(Error::Misaligned(format!(
            "row {i}: irradiance at {} but weather at {}",
            a.timestamp, b.timestamp
        )));
    }
    let hourly = irradiance
        .par_iter()
        .zip(weather.par_iter())
        .map(|(irr, w)| simulate_hour(irr, w, system))
        .collect::<Result<Vec<_>>>()?;
    let daily = daily_energy(&hourly);
    Ok(EnergySimulation { hourly, daily })
}

/// Daily sums of `max(P_ac, 0) / 1000`, kWh, in date order.
pub fn daily_energy(hourly: &[HourlyPower]) -> Vec<DailyEnergy> {
    let mut days = std::collections::BTreeMap::<NaiveDate, f64>::new();
    for h in hourly {
        *days.entry(h.timestamp.date()).or_default() += h.p_ac.max(0.0) / 1000.0;
    }
    days.into_iter()
        .map(|(date, energy_kwh)| DailyEnergy { date, energy_kwh })
        .collect()
}

pub fn write_hourly_csv(hourly: &[HourlyPower], w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["timestamp", "g_poa", "cell_temp", "p_dc", "p_ac"])?;
    for h in hourly {
        out.write_record([
            h.timestamp.format("%Y-%m-%d %H:%M").to_string(),
            format!("{:.3}", h.g_poa),
            format!("{:.3}", h.cell_temp),
            format!("{:.3}", h.p_dc),
            format!("{:.3}", h.p_ac),
        ])?;
    }
    out.flush().map_err(|e| Error::Csv(e.into()))
}

pub fn write_daily_csv(daily: &[DailyEnergy], w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["date", "energy_kwh"])?;
    for d in daily {
        out.write_record([d.date.to_string(), format!("{:.6}", d.energy_kwh)])?;
    }
    out.flush().map_err(|e| Error::Csv(e.into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pv::BundledSystem;
    use crate::synthetic;

    fn day(ghi: f64, dni: f64, dhi: f64) -> (Vec<IrradianceHour>, Vec<HourlyRecord>) {
        let weather: Vec<HourlyRecord> = synthetic::constant_series(24, 25.0)
            .into_records()
            .into_iter()
            .enumerate()
            .map(|(h, mut r)| {
                r.timestamp = NaiveDate::from_ymd_opt(2022, 3, 15)
                    .unwrap()
                    .and_hms_opt(h as u32, 0, 0)
                    .unwrap();
                r.wind_speed = 1.0;
                r.surface_albedo = 0.2;
                r
            })
            .collect();
        let irr = weather
            .iter()
            .map(|r| IrradianceHour {
                timestamp: r.timestamp,
                ghi,
                dni,
                dhi,
            })
            .collect();
        (irr, weather)
    }

    #[test]
    fn dark_day_yields_no_energy() {
        let system = BundledSystem::Trina.spec().unwrap();
        let (irr, weather) = day(0.0, 0.0, 0.0);
        let sim = simulate_energy(&irr, &weather, &system).unwrap();
        assert_eq!(sim.daily.len(), 1);
        assert_eq!(sim.daily[0].energy_kwh, 0.0);
        assert!(sim.hourly.iter().all(|h| h.p_ac == -system.inverter.pnt));
    }

    #[test]
    fn bright_day_is_bounded_by_inverter_rating() {
        let system = BundledSystem::Canadian.spec().unwrap();
        let (irr, weather) = day(900.0, 700.0, 150.0);
        let sim = simulate_energy(&irr, &weather, &system).unwrap();
        assert!(sim.hourly.iter().all(|h| h.p_ac <= system.inverter.paco));
        let e = sim.daily[0].energy_kwh;
        assert!(e > 10.0 && e < 24.0 * 3.802, "{e}");
    }

    #[test]
    fn loss_fraction_scales_effective_irradiance() {
        let mut system = BundledSystem::Trina.spec().unwrap();
        let (irr, weather) = day(500.0, 300.0, 150.0);
        let noon = 12;
        let full = simulate_hour(&irr[noon], &weather[noon], &system).unwrap();
        system.loss_fraction = 0.5;
        let halved = simulate_hour(&irr[noon], &weather[noon], &system).unwrap();
        let expected = single_diode_max_power(&system.module, full.g_poa * 0.5, full.cell_temp)
            .unwrap()
            .p_mp
            * 8.0;
        assert_eq!(halved.g_poa, full.g_poa);
        assert!((halved.p_dc - expected).abs() < 1e-9);
    }

    #[test]
    fn misaligned_inputs_are_rejected() {
        let system = BundledSystem::Trina.spec().unwrap();
        let (irr, weather) = day(100.0, 100.0, 50.0);
        assert!(matches!(
            simulate_energy(&irr[1..], &weather[..23], &system),
            Err(Error::Misaligned(_))
        ));
        assert!(matches!(
            simulate_energy(&irr[..3], &weather[..2], &system),
            Err(Error::Misaligned(_))
        ));
    }

    #[test]
    fn energy_sums_per_calendar_day() {
        let t = |d: u32, h: u32| NaiveDate::from_ymd_opt(2022, 1, d).unwrap().and_hms_opt(h, 0, 0).unwrap();
        let hp = |ts, p_ac| HourlyPower { timestamp: ts, g_poa: 0.0, cell_temp: 0.0, p_dc: 0.0, v_dc: 0.0, p_ac };
        let daily = daily_energy(&[hp(t(1, 10), 1000.0), hp(t(1, 11), 500.0), hp(t(2, 9), -8.3), hp(t(2, 10), 250.0)]);
        assert_eq!(daily.len(), 2);
        assert_eq!(daily[0].energy_kwh, 1.5);
        assert_eq!(daily[1].energy_kwh, 0.25);
    }
}
