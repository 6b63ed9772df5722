//! Synthetic hourly series for tests, demos and dataset-free runs.

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, Timelike};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};

use crate::ingest::{HourlyRecord, TimeSeries};
use crate::pv::{extraterrestrial_dni, solar_position, Location};

fn start() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2010, 1, 1)
        .unwrap()
        .and_hms_opt(0, 0, 0)
        .unwrap()
}

/// `n` hourly records from 2010-01-01 00:00 in which every measurement equals
/// `value`, except surface albedo (0.2) and cloud type (0).
pub fn constant_series(n: usize, value: f64) -> TimeSeries {
    let records = (0..n)
        .map(|i| HourlyRecord {
            timestamp: start() + Duration::hours(i as i64),
            solar_zenith_angle: value,
            surface_albedo: 0.2,
            precipitable_water: value,
            clearsky_dhi: value,
            clearsky_dni: value,
            clearsky_ghi: value,
            cloud_type: Some(0),
            dew_point: value,
            relative_humidity: value,
            pressure: value,
            dhi: value,
            dni: value,
            ghi: value,
            fill_flag: 0,
            temperature: value,
            wind_direction: value,
            wind_speed: value,
        })
        .collect();
    TimeSeries::new(records, "constant", 0)
}

// NSRDB cloud type codes used by the generator with their transmission of
// clear-sky global irradiance.
const CLOUD_TYPES: [(u16, f64); 7] = [
    (0, 1.0),
    (1, 0.93),
    (3, 0.45),
    (4, 0.38),
    (6, 0.22),
    (7, 0.72),
    (8, 0.3),
];

fn is_wet_month(month: u32) -> bool {
    (5..=10).contains(&month)
}

fn draw_cloud(rng: &mut ChaCha8Rng, month: u32) -> usize {
    let weights: [f64; 7] = if is_wet_month(month) {
        [0.12, 0.10, 0.22, 0.14, 0.16, 0.12, 0.14]
    } else {
        [0.38, 0.18, 0.12, 0.06, 0.06, 0.14, 0.06]
    };
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

/// Kasten–Young relative optical air mass.
fn air_mass(zenith: f64) -> f64 {
    1.0 / (zenith.to_radians().cos() + 0.50572 * (96.07995 - zenith).powf(-1.6364))
}

/// Hourly series resembling the Ibadan record: local time UTC+1 stamped at
/// half past the hour, a humid tropical climate with a May–October wet
/// season, Markov-chained cloud types and a simple clear-sky model driven by
/// the computed sun position.
pub fn ibadan_like(first_year: i32, years: u32, seed: u64) -> TimeSeries {
    let loc = Location::IBADAN;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let wind = LogNormal::<f64>::new(0.3, 0.45).expect("wind distribution");
    let begin = NaiveDate::from_ymd_opt(first_year, 1, 1)
        .expect("valid year")
        .and_hms_opt(0, 30, 0)
        .unwrap();
    let end = NaiveDate::from_ymd_opt(first_year + years as i32, 1, 1)
        .expect("valid year")
        .and_hms_opt(0, 30, 0)
        .unwrap();

    let mut records = Vec::new();
    let mut cloud = 0usize;
    let mut t = begin;
    while t < end {
        let month = t.month();
        let wet = is_wet_month(month);
        let doy = f64::from(t.ordinal());
        let hour = f64::from(t.hour()) + f64::from(t.minute()) / 60.0;

        if rng.random::<f64>() > 0.82 {
            cloud = draw_cloud(&mut rng, month);
        }
        let (cloud_code, transmission) = CLOUD_TYPES[cloud];

        let pos = solar_position(loc.to_utc(t), &loc).expect("generator years inside window");
        let zenith = pos.zenith;
        let e0 = extraterrestrial_dni(t.date());

        // Harmattan haze lowers dew point and turbidity in December–February.
        let harmattan = matches!(month, 12 | 1 | 2);
        let dew_point = (if harmattan { 19.5 } else { 23.4 })
            + 0.6 * (std::f64::consts::TAU * (hour - 6.0) / 24.0).cos()
            + 1.6 * unit.sample(&mut rng);
        let precipitable_water = (4.65 + 0.27 * (dew_point - 22.8) + 0.2 * unit.sample(&mut rng)).clamp(0.8, 6.9);

        let (clearsky_ghi, clearsky_dni, clearsky_dhi) = if zenith < 90.0 {
            let am = air_mass(zenith);
            let tau = if harmattan { 0.62 } else { 0.70 } - 0.012 * (precipitable_water - 4.65);
            let dni = e0 * tau.powf(am.powf(0.678));
            let cos_z = zenith.to_radians().cos();
            let dhi = (e0 * cos_z * (0.271 - 0.294 * dni / e0)).max(0.0) * 1.35;
            ((dni * cos_z + dhi).round(), dni.round(), dhi.round())
        } else {
            (0.0, 0.0, 0.0)
        };

        let noise = (1.0 + 0.08 * unit.sample(&mut rng)).max(0.0);
        let k = (transmission * noise).min(1.05);
        let ghi = (clearsky_ghi * k).round().max(0.0);
        let dni = (clearsky_dni * k.powi(2).min(1.0) * if transmission < 0.5 { 0.3 } else { 1.0 })
            .round()
            .max(0.0);
        let cos_z = zenith.to_radians().cos().max(0.0);
        let dhi = (ghi - dni * cos_z).round().clamp(0.0, ghi.max(0.0));

        let season_temp = if wet { -1.2 } else { 1.0 } + 0.8 * (std::f64::consts::TAU * (doy - 60.0) / 365.0).cos();
        let diurnal = 3.2 * (std::f64::consts::TAU * (hour - 9.0) / 24.0).sin();
        let temperature = (25.1 + season_temp + diurnal + 0.004 * ghi - 1.0 + 0.9 * unit.sample(&mut rng))
            .max(dew_point);
        let relative_humidity = magnus_rh(temperature, dew_point).min(100.0);
        let pressure = (987.4_f64 + if wet { 0.8 } else { -0.6 }
            + 0.9 * (std::f64::consts::TAU * hour / 12.0).cos()
            + 1.0 * unit.sample(&mut rng))
        .round();
        let wind_speed: f64 = ((wind.sample(&mut rng) * if wet { 1.15 } else { 0.85 }) * 10.0).round() / 10.0;
        let wind_direction = (210.0 + 45.0 * unit.sample(&mut rng)).rem_euclid(360.0).round();

        records.push(HourlyRecord {
            timestamp: t,
            solar_zenith_angle: (zenith * 100.0).round() / 100.0,
            surface_albedo: 0.17,
            precipitable_water: (precipitable_water * 10.0).round() / 10.0,
            clearsky_dhi,
            clearsky_dni,
            clearsky_ghi,
            cloud_type: Some(cloud_code),
            dew_point: (dew_point * 10.0).round() / 10.0,
            relative_humidity: (relative_humidity * 100.0).round() / 100.0,
            pressure,
            dhi,
            dni,
            ghi,
            fill_flag: 0,
            temperature: (temperature * 10.0).round() / 10.0,
            wind_direction,
            wind_speed: wind_speed.max(0.1),
        });
        t += Duration::hours(1);
    }
    TimeSeries::new(records, "synthetic-ibadan", 1)
}

/// Relative humidity from temperature and dew point (Magnus form), percent.
fn magnus_rh(temperature: f64, dew_point: f64) -> f64 {
    let gamma = |t: f64| 17.625 * t / (243.04 + t);
    100.0 * (gamma(dew_point) - gamma(temperature)).exp()
}
