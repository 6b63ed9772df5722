#![allow(dead_code)]

use chrono::{Duration, NaiveDate, NaiveDateTime};
use proptest::prelude::*;
use solarcast::{HourlyRecord, TimeSeries};

pub fn t0() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2015, 3, 1).unwrap().and_hms_opt(0, 30, 0).unwrap()
}

prop_compose! {
    pub fn record_at(i: usize)(
        zen in 0.0..180.0f64,
        alb in 0.0..1.0f64,
        pw in 0.0..7.0f64,
        cs in prop::array::uniform3(0.0..1100.0f64),
        cloud in prop::option::weighted(0.9, 0u16..10),
        dew in -5.0..30.0f64,
        rh in 0.0..100.0f64,
        p in 950.0..1020.0f64,
        irr in prop::array::uniform3(0.0..1100.0f64),
        fill in 0i32..6,
        temp in 15.0..40.0f64,
        wd in 0.0..360.0f64,
        ws in 0.0..12.0f64,
    ) -> HourlyRecord {
        HourlyRecord {
            timestamp: t0() + Duration::hours(i as i64),
            solar_zenith_angle: zen,
            surface_albedo: alb,
            precipitable_water: pw,
            clearsky_dhi: cs[0],
            clearsky_dni: cs[1],
            clearsky_ghi: cs[2],
            cloud_type: cloud,
            dew_point: dew,
            relative_humidity: rh,
            pressure: p,
            dhi: irr[0],
            dni: irr[1],
            ghi: irr[2],
            fill_flag: fill,
            temperature: temp,
            wind_direction: wd,
            wind_speed: ws,
        }
    }
}

/// Hourly series of 1..=max rows with consecutive timestamps.
pub fn series(max: usize) -> impl Strategy<Value = TimeSeries> {
    (1..=max).prop_flat_map(|n| {
        (0..n)
            .map(record_at)
            .collect::<Vec<_>>()
            .prop_map(|records| TimeSeries::new(records, "prop", 1))
    })
}

pub fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
