//! Sun position from the Michalsky (1988) almanac algorithm.
//!
//! The algorithm is a truncated ephemeris (mean longitude, mean anomaly,
//! two-term equation of centre) valid for 1950-2050 with a stated accuracy of
//! 0.01° in zenith. Refraction follows the same reference.

use chrono::{Datelike, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Solar constant used for extraterrestrial irradiance, W/m².
pub const SOLAR_CONSTANT: f64 = 1367.0;

/// Geographic site.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Location {
    /// Degrees north.
    pub latitude: f64,
    /// Degrees east.
    pub longitude: f64,
    /// Metres above sea level.
    #[serde(default)]
    pub altitude: f64,
    /// Offset of local standard time from UTC, hours.
    #[serde(default)]
    pub timezone_offset: f64,
}

impl Location {
    /// CPEEL, University of Ibadan.
    pub const IBADAN: Location = Location {
        latitude: 7.4515,
        longitude: 3.8899,
        altitude: 0.0,
        timezone_offset: 1.0,
    };

    pub fn validate(&self) -> Result<()> {
        if !(self.latitude.abs() <= 90.0) || !(self.longitude.abs() <= 180.0) {
            return Err(Error::InvalidParameter(format!(
                "location ({}, {}) outside |lat| <= 90, |lon| <= 180",
                self.latitude, self.longitude
            )));
        }
        Ok(())
    }

    /// Converts a local standard time stamp to UTC.
    pub fn to_utc(&self, local: NaiveDateTime) -> NaiveDateTime {
        local - chrono::Duration::seconds((self.timezone_offset * 3600.0).round() as i64)
    }
}

/// Sun position in the sky.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolarPosition {
    /// Geometric zenith, degrees.
    pub zenith: f64,
    /// Zenith corrected for atmospheric refraction, degrees.
    pub apparent_zenith: f64,
    /// Azimuth clockwise from north, degrees in [0, 360).
    pub azimuth: f64,
}

impl SolarPosition {
    pub fn apparent_elevation(&self) -> f64 {
        90.0 - self.apparent_zenith
    }
}

fn julian_day(utc: NaiveDateTime) -> f64 {
    let secs = utc.and_utc().timestamp() as f64
        + f64::from(utc.and_utc().timestamp_subsec_nanos()) * 1e-9;
    secs / 86_400.0 + 2_440_587.5
}

/// Sun position for a UTC timestamp.
pub fn solar_position(utc: NaiveDateTime, location: &Location) -> Result<SolarPosition> {
    let year = utc.year();
    if !(1950..=2050).contains(&year) {
        return Err(Error::TimestampOutOfRange(utc));
    }
    let jd = julian_day(utc);
    let n = jd - 2_451_545.0;
    let hour_utc = (jd + 0.5).fract() * 24.0;

    let mean_longitude = (280.460 + 0.985_647_4 * n).rem_euclid(360.0);
    let mean_anomaly = (357.528 + 0.985_600_3 * n).rem_euclid(360.0).to_radians();
    let ecliptic_longitude = (mean_longitude
        + 1.915 * mean_anomaly.sin()
        + 0.020 * (2.0 * mean_anomaly).sin())
    .rem_euclid(360.0)
    .to_radians();
    let obliquity = (23.439 - 0.000_000_4 * n).to_radians();

    let right_ascension = (obliquity.cos() * ecliptic_longitude.sin())
        .atan2(ecliptic_longitude.cos())
        .rem_euclid(std::f64::consts::TAU);
    let declination = (obliquity.sin() * ecliptic_longitude.sin()).asin();

    let gmst = (6.697_375 + 0.065_709_824_2 * n + hour_utc).rem_euclid(24.0);
    let lmst = (gmst + location.longitude / 15.0).rem_euclid(24.0);
    let mut hour_angle = (lmst * 15.0).to_radians() - right_ascension;
    if hour_angle < -std::f64::consts::PI {
        hour_angle += std::f64::consts::TAU;
    } else if hour_angle > std::f64::consts::PI {
        hour_angle -= std::f64::consts::TAU;
    }

    let lat = location.latitude.to_radians();
    let sin_elevation =
        declination.sin() * lat.sin() + declination.cos() * lat.cos() * hour_angle.cos();
    let elevation = sin_elevation.clamp(-1.0, 1.0).asin().to_degrees();
    let azimuth = (-declination.cos() * hour_angle.sin())
        .atan2(declination.sin() * lat.cos() - declination.cos() * hour_angle.cos() * lat.sin())
        .to_degrees()
        .rem_euclid(360.0);

    let refraction = if elevation > -0.56 {
        3.515_61 * (0.1594 + 0.0196 * elevation + 0.000_02 * elevation * elevation)
            / (1.0 + 0.505 * elevation + 0.0845 * elevation * elevation)
    } else {
        0.56
    };
    let apparent_elevation = (elevation + refraction).min(90.0);

    Ok(SolarPosition {
        zenith: 90.0 - elevation,
        apparent_zenith: 90.0 - apparent_elevation,
        azimuth,
    })
}

/// Extraterrestrial normal irradiance for a calendar day (Spencer's Fourier
/// series for the Earth–Sun distance), W/m².
pub fn extraterrestrial_dni(date: NaiveDate) -> f64 {
    let b = std::f64::consts::TAU * f64::from(date.ordinal() - 1) / 365.0;
    SOLAR_CONSTANT
        * (1.000_11 + 0.034_221 * b.cos() + 0.001_28 * b.sin() + 0.000_719 * (2.0 * b).cos()
            + 0.000_077 * (2.0 * b).sin())
}
