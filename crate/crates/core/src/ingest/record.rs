use std::collections::BTreeMap;
use std::fmt;

use chrono::{Datelike, NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};

/// One hourly row of weather and irradiance observations.
///
/// Irradiance values are W/m², temperatures °C, pressure mbar, precipitable
/// water cm, wind speed m/s and angles degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourlyRecord {
    pub timestamp: NaiveDateTime,
    pub solar_zenith_angle: f64,
    pub surface_albedo: f64,
    pub precipitable_water: f64,
    pub clearsky_dhi: f64,
    pub clearsky_dni: f64,
    pub clearsky_ghi: f64,
    /// NSRDB cloud type code. `None` when the source row carried no cloud
    /// properties; never replaced by a sentinel.
    pub cloud_type: Option<u16>,
    pub dew_point: f64,
    pub relative_humidity: f64,
    pub pressure: f64,
    pub dhi: f64,
    pub dni: f64,
    pub ghi: f64,
    pub fill_flag: i32,
    pub temperature: f64,
    pub wind_direction: f64,
    pub wind_speed: f64,
}

impl HourlyRecord {
    pub fn year(&self) -> i32 {
        self.timestamp.year()
    }

    pub fn month(&self) -> u32 {
        self.timestamp.month()
    }

    pub fn day(&self) -> u32 {
        self.timestamp.day()
    }

    pub fn hour(&self) -> u32 {
        self.timestamp.hour()
    }

    pub fn minute(&self) -> u32 {
        self.timestamp.minute()
    }

    /// Value of a variable, `None` only for an absent cloud type.
    pub fn get(&self, variable: Variable) -> Option<f64> {
        use Variable::*;
        let v = match variable {
            Year => f64::from(self.year()),
            Month => f64::from(self.month()),
            Day => f64::from(self.day()),
            Hour => f64::from(self.hour()),
            Minute => f64::from(self.minute()),
            SolarZenithAngle => self.solar_zenith_angle,
            SurfaceAlbedo => self.surface_albedo,
            PrecipitableWater => self.precipitable_water,
            ClearskyDhi => self.clearsky_dhi,
            ClearskyDni => self.clearsky_dni,
            ClearskyGhi => self.clearsky_ghi,
            CloudType => return self.cloud_type.map(f64::from),
            DewPoint => self.dew_point,
            RelativeHumidity => self.relative_humidity,
            Pressure => self.pressure,
            Dhi => self.dhi,
            Dni => self.dni,
            FillFlag => f64::from(self.fill_flag),
            Ghi => self.ghi,
            Temperature => self.temperature,
            WindDirection => self.wind_direction,
            WindSpeed => self.wind_speed,
        };
        Some(v)
    }
}

/// Every column of the hourly schema, including the calendar fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variable {
    Year,
    Month,
    Day,
    Hour,
    Minute,
    SolarZenithAngle,
    SurfaceAlbedo,
    PrecipitableWater,
    ClearskyDhi,
    ClearskyDni,
    ClearskyGhi,
    CloudType,
    DewPoint,
    RelativeHumidity,
    Pressure,
    Dhi,
    Dni,
    FillFlag,
    Ghi,
    Temperature,
    WindDirection,
    WindSpeed,
}

impl Variable {
    pub const ALL: [Variable; 22] = [
        Variable::Year,
        Variable::Month,
        Variable::Day,
        Variable::Hour,
        Variable::Minute,
        Variable::SolarZenithAngle,
        Variable::SurfaceAlbedo,
        Variable::PrecipitableWater,
        Variable::ClearskyDhi,
        Variable::ClearskyDni,
        Variable::ClearskyGhi,
        Variable::CloudType,
        Variable::DewPoint,
        Variable::RelativeHumidity,
        Variable::Pressure,
        Variable::Dhi,
        Variable::Dni,
        Variable::FillFlag,
        Variable::Ghi,
        Variable::Temperature,
        Variable::WindDirection,
        Variable::WindSpeed,
    ];

    /// Weather and irradiance measurements (no calendar fields, no flags).
    pub const MEASUREMENTS: [Variable; 16] = [
        Variable::SolarZenithAngle,
        Variable::SurfaceAlbedo,
        Variable::PrecipitableWater,
        Variable::ClearskyDhi,
        Variable::ClearskyDni,
        Variable::ClearskyGhi,
        Variable::CloudType,
        Variable::DewPoint,
        Variable::RelativeHumidity,
        Variable::Pressure,
        Variable::Dhi,
        Variable::Dni,
        Variable::Ghi,
        Variable::Temperature,
        Variable::WindDirection,
        Variable::WindSpeed,
    ];

    /// Rows of the dataset summary table, in publication order.
    pub const SUMMARY: [Variable; 13] = [
        Variable::PrecipitableWater,
        Variable::DewPoint,
        Variable::RelativeHumidity,
        Variable::Pressure,
        Variable::Temperature,
        Variable::WindDirection,
        Variable::WindSpeed,
        Variable::ClearskyDhi,
        Variable::ClearskyDni,
        Variable::ClearskyGhi,
        Variable::Dhi,
        Variable::Dni,
        Variable::Ghi,
    ];

    /// Column header as written by NSRDB.
    pub fn column_name(self) -> &'static str {
        use Variable::*;
        match self {
            Year => "Year",
            Month => "Month",
            Day => "Day",
            Hour => "Hour",
            Minute => "Minute",
            SolarZenithAngle => "Solar Zenith Angle",
            SurfaceAlbedo => "Surface Albedo",
            PrecipitableWater => "Precipitable Water",
            ClearskyDhi => "Clearsky DHI",
            ClearskyDni => "Clearsky DNI",
            ClearskyGhi => "Clearsky GHI",
            CloudType => "Cloud Type",
            DewPoint => "Dew Point",
            RelativeHumidity => "Relative Humidity",
            Pressure => "Pressure",
            Dhi => "DHI",
            Dni => "DNI",
            FillFlag => "Fill Flag",
            Ghi => "GHI",
            Temperature => "Temperature",
            WindDirection => "Wind Direction",
            WindSpeed => "Wind Speed",
        }
    }

    /// Lower-case snake_case identifier used in output files.
    pub fn key(self) -> String {
        self.column_name().to_ascii_lowercase().replace(' ', "_")
    }

    pub fn unit(self) -> &'static str {
        use Variable::*;
        match self {
            SolarZenithAngle | WindDirection => "deg",
            PrecipitableWater => "cm",
            ClearskyDhi | ClearskyDni | ClearskyGhi | Dhi | Dni | Ghi => "W/m²",
            DewPoint | Temperature => "°C",
            RelativeHumidity => "%",
            Pressure => "mbar",
            WindSpeed => "m/s",
            _ => "",
        }
    }

    /// Label with unit, e.g. `Temperature (°C)`.
    pub fn label(self) -> String {
        match self.unit() {
            "" => self.column_name().to_string(),
            unit => format!("{} ({unit})", self.column_name()),
        }
    }

    /// Case-, underscore- and whitespace-insensitive header lookup.
    pub fn from_column_name(name: &str) -> Option<Variable> {
        let wanted = normalize_header(name);
        Variable::ALL
            .into_iter()
            .find(|v| normalize_header(v.column_name()) == wanted)
    }

    pub fn is_irradiance(self) -> bool {
        use Variable::*;
        matches!(
            self,
            ClearskyDhi | ClearskyDni | ClearskyGhi | Dhi | Dni | Ghi
        )
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.column_name())
    }
}

pub(crate) fn normalize_header(name: &str) -> String {
    name.trim()
        .trim_start_matches('\u{feff}')
        .chars()
        .filter(|c| !c.is_whitespace() && *c != '_' && *c != '-')
        .flat_map(char::to_lowercase)
        .collect()
}

/// Chronologically ordered hourly records from one source.
///
/// The record list is sorted on construction and never mutated afterwards;
/// every transformation produces a new series.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    records: Vec<HourlyRecord>,
    source_id: String,
    timezone_offset_hours: i32,
    metadata: BTreeMap<String, String>,
}

impl TimeSeries {
    pub fn new(
        mut records: Vec<HourlyRecord>,
        source_id: impl Into<String>,
        timezone_offset_hours: i32,
    ) -> Self {
        records.sort_by_key(|r| r.timestamp);
        TimeSeries {
            records,
            source_id: source_id.into(),
            timezone_offset_hours,
            metadata: BTreeMap::new(),
        }
    }

    pub fn with_metadata(mut self, metadata: BTreeMap<String, String>) -> Self {
        self.metadata = metadata;
        self
    }

    /// New series with the same provenance but different records.
    pub fn derive(&self, records: Vec<HourlyRecord>) -> Self {
        TimeSeries::new(records, self.source_id.clone(), self.timezone_offset_hours)
            .with_metadata(self.metadata.clone())
    }

    /// Keeps the records matching `keep`.
    pub fn filter(&self, mut keep: impl FnMut(&HourlyRecord) -> bool) -> Self {
        self.derive(self.records.iter().filter(|r| keep(r)).cloned().collect())
    }

    pub fn records(&self) -> &[HourlyRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<HourlyRecord> {
        self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn timezone_offset_hours(&self) -> i32 {
        self.timezone_offset_hours
    }

    pub fn metadata(&self) -> &BTreeMap<String, String> {
        &self.metadata
    }

    /// Values of one variable, skipping absent cloud types.
    pub fn values(&self, variable: Variable) -> Vec<f64> {
        self.records.iter().filter_map(|r| r.get(variable)).collect()
    }

    /// Concatenates several series (e.g. one file per year) into one.
    pub fn concat(parts: Vec<TimeSeries>) -> Option<TimeSeries> {
        let mut iter = parts.into_iter();
        let first = iter.next()?;
        let tz = first.timezone_offset_hours;
        let source = first.source_id.clone();
        let metadata = first.metadata.clone();
        let mut records = first.records;
        for part in iter {
            records.extend(part.records);
        }
        Some(TimeSeries::new(records, source, tz).with_metadata(metadata))
    }
}
