use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use tracing::{debug, info, warn};

use super::record::{normalize_header, HourlyRecord, TimeSeries, Variable};
use crate::{Error, Result};

/// How the header of an hourly CSV file is laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeaderMode {
    /// Sniff the first line: a `Year,Month,...` header means plain.
    #[default]
    Auto,
    /// The first line is the column header.
    Plain,
    /// NSRDB download layout: a metadata key line and a metadata value line
    /// precede the column header.
    Nsrdb,
}

impl FromStr for HeaderMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(HeaderMode::Auto),
            "plain" => Ok(HeaderMode::Plain),
            "nsrdb" | "nsrdb-two-line" => Ok(HeaderMode::Nsrdb),
            other => Err(Error::Config(format!("unknown header mode '{other}'"))),
        }
    }
}

/// Metadata key holding the UTC offset of the timestamps.
pub const TIME_ZONE_KEY: &str = "Time Zone";

const CALENDAR: [Variable; 4] = [Variable::Year, Variable::Month, Variable::Day, Variable::Hour];

/// Parses one hourly CSV file.
pub fn parse_csv(path: impl AsRef<Path>, mode: HeaderMode) -> Result<TimeSeries> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let source_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_str(&text, mode, &source_id).map_err(|e| match e {
        Error::EmptyFile(_) => Error::EmptyFile(path.to_path_buf()),
        other => other,
    })
}

/// Parses a file, or every `*.csv` file of a directory (sorted by name) into
/// one series.
pub fn load_path(path: impl AsRef<Path>, mode: HeaderMode) -> Result<TimeSeries> {
    let path = path.as_ref();
    if !path.is_dir() {
        return parse_csv(path, mode);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(path)
        .map_err(|e| Error::io(path, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .is_some_and(|ext| ext.eq_ignore_ascii_case("csv"))
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::EmptyFile(path.to_path_buf()));
    }
    info!("loading {} CSV files from {}", files.len(), path.display());
    let parts = files
        .iter()
        .map(|f| parse_csv(f, mode))
        .collect::<Result<Vec<_>>>()?;
    Ok(TimeSeries::concat(parts).expect("at least one file"))
}

/// Parses CSV text. `source_id` is recorded on the resulting series.
pub fn parse_str(text: &str, mode: HeaderMode, source_id: &str) -> Result<TimeSeries> {
    let lines: Vec<&str> = text.lines().collect();
    let first_content = lines.iter().position(|l| !l.trim().is_empty());
    let Some(first_content) = first_content else {
        return Err(Error::EmptyFile(PathBuf::from(source_id)));
    };

    let mode = match mode {
        HeaderMode::Auto if looks_like_header(lines[first_content]) => HeaderMode::Plain,
        HeaderMode::Auto => HeaderMode::Nsrdb,
        m => m,
    };

    let (header_index, metadata) = match mode {
        HeaderMode::Plain => (first_content, BTreeMap::new()),
        _ => {
            let header_index = lines
                .iter()
                .enumerate()
                .skip(first_content)
                .take(8)
                .find(|(_, l)| looks_like_header(l))
                .map(|(i, _)| i)
                .ok_or_else(|| Error::MissingColumn("Year".into()))?;
            let meta_lines: Vec<&str> = lines[first_content..header_index]
                .iter()
                .copied()
                .filter(|l| !l.trim().is_empty())
                .collect();
            (header_index, parse_metadata(&meta_lines))
        }
    };

    let mut metadata = metadata;
    let timezone_offset_hours = metadata
        .remove(TIME_ZONE_KEY)
        .as_deref()
        .and_then(|v| v.trim().parse::<f64>().ok())
        .map(|v| v.round() as i32)
        .unwrap_or(0);

    let body = lines[header_index..].join("\n");
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());
    let headers = reader.headers()?.clone();

    let mut columns: BTreeMap<Variable, usize> = BTreeMap::new();
    let mut ignored = Vec::new();
    for (idx, name) in headers.iter().enumerate() {
        match Variable::from_column_name(name) {
            Some(v) => {
                columns.entry(v).or_insert(idx);
            }
            None if normalize_header(name).is_empty() => {}
            None => ignored.push(name.to_string()),
        }
    }
    if !ignored.is_empty() {
        info!("ignoring unknown columns: {}", ignored.join(", "));
    }
    for v in Variable::ALL {
        if v != Variable::Minute && !columns.contains_key(&v) {
            return Err(Error::MissingColumn(v.column_name().to_string()));
        }
    }
    if !columns.contains_key(&Variable::Minute) {
        warn!("no Minute column; timestamps are taken at the top of the hour");
    }

    let line_offset = header_index as u64;
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map(|p| p.line()).unwrap_or(0) + line_offset;
        if row.iter().all(|c| c.is_empty()) {
            continue;
        }
        records.push(parse_row(&row, &columns, line)?);
    }
    if records.is_empty() {
        return Err(Error::EmptyFile(PathBuf::from(source_id)));
    }
    debug!("parsed {} records from {source_id}", records.len());

    Ok(TimeSeries::new(records, source_id, timezone_offset_hours).with_metadata(metadata))
}

fn looks_like_header(line: &str) -> bool {
    let fields: Vec<String> = line.split(',').map(normalize_header).collect();
    fields.iter().any(|f| f == "year") && fields.iter().any(|f| f == "month")
}

fn parse_metadata(lines: &[&str]) -> BTreeMap<String, String> {
    let mut metadata = BTreeMap::new();
    if lines.len() < 2 {
        return metadata;
    }
    let split = |line: &str| -> Vec<String> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(line.as_bytes());
        rdr.records()
            .next()
            .and_then(|r| r.ok())
            .map(|r| r.iter().map(|s| s.trim().to_string()).collect())
            .unwrap_or_default()
    };
    let keys = split(lines[0]);
    let values = split(lines[1]);
    for (k, v) in keys.into_iter().zip(values) {
        if !k.is_empty() {
            metadata.insert(k, v);
        }
    }
    metadata
}

fn parse_row(
    row: &csv::StringRecord,
    columns: &BTreeMap<Variable, usize>,
    line: u64,
) -> Result<HourlyRecord> {
    let cell = |v: Variable| -> &str { columns.get(&v).and_then(|&i| row.get(i)).unwrap_or("") };
    let number = |v: Variable| -> Result<f64> {
        let raw = cell(v);
        raw.parse::<f64>().map_err(|_| Error::Row {
            line,
            message: format!("column \"{}\": cannot parse {raw:?} as a number", v.column_name()),
        })
    };
    let integer = |v: Variable| -> Result<i64> {
        let x = number(v)?;
        if x.fract() != 0.0 || !x.is_finite() {
            return Err(Error::Row {
                line,
                message: format!("column \"{}\": {x} is not an integer", v.column_name()),
            });
        }
        Ok(x as i64)
    };

    let [year, month, day, hour] = CALENDAR.map(integer);
    let (year, month, day, hour) = (year?, month?, day?, hour?);
    let minute = if columns.contains_key(&Variable::Minute) {
        integer(Variable::Minute)?
    } else {
        0
    };
    let timestamp = NaiveDate::from_ymd_opt(year as i32, month as u32, day as u32)
        .and_then(|d| d.and_hms_opt(hour as u32, minute as u32, 0))
        .ok_or_else(|| Error::Row {
            line,
            message: format!("invalid date/time {year}-{month}-{day} {hour}:{minute}"),
        })?;

    let cloud_type = {
        let raw = cell(Variable::CloudType);
        if raw.is_empty() || raw.eq_ignore_ascii_case("nan") {
            None
        } else {
            let code = integer(Variable::CloudType)?;
            u16::try_from(code).ok()
        }
    };

    Ok(HourlyRecord {
        timestamp,
        solar_zenith_angle: number(Variable::SolarZenithAngle)?,
        surface_albedo: number(Variable::SurfaceAlbedo)?,
        precipitable_water: number(Variable::PrecipitableWater)?,
        clearsky_dhi: number(Variable::ClearskyDhi)?,
        clearsky_dni: number(Variable::ClearskyDni)?,
        clearsky_ghi: number(Variable::ClearskyGhi)?,
        cloud_type,
        dew_point: number(Variable::DewPoint)?,
        relative_humidity: number(Variable::RelativeHumidity)?,
        pressure: number(Variable::Pressure)?,
        dhi: number(Variable::Dhi)?,
        dni: number(Variable::Dni)?,
        ghi: number(Variable::Ghi)?,
        fill_flag: integer(Variable::FillFlag)? as i32,
        temperature: number(Variable::Temperature)?,
        wind_direction: number(Variable::WindDirection)?,
        wind_speed: number(Variable::WindSpeed)?,
    })
}

/// Writes a series in the layout [`parse_str`] reads back.
///
/// Series with metadata or a non-zero UTC offset are written in the NSRDB
/// layout so the offset survives a round trip.
pub fn write_csv<W: Write>(series: &TimeSeries, writer: W) -> Result<()> {
    let mut out = csv::WriterBuilder::new().flexible(true).from_writer(writer);

    let mut metadata = series.metadata().clone();
    if series.timezone_offset_hours() != 0 || !metadata.is_empty() {
        // the offset lives on the series, not in the metadata map
        metadata.insert(
            TIME_ZONE_KEY.to_string(),
            series.timezone_offset_hours().to_string(),
        );
        out.write_record(metadata.keys())?;
        out.write_record(metadata.values())?;
    }

    out.write_record(Variable::ALL.iter().map(|v| v.column_name()))?;
    for r in series.records() {
        let fields: Vec<String> = Variable::ALL
            .iter()
            .map(|&v| match v {
                Variable::CloudType => r.cloud_type.map(|c| c.to_string()).unwrap_or_default(),
                Variable::FillFlag => r.fill_flag.to_string(),
                v => {
                    let x = r.get(v).expect("only cloud type can be absent");
                    if matches!(
                        v,
                        Variable::Year
                            | Variable::Month
                            | Variable::Day
                            | Variable::Hour
                            | Variable::Minute
                    ) {
                        format!("{}", x as i64)
                    } else {
                        format!("{x}")
                    }
                }
            })
            .collect();
        out.write_record(&fields)?;
    }
    out.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

/// Writes a series to `path`, creating parent directories.
pub fn write_csv_file(series: &TimeSeries, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(series, std::io::BufWriter::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "Year,Month,Day,Hour,Minute,Temperature,Clearsky DHI,Clearsky DNI,Clearsky GHI,Cloud Type,Dew Point,DHI,DNI,Fill Flag,GHI,Relative Humidity,Solar Zenith Angle,Surface Albedo,Pressure,Precipitable Water,Wind Direction,Wind Speed";
    const ROW: &str = "2010,3,1,6,30,23.5,12,80,20,1,21.2,14,60,0,18,87.1,88.4,0.17,988,4.6,215,1.4";

    #[test]
    fn single_row_plain() {
        let ts = parse_str(&format!("{HEADER}\n{ROW}\n"), HeaderMode::Auto, "t").unwrap();
        assert_eq!(ts.len(), 1);
        let r = &ts.records()[0];
        assert_eq!(r.timestamp.to_string(), "2010-03-01 06:30:00");
        assert_eq!(r.temperature, 23.5);
        assert_eq!(r.clearsky_dhi, 12.0);
        assert_eq!(r.cloud_type, Some(1));
        assert_eq!(r.dew_point, 21.2);
        assert_eq!(r.ghi, 18.0);
        assert_eq!(r.relative_humidity, 87.1);
        assert_eq!(r.solar_zenith_angle, 88.4);
        assert_eq!(r.surface_albedo, 0.17);
        assert_eq!(r.pressure, 988.0);
        assert_eq!(r.precipitable_water, 4.6);
        assert_eq!(r.wind_direction, 215.0);
        assert_eq!(r.wind_speed, 1.4);
        assert_eq!(ts.timezone_offset_hours(), 0);
    }

    #[test]
    fn nsrdb_two_line_header_is_sniffed() {
        let text = format!(
            "Source,Location ID,Latitude,Longitude,Time Zone,Elevation\nNSRDB,1,7.45,3.89,1,200\n{HEADER}\n{ROW}\n"
        );
        let ts = parse_str(&text, HeaderMode::Auto, "t").unwrap();
        assert_eq!(ts.len(), 1);
        assert_eq!(ts.timezone_offset_hours(), 1);
        assert_eq!(ts.metadata()["Latitude"], "7.45");
    }

    #[test]
    fn header_match_is_case_insensitive() {
        let header = HEADER.to_ascii_lowercase().replace(' ', "_");
        let ts = parse_str(&format!("{header}\n{ROW}"), HeaderMode::Plain, "t").unwrap();
        assert_eq!(ts.records()[0].clearsky_ghi, 20.0);
    }

    #[test]
    fn missing_temperature_column_is_named() {
        let cols: Vec<&str> = HEADER.split(',').collect();
        let vals: Vec<&str> = ROW.split(',').collect();
        let keep: Vec<usize> = (0..cols.len()).filter(|&i| cols[i] != "Temperature").collect();
        let h: Vec<&str> = keep.iter().map(|&i| cols[i]).collect();
        let v: Vec<&str> = keep.iter().map(|&i| vals[i]).collect();
        let err = parse_str(&format!("{}\n{}", h.join(","), v.join(",")), HeaderMode::Auto, "t")
            .unwrap_err();
        match err {
            Error::MissingColumn(c) => assert_eq!(c, "Temperature"),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn bad_cell_reports_line_number() {
        let bad = ROW.replace("23.5", "warm");
        let text = format!("{HEADER}\n{ROW}\n{bad}\n");
        match parse_str(&text, HeaderMode::Plain, "t").unwrap_err() {
            Error::Row { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("Temperature"), "{message}");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn empty_inputs_are_distinct_errors() {
        assert!(matches!(
            parse_str("", HeaderMode::Auto, "t"),
            Err(Error::EmptyFile(_))
        ));
        assert!(matches!(
            parse_str(&format!("{HEADER}\n"), HeaderMode::Auto, "t"),
            Err(Error::EmptyFile(_))
        ));
    }

    #[test]
    fn absent_cloud_type_stays_absent() {
        let row = ROW.replace(",1,21.2", ",,21.2");
        let ts = parse_str(&format!("{HEADER}\n{row}"), HeaderMode::Plain, "t").unwrap();
        assert_eq!(ts.records()[0].cloud_type, None);
        let neg = ROW.replace(",1,21.2", ",-15,21.2");
        let ts = parse_str(&format!("{HEADER}\n{neg}"), HeaderMode::Plain, "t").unwrap();
        assert_eq!(ts.records()[0].cloud_type, None);
    }

    #[test]
    fn extra_columns_are_ignored() {
        let text = format!("{HEADER},Ozone\n{ROW},0.25\n");
        let ts = parse_str(&text, HeaderMode::Plain, "t").unwrap();
        assert_eq!(ts.len(), 1);
    }

    #[test]
    fn rows_are_sorted() {
        let later = ROW.replacen("2010,3,1,6", "2010,3,1,9", 1);
        let ts = parse_str(&format!("{HEADER}\n{later}\n{ROW}\n"), HeaderMode::Plain, "t").unwrap();
        assert!(ts.records()[0].timestamp < ts.records()[1].timestamp);
    }

    #[test]
    fn write_then_parse_is_identity() {
        let text = format!(
            "Source,Time Zone\nNSRDB,1\n{HEADER}\n{ROW}\n{}\n",
            ROW.replacen("2010,3,1,6", "2010,3,1,7", 1).replace(",1,21.2", ",,21.2")
        );
        let ts = parse_str(&text, HeaderMode::Auto, "t").unwrap();
        let mut buf = Vec::new();
        write_csv(&ts, &mut buf).unwrap();
        let back = parse_str(std::str::from_utf8(&buf).unwrap(), HeaderMode::Auto, "t").unwrap();
        assert_eq!(back, ts);
    }
}
