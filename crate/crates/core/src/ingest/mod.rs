//! Hourly weather/irradiance CSV ingestion, summary statistics and validation.

mod csv_io;
mod record;
mod stats;
mod validate;

pub use csv_io::{load_path, parse_csv, parse_str, write_csv, write_csv_file, HeaderMode, TIME_ZONE_KEY};
pub use record::{HourlyRecord, TimeSeries, Variable};
pub use stats::{quantile, summary_stats, summary_stats_for, SummaryRow, SummaryTable};
pub use validate::{validate, RangeViolation, ValidationReport};
