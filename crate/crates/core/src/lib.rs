//! Two-stage solar irradiance forecasting and photovoltaic energy simulation.
//!
//! The crate is organised along the processing chain:
//!
//! * [`ingest`] parses NSRDB-style hourly CSV files into a [`TimeSeries`] and
//!   computes summary statistics and validation reports.
//! * [`preprocess`] aligns timestamps, removes night hours, splits the data into
//!   train/test/validation partitions and provides the standard and min-max
//!   scalers.
//! * [`forest`] is a CART regression tree and bagged random forest.
//! * [`pipeline`] trains and runs the two-stage model: clear-sky irradiance from
//!   weather, then actual irradiance from weather, predicted clear-sky irradiance
//!   and cloud type.
//! * [`metrics`] holds RMSE, MAE, nRMSE, MASE and the nRMSE rating bands.
//! * [`pv`] turns irradiance into plane-of-array irradiance, cell temperature,
//!   DC power (single-diode model) and AC power (Sandia inverter model).
//! * [`eda`] produces correlation matrices and month-by-hour pivots.
//! * [`experiment`] wires everything into a reproducible batch run.

pub mod eda;
pub mod error;
pub mod experiment;
pub mod forest;
pub mod ingest;
pub mod metrics;
pub mod pipeline;
pub mod preprocess;
pub mod pv;
pub mod synthetic;

pub use error::{Error, Result};
pub use ingest::{HeaderMode, HourlyRecord, TimeSeries, Variable};
