//! Photovoltaic system chain: sun position, transposition, cell temperature,
//! single-diode module, inverter and energy aggregation.

pub mod diode;
pub mod inverter;
pub mod irradiance;
pub mod simulate;
pub mod solar_position;
pub mod system;
pub mod temperature;

pub use diode::{calc_params_cec, single_diode_max_power, DiodeParams, MaxPowerPoint, ModuleParamsCec};
pub use inverter::{inverter_ac_power, InverterParamsSnl};
pub use irradiance::{
    angle_of_incidence, hay_davies_sky_diffuse, poa_total, ArrayGeometry, PoaIrradiance, SolarGeometry,
};
pub use simulate::{
    daily_energy, simulate_energy, write_daily_csv, write_hourly_csv, DailyEnergy, EnergySimulation, HourlyPower, IrradianceHour,
};
pub use solar_position::{extraterrestrial_dni, solar_position, Location, SolarPosition, SOLAR_CONSTANT};
pub use system::{BundledSystem, PvSystemSpec};
pub use temperature::{faiman_cell_temp, CellTempParams};
