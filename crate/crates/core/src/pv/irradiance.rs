//! Transposition of horizontal irradiance onto a tilted plane.

use serde::{Deserialize, Serialize};

use super::solar_position::SolarPosition;
use crate::{Error, Result};

/// Floor applied to cos(zenith) in the beam projection ratio (cos 87°).
pub fn cos_zenith_floor() -> f64 {
    87.0_f64.to_radians().cos()
}

/// Orientation of a fixed array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    /// Tilt from horizontal, degrees in [0, 90].
    pub tilt: f64,
    /// Azimuth of the surface normal clockwise from north, degrees in [0, 360).
    pub azimuth: f64,
    /// Ground albedo. `None` uses each record's surface albedo.
    #[serde(default)]
    pub albedo: Option<f64>,
}

impl ArrayGeometry {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=90.0).contains(&self.tilt) {
            return Err(Error::InvalidParameter(format!("tilt {} outside [0, 90]", self.tilt)));
        }
        if !(0.0..360.0).contains(&self.azimuth) {
            return Err(Error::InvalidParameter(format!(
                "azimuth {} outside [0, 360)",
                self.azimuth
            )));
        }
        if let Some(a) = self.albedo {
            if !(0.0..=1.0).contains(&a) {
                return Err(Error::InvalidParameter(format!("albedo {a} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Sun–array geometry for one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolarGeometry {
    /// Zenith used for transposition (refraction-corrected), degrees.
    pub zenith: f64,
    pub azimuth: f64,
    /// Angle of incidence on the array, degrees in [0, 180].
    pub aoi: f64,
    /// Extraterrestrial normal irradiance, W/m².
    pub extraterrestrial_dni: f64,
}

impl SolarGeometry {
    pub fn new(position: &SolarPosition, array: &ArrayGeometry, extraterrestrial_dni: f64) -> Self {
        SolarGeometry {
            zenith: position.apparent_zenith,
            azimuth: position.azimuth,
            aoi: angle_of_incidence(position.apparent_zenith, position.azimuth, array),
            extraterrestrial_dni,
        }
    }
}

/// Angle between the sun direction and the array normal, degrees.
pub fn angle_of_incidence(zenith: f64, azimuth: f64, array: &ArrayGeometry) -> f64 {
    let (z, tilt) = (zenith.to_radians(), array.tilt.to_radians());
    let cos_aoi =
        z.cos() * tilt.cos() + z.sin() * tilt.sin() * (azimuth - array.azimuth).to_radians().cos();
    cos_aoi.clamp(-1.0, 1.0).acos().to_degrees()
}

/// Hay–Davies sky-diffuse irradiance on the tilted plane, W/m².
///
/// The anisotropy index is `dni / extraterrestrial_dni`; the circumsolar share
/// is projected with `R_b = max(cos aoi, 0) / max(cos zenith, cos 87°)`, and the
/// remainder is treated as isotropic with view factor `(1 + cos tilt) / 2`.
/// A horizontal plane has `R_b = 1` by construction.
pub fn hay_davies_sky_diffuse(dhi: f64, dni: f64, geometry: &SolarGeometry, tilt: f64) -> f64 {
    let anisotropy = dni / geometry.extraterrestrial_dni;
    let rb = projection_ratio(geometry, tilt);
    let isotropic = (1.0 + tilt.to_radians().cos()) / 2.0;
    (dhi * (anisotropy * rb + (1.0 - anisotropy) * isotropic)).max(0.0)
}

fn projection_ratio(geometry: &SolarGeometry, tilt: f64) -> f64 {
    if tilt == 0.0 {
        return 1.0;
    }
    let cos_aoi = geometry.aoi.to_radians().cos().max(0.0);
    let cos_zenith = geometry.zenith.to_radians().cos().max(cos_zenith_floor());
    cos_aoi / cos_zenith
}

/// Plane-of-array irradiance components, W/m².
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct PoaIrradiance {
    pub beam: f64,
    pub sky_diffuse: f64,
    pub ground_reflected: f64,
    pub global: f64,
}

/// Beam + Hay–Davies sky diffuse + isotropic ground reflection.
///
/// Returns all zeros when the sun is at or below the horizon.
pub fn poa_total(
    ghi: f64,
    dhi: f64,
    dni: f64,
    geometry: &SolarGeometry,
    tilt: f64,
    albedo: f64,
) -> PoaIrradiance {
    if geometry.zenith >= 90.0 {
        return PoaIrradiance::default();
    }
    let beam = if tilt == 0.0 {
        dni * geometry.zenith.to_radians().cos()
    } else {
        dni * geometry.aoi.to_radians().cos().max(0.0)
    }
    .max(0.0);
    let sky_diffuse = hay_davies_sky_diffuse(dhi, dni, geometry, tilt);
    let ground_reflected = (ghi * albedo * (1.0 - tilt.to_radians().cos()) / 2.0).max(0.0);
    PoaIrradiance {
        beam,
        sky_diffuse,
        ground_reflected,
        global: beam + sky_diffuse + ground_reflected,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometry(zenith: f64, azimuth: f64, aoi: f64) -> SolarGeometry {
        SolarGeometry {
            zenith,
            azimuth,
            aoi,
            extraterrestrial_dni: 1367.0,
        }
    }

    fn array(tilt: f64, azimuth: f64) -> ArrayGeometry {
        ArrayGeometry {
            tilt,
            azimuth,
            albedo: None,
        }
    }

    #[test]
    fn horizontal_aoi_is_zenith() {
        for z in [0.0, 12.5, 45.0, 89.0] {
            assert!((angle_of_incidence(z, 123.0, &array(0.0, 180.0)) - z).abs() < 1e-9);
        }
    }

    #[test]
    fn sun_on_normal_gives_zero_aoi() {
        assert!(angle_of_incidence(30.0, 170.0, &array(30.0, 170.0)).abs() < 1e-6);
    }

    #[test]
    fn aoi_reference() {
        // pvlib.irradiance.aoi(20, 180, 30, 170)
        let aoi = angle_of_incidence(30.0, 170.0, &array(20.0, 180.0));
        assert!((aoi - 10.823679238685797).abs() < 1e-9);
    }

    #[test]
    fn isotropic_limit_without_beam() {
        let g = geometry(30.0, 180.0, 20.0);
        let expected = 100.0 * (1.0 + 20f64.to_radians().cos()) / 2.0;
        assert_eq!(hay_davies_sky_diffuse(100.0, 0.0, &g, 20.0), expected);
    }

    #[test]
    fn horizontal_plane_keeps_dhi() {
        let g = geometry(75.0, 100.0, 75.0);
        assert_eq!(hay_davies_sky_diffuse(123.0, 456.0, &g, 0.0), 123.0);
        let g = geometry(88.5, 100.0, 88.5);
        assert_eq!(hay_davies_sky_diffuse(20.0, 30.0, &g, 0.0), 20.0);
    }

    #[test]
    fn hand_evaluated_case() {
        // A = 500/1367, R_b = cos20/cos30, view factor (1 + cos20)/2
        let g = geometry(30.0, 180.0, 20.0);
        let d = hay_davies_sky_diffuse(100.0, 500.0, &g, 20.0);
        let a: f64 = 500.0 / 1367.0;
        let rb = 20f64.to_radians().cos() / 30f64.to_radians().cos();
        assert!((a - 0.36576).abs() < 1e-5);
        assert!((rb - 1.08506).abs() < 1e-5);
        assert!((d - 101.2).abs() < 0.05, "{d}");
    }

    #[test]
    fn total_matches_reference_transposition() {
        // pvlib get_total_irradiance(20, 180, 30, 170, dni=500, ghi=530, dhi=100,
        // dni_extra=1367, model="haydavies", albedo=0.2)
        let a = array(20.0, 180.0);
        let g = SolarGeometry {
            zenith: 30.0,
            azimuth: 170.0,
            aoi: angle_of_incidence(30.0, 170.0, &a),
            extraterrestrial_dni: 1367.0,
        };
        let poa = poa_total(530.0, 100.0, 500.0, &g, 20.0, 0.2);
        assert!((poa.beam - 491.10486288305316).abs() < 1e-9);
        assert!((poa.sky_diffuse - 102.99457210551728).abs() < 1e-9);
        assert!((poa.ground_reflected - 3.1962910983468533).abs() < 1e-9);
        assert!((poa.global - 597.2957260869173).abs() < 1e-9);
    }

    #[test]
    fn night_is_dark() {
        let poa = poa_total(10.0, 10.0, 10.0, &geometry(95.0, 270.0, 100.0), 10.0, 0.2);
        assert_eq!(poa, PoaIrradiance::default());
    }

    #[test]
    fn horizontal_closure() {
        for z in [5.0, 45.0, 86.0, 88.0, 89.9] {
            let g = geometry(z, 200.0, z);
            let poa = poa_total(400.0, 80.0, 600.0, &g, 0.0, 0.3);
            assert_eq!(poa.ground_reflected, 0.0);
            let expected = 600.0 * z.to_radians().cos() + 80.0;
            assert!((poa.global - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn validation() {
        assert!(array(91.0, 0.0).validate().is_err());
        assert!(array(10.0, 360.0).validate().is_err());
        assert!(array(10.0, 180.0).validate().is_ok());
    }
}
