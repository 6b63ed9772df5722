mod common;

use proptest::prelude::*;
use solarcast::pv::{
    angle_of_incidence, faiman_cell_temp, hay_davies_sky_diffuse, inverter_ac_power, poa_total, single_diode_max_power,
    ArrayGeometry, BundledSystem, CellTempParams, InverterParamsSnl, SolarGeometry, calc_params_cec,
};

fn unit(zenith: f64, azimuth: f64) -> [f64; 3] {
    let (z, a) = (zenith.to_radians(), azimuth.to_radians());
    [z.sin() * a.sin(), z.sin() * a.cos(), z.cos()]
}

fn geometry(zenith: f64, azimuth: f64, array: &ArrayGeometry) -> SolarGeometry {
    SolarGeometry {
        zenith,
        azimuth,
        aoi: angle_of_incidence(zenith, azimuth, array),
        extraterrestrial_dni: 1367.0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn aoi_matches_vector_angle(z in 0.0..90.0f64, az in 0.0..360.0f64, tilt in 0.0..90.0f64, paz in 0.0..360.0f64) {
        let sun = unit(z, az);
        let normal = unit(tilt, paz);
        let dot: f64 = sun.iter().zip(&normal).map(|(a, b)| a * b).sum();
        let want = dot.clamp(-1.0, 1.0).acos().to_degrees();
        let got = angle_of_incidence(z, az, &ArrayGeometry { tilt, azimuth: paz, albedo: None });
        prop_assert!((got - want).abs() < 1e-6, "{} vs {}", got, want);
    }

    #[test]
    fn faiman_matches_re_evaluation(g in 0.0..1400.0f64, ta in -10.0..50.0f64, ws in 0.0..20.0f64, u0 in 5.0..50.0f64, u1 in 0.0..15.0f64) {
        let p = CellTempParams { u0, u1 };
        let want = ta + g / (u0 + u1 * ws);
        prop_assert!(common::rel_close(faiman_cell_temp(g, ta, ws, &p), want, 1e-12));
    }

    #[test]
    fn hay_davies_matches_re_evaluation(
        dhi in 0.0..500.0f64, dni in 0.0..1000.0f64, z in 0.0..89.9f64, az in 0.0..360.0f64, tilt in 0.01..90.0f64,
    ) {
        let array = ArrayGeometry { tilt, azimuth: 180.0, albedo: None };
        let g = geometry(z, az, &array);
        let a = dni / 1367.0;
        let rb = g.aoi.to_radians().cos().max(0.0) / z.to_radians().cos().max(87f64.to_radians().cos());
        let want = (dhi * (a * rb + (1.0 - a) * (1.0 + tilt.to_radians().cos()) / 2.0)).max(0.0);
        prop_assert!(common::rel_close(hay_davies_sky_diffuse(dhi, dni, &g, tilt), want, 1e-12));
    }

    #[test]
    fn hay_davies_limits(dhi in 0.0..500.0f64, dni in 0.0..1000.0f64, z in 0.0..89.9f64, az in 0.0..360.0f64, tilt in 0.0..90.0f64) {
        let flat = ArrayGeometry { tilt: 0.0, azimuth: 180.0, albedo: None };
        prop_assert_eq!(hay_davies_sky_diffuse(dhi, dni, &geometry(z, az, &flat), 0.0), dhi);
        let tilted = ArrayGeometry { tilt, azimuth: 180.0, albedo: None };
        let iso = dhi * (1.0 + tilt.to_radians().cos()) / 2.0;
        prop_assert_eq!(hay_davies_sky_diffuse(dhi, 0.0, &geometry(z, az, &tilted), tilt), iso);
    }

    #[test]
    fn horizontal_transposition_closes(ghi in 0.0..1200.0f64, dhi in 0.0..500.0f64, dni in 0.0..1000.0f64, z in 0.0..89.9f64, az in 0.0..360.0f64) {
        let flat = ArrayGeometry { tilt: 0.0, azimuth: 180.0, albedo: None };
        let poa = poa_total(ghi, dhi, dni, &geometry(z, az, &flat), 0.0, 0.25);
        prop_assert!((poa.global - (dni * z.to_radians().cos() + dhi)).abs() < 1e-9);
    }

    #[test]
    fn inverter_matches_re_evaluation(p_dc in 0.0..5000.0f64, v_dc in 80.0..480.0f64) {
        let p = InverterParamsSnl::fronius_primo_gen24_3_8();
        let got = inverter_ac_power(p_dc, v_dc, &p).unwrap();
        let want = if p_dc <= p.pso {
            -p.pnt
        } else {
            let a = p.pdco * (1.0 + p.c1 * (v_dc - p.vdco));
            let b = p.pso * (1.0 + p.c2 * (v_dc - p.vdco));
            let c = p.c0 * (1.0 + p.c3 * (v_dc - p.vdco));
            ((p.paco / (a - b) - c * (a - b)) * (p_dc - b) + c * (p_dc - b).powi(2)).min(p.paco)
        };
        prop_assert!((got - want).abs() <= 1e-12 * want.abs().max(p.paco), "{} vs {}", got, want);
        prop_assert!(got <= p.paco);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn operating_points_solve_the_diode_equation(s in 1.0..1300.0f64, tc in -5.0..80.0f64) {
        for b in BundledSystem::ALL {
            let module = b.spec().unwrap().module;
            let mpp = single_diode_max_power(&module, s, tc).unwrap();
            let params = calc_params_cec(&module, s, tc);
            prop_assert!(params.residual(mpp.v_mp, mpp.i_mp).abs() < 1e-10);
            prop_assert!(mpp.p_mp <= mpp.v_oc * mpp.i_sc);
            // DC power stays below the STC rating scaled by irradiance plus the
            // cold-cell temperature gain
            let stc = single_diode_max_power(&module, 1000.0, 25.0).unwrap().p_mp;
            prop_assert!(mpp.p_mp <= stc * s / 1000.0 * 1.25 + 1e-9);
        }
    }
}

#[test]
fn faiman_dark_identity() {
    let p = CellTempParams::default();
    for (ta, ws) in [(-3.0, 0.0), (24.5, 1.2), (41.0, 9.0)] {
        assert_eq!(faiman_cell_temp(0.0, ta, ws, &p), ta);
    }
}
