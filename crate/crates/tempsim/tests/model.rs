//! Cross-module behavior of the assembled model: multiplexing over die
//! populations, supply-current anchors, line regulation, and the reported
//! ratio-fit coefficients.

use tempsim::cfc::jittered_period_stream;
use tempsim::config::SensorConfig;
use tempsim::fdc::{conversion_energy, mux_conversion, run_conversion, FdcConfig};
use tempsim::frontend::{current_ratio_model, fit_linear_ratio, frontend_state, solve_vvdd};
use tempsim::metrology::{noise_resolution, two_point_calibrate};
use tempsim::pipeline::{calibration_codes, evaluate_point};
use tempsim::variation::{apply_die, derive_seed, sample_die, VariationSpec};

#[test]
fn mux_codes_match_standalone_per_die() {
    let base = SensorConfig::canonical();
    let spec = VariationSpec::default();
    let dies: Vec<SensorConfig> = (0..4)
        .map(|i| apply_die(base, &sample_die(&spec, 1e-3, derive_seed(11, &[i]))))
        .collect();
    let fdc = FdcConfig::default();

    // Stream factory per front end; the multiplexer must consume only the
    // selected pair.
    let make_streams = |cfg: &SensorConfig, seed: u64| {
        let s = frontend_state(cfg, 0.6, 25.0).unwrap();
        let hi =
            jittered_period_stream(&cfg.osc.fast, s.i_h, cfg.osc.jitter_rel_sigma, seed).unwrap();
        let lo = jittered_period_stream(&cfg.osc.slow, s.i_l, cfg.osc.jitter_rel_sigma, seed + 1)
            .unwrap();
        (hi, lo)
    };

    for select in 0..4 {
        let mut factories: Vec<_> = dies
            .iter()
            .enumerate()
            .map(|(i, cfg)| {
                let cfg = cfg.clone();
                move || make_streams(&cfg, 1000 + i as u64)
            })
            .collect();
        let muxed = mux_conversion(&mut factories, select, 0.0, &fdc).unwrap();
        let (hi, lo) = make_streams(&dies[select], 1000 + select as u64);
        let standalone = run_conversion(hi, lo, 0.0, &fdc).unwrap();
        assert_eq!(muxed.code, standalone.code, "die {select}");
        assert_eq!(muxed.window, standalone.window);
    }
}

#[test]
fn mux_over_identical_noiseless_frontends_is_symmetric() {
    let mut cfg = SensorConfig::canonical().clone();
    cfg.osc.jitter_rel_sigma = 0.0;
    let fdc = FdcConfig::default();
    let make = |cfg: &SensorConfig| {
        let s = frontend_state(cfg, 0.6, 40.0).unwrap();
        let hi = jittered_period_stream(&cfg.osc.fast, s.i_h, 0.0, 0).unwrap();
        let lo = jittered_period_stream(&cfg.osc.slow, s.i_l, 0.0, 0).unwrap();
        (hi, lo)
    };
    let codes: Vec<u32> = (0..4)
        .map(|select| {
            let mut factories: Vec<_> = (0..4)
                .map(|_| {
                    let cfg = cfg.clone();
                    move || make(&cfg)
                })
                .collect();
            mux_conversion(&mut factories, select, 0.0, &fdc).unwrap().code
        })
        .collect();
    assert!(codes.windows(2).all(|w| w[0] == w[1]), "{codes:?}");
}

#[test]
fn line_sensitivity_is_exactly_zero_without_headroom() {
    let cfg = SensorConfig::canonical();
    let sweep: Vec<f64> = (0..=8).map(|i| 0.7 + 0.05 * i as f64).collect();
    let s = tempsim::metrology::line_sensitivity(cfg, 30.0, 0.9, &sweep, false).unwrap();
    assert_eq!(s, 0.0);
}

#[test]
fn supply_current_anchor_values() {
    let cfg = SensorConfig::canonical();
    let i0 = frontend_state(cfg, 0.6, 0.0).unwrap().i_supply;
    let i100 = frontend_state(cfg, 0.6, 100.0).unwrap().i_supply;
    assert!((i0 / 0.6e-6 - 1.0).abs() < 0.15, "i_supply(0C) = {i0}");
    assert!((i100 / 4.1e-6 - 1.0).abs() < 0.15, "i_supply(100C) = {i100}");
    let ratio = i100 / i0;
    assert!((6.0..=8.0).contains(&ratio));
}

#[test]
fn rail_is_supply_independent_without_headroom() {
    let cfg = SensorConfig::canonical();
    let reference = frontend_state(cfg, 0.6, 25.0).unwrap().v_vdd;
    for i in 0..13 {
        let vdd = 0.6 + 0.1 * i as f64;
        let v = frontend_state(cfg, vdd, 25.0).unwrap().v_vdd;
        // ideal screening: the same crossing at every supply up to the
        // bisection width (far below the 2% spread budget)
        assert!((v - reference).abs() < 1e-11, "vdd = {vdd}: {v} vs {reference}");
    }
}

#[test]
fn ratio_line_coefficients_are_reported_not_enforced() {
    // The current-ratio line over temperature has its own fitted (m, p);
    // the characteristic is PTAT with slope well below the sizing ratio.
    let cfg = SensorConfig::canonical();
    let pts: Vec<(f64, f64)> = (0..=100)
        .map(|i| {
            let t = i as f64;
            let v = solve_vvdd(&cfg.regulator, 0.6, t).unwrap().v_vdd;
            (t, current_ratio_model(&cfg.tcc, v, t))
        })
        .collect();
    let fit = fit_linear_ratio(&pts).unwrap();
    assert!(fit.slope > 0.0, "ratio must be PTAT");
    assert!((fit.slope - 0.26).abs() < 0.05, "m = {}", fit.slope);
    assert!((fit.intercept - 136.0).abs() < 5.0, "p = {}", fit.intercept);
    assert!(fit.adj_r_squared > 0.999);
}

#[test]
fn frequency_ratio_endpoints() {
    let cfg = SensorConfig::canonical();
    let p0 = evaluate_point(cfg, 0.6, 0.0).unwrap();
    let p100 = evaluate_point(cfg, 0.6, 100.0).unwrap();
    assert!((p0.f_h / p0.f_l - 252.9).abs() < 1.0);
    assert!((p100.f_h / p100.f_l - 301.9).abs() < 1.0);
}

#[test]
fn conversion_energy_arithmetic() {
    // 1 uA supply at 1 V for 1 ms with no back-end power is 1 nJ.
    let mut cfg = SensorConfig::canonical().clone();
    cfg.backend.intercept_w = 0.0;
    cfg.backend.slope_w_per_v = 0.0;
    let state = tempsim::frontend::FrontEndState {
        v_vdd: 0.44,
        i_h: 1e-7,
        i_l: 1e-9,
        i_supply: 1e-6,
        temp_c: 25.0,
        v_dd: 1.0,
    };
    let e = conversion_energy(&cfg, &state, 1e-3).unwrap();
    assert!((e - 1e-9).abs() < 1e-21);
}

#[test]
fn resolution_identities() {
    let cfg = SensorConfig::canonical();
    let (c10, c90) = calibration_codes(cfg, 0.6, 10.0, 90.0).unwrap();
    let cal = two_point_calibrate(c10, c90).unwrap();
    // counter resolution is the reciprocal of the code-per-degC slope
    let slope_lsb_per_c = (c90 - c10) as f64 / 80.0;
    assert!((cal.slope_c_per_lsb() - 1.0 / slope_lsb_per_c).abs() / cal.slope_c_per_lsb() < 0.02);
    // sigma_lsb · slope = sigma_c to rounding
    let r = noise_resolution(cfg, 25.0, 0.6, 100, 5).unwrap();
    assert!((r.sigma_lsb * cal.slope_c_per_lsb() - r.sigma_c).abs() < 1e-12);
}
