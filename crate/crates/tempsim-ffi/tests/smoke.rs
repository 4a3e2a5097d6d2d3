//! Exercises the C ABI through the exported symbols.

use std::ffi::{CStr, CString};
use std::ptr;

use tempsim_ffi::*;

#[test]
fn canonical_handle_round_trip() {
    let cfg = tempsim_config_canonical();
    assert!(!cfg.is_null());

    let mut buf = [0 as std::ffi::c_char; 65];
    let st = unsafe { tempsim_config_hash(cfg, buf.as_mut_ptr(), buf.len()) };
    assert_eq!(st, TsStatus::Ok);
    let hash = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap();
    assert_eq!(hash.len(), 64);

    let mut clone: *mut TsConfig = ptr::null_mut();
    assert_eq!(unsafe { tempsim_config_clone(cfg, &mut clone) }, TsStatus::Ok);
    unsafe {
        tempsim_config_free(clone);
        tempsim_config_free(cfg);
        tempsim_config_free(ptr::null_mut());
    }
}

#[test]
fn frontend_and_conversion_values() {
    let cfg = tempsim_config_canonical();
    let mut fe = TsFrontEnd {
        v_vdd_v: 0.0,
        i_h_a: 0.0,
        i_l_a: 0.0,
        i_supply_a: 0.0,
    };
    assert_eq!(
        unsafe { tempsim_frontend_eval(cfg, 0.6, 25.0, &mut fe) },
        TsStatus::Ok
    );
    assert!((fe.v_vdd_v - 0.440).abs() < 0.010);
    assert!(fe.i_h_a > fe.i_l_a && fe.i_l_a > 0.0);

    let mut conv = TsConversion {
        code: 0,
        overflow: 0,
        window_s: 0.0,
        t_conv_s: 0.0,
        energy_j: 0.0,
        f_h_hz: 0.0,
        f_l_hz: 0.0,
    };
    assert_eq!(
        unsafe { tempsim_convert(cfg, 0.6, 0.0, &mut conv) },
        TsStatus::Ok
    );
    assert_eq!(conv.code, 4047);
    assert_eq!(conv.overflow, 0);
    assert!((conv.f_l_hz / 17e3 - 1.0).abs() < 1e-9);

    // out-of-domain temperature
    assert_eq!(
        unsafe { tempsim_convert(cfg, 0.6, 140.0, &mut conv) },
        TsStatus::DomainError
    );
    unsafe { tempsim_config_free(cfg) };
}

#[test]
fn noisy_conversion_is_seed_deterministic() {
    let cfg = tempsim_config_canonical();
    let mut a = TsConversion {
        code: 0,
        overflow: 0,
        window_s: 0.0,
        t_conv_s: 0.0,
        energy_j: 0.0,
        f_h_hz: 0.0,
        f_l_hz: 0.0,
    };
    let mut b = a;
    assert_eq!(
        unsafe { tempsim_convert_noisy(cfg, 0.6, 25.0, 7, &mut a) },
        TsStatus::Ok
    );
    assert_eq!(
        unsafe { tempsim_convert_noisy(cfg, 0.6, 25.0, 7, &mut b) },
        TsStatus::Ok
    );
    assert_eq!(a.code, b.code);
    assert_eq!(a.window_s, b.window_s);
    unsafe { tempsim_config_free(cfg) };
}

#[test]
fn noise_resolution_matches_calibration_target() {
    let cfg = tempsim_config_canonical();
    let mut noise = TsNoise {
        sigma_c: 0.0,
        sigma_lsb: 0.0,
        mean_code: 0.0,
    };
    assert_eq!(
        unsafe { tempsim_noise_resolution(cfg, 25.0, 0.6, 200, 1, &mut noise) },
        TsStatus::Ok
    );
    assert!((noise.sigma_lsb - 1.84).abs() < 0.3, "{}", noise.sigma_lsb);
    assert!((noise.sigma_c - 0.24).abs() < 0.05, "{}", noise.sigma_c);
    unsafe { tempsim_config_free(cfg) };
}

#[test]
fn corner_and_die_handles() {
    let cfg = tempsim_config_canonical();
    let name = CString::new("FS").unwrap();
    let mut shifted: *mut TsConfig = ptr::null_mut();
    assert_eq!(
        unsafe { tempsim_apply_corner(cfg, name.as_ptr(), &mut shifted) },
        TsStatus::Ok
    );
    let mut nom = TsConversion {
        code: 0,
        overflow: 0,
        window_s: 0.0,
        t_conv_s: 0.0,
        energy_j: 0.0,
        f_h_hz: 0.0,
        f_l_hz: 0.0,
    };
    let mut fs = nom;
    unsafe {
        assert_eq!(tempsim_convert(cfg, 0.6, 50.0, &mut nom), TsStatus::Ok);
        assert_eq!(tempsim_convert(shifted, 0.6, 50.0, &mut fs), TsStatus::Ok);
    }
    assert_ne!(nom.code, fs.code);

    let bogus = CString::new("XX").unwrap();
    assert_eq!(
        unsafe { tempsim_apply_corner(cfg, bogus.as_ptr(), &mut shifted) },
        TsStatus::InvalidArgument
    );

    let mut die: *mut TsConfig = ptr::null_mut();
    assert_eq!(
        unsafe { tempsim_apply_die(cfg, 0.0014, 0.06, 0.015, 3, &mut die) },
        TsStatus::Ok
    );
    unsafe {
        tempsim_config_free(die);
        tempsim_config_free(shifted);
        tempsim_config_free(cfg);
    }
}

#[test]
fn closed_form_and_null_arguments() {
    let mut code = 0u64;
    assert_eq!(
        unsafe { tempsim_code_closed_form(4.3e6, 17e3, 16, &mut code) },
        TsStatus::Ok
    );
    assert_eq!(code, 4047);
    assert_eq!(
        unsafe { tempsim_code_closed_form(1.0, 2.0, 16, &mut code) },
        TsStatus::DomainError
    );
    assert_eq!(
        unsafe { tempsim_code_closed_form(4.3e6, 17e3, 16, ptr::null_mut()) },
        TsStatus::NullPointer
    );
    let mut fe = TsFrontEnd {
        v_vdd_v: 0.0,
        i_h_a: 0.0,
        i_l_a: 0.0,
        i_supply_a: 0.0,
    };
    assert_eq!(
        unsafe { tempsim_frontend_eval(ptr::null(), 0.6, 25.0, &mut fe) },
        TsStatus::NullPointer
    );
    let msg = unsafe { CStr::from_ptr(tempsim_status_message(TsStatus::DomainError)) };
    assert_eq!(msg.to_str().unwrap(), "model domain error");
    let version = unsafe { CStr::from_ptr(tempsim_version()) };
    assert!(!version.to_str().unwrap().is_empty());
}
