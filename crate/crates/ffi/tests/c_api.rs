use sgqei_ffi::*;
use std::f64::consts::PI;
use std::ptr;

#[test]
fn k0_through_handles() {
    unsafe {
        let mut wl = ptr::null_mut();
        let mut f = ptr::null_mut();
        assert_eq!(sgqei_worldline_new_static(&mut wl), SGQEI_OK);
        assert_eq!(sgqei_smearing_new_gaussian(1.0, 0.0, 1.0, &mut f), SGQEI_OK);
        let (mut s, mut a) = (0.0, 0.0);
        assert_eq!(sgqei_k0(wl, f, &mut s, &mut a), SGQEI_OK);
        assert!((s + a - 1.0 / (8.0 * PI.sqrt())).abs() < 1e-10);
        sgqei_worldline_free(wl);
        sgqei_smearing_free(f);
    }
}

#[test]
fn errors_map_to_codes() {
    unsafe {
        let mut f = ptr::null_mut();
        assert_eq!(sgqei_smearing_new_gaussian(-1.0, 0.0, 1.0, &mut f), SGQEI_ERR_INPUT);
        assert!(f.is_null());
        let mut buf = [0 as std::ffi::c_char; 128];
        assert!(sgqei_last_error(buf.as_mut_ptr(), buf.len()) > 0);

        let mut st = ptr::null_mut();
        assert_eq!(sgqei_state_new_thermal_window(2.0, 1.0, 1.0, &mut st), SGQEI_ERR_INPUT);

        let (mut s, mut a) = (0.0, 0.0);
        assert_eq!(sgqei_k0(ptr::null(), ptr::null(), &mut s, &mut a), SGQEI_ERR_NULL);
        assert_eq!(sgqei_worldline_new_static(ptr::null_mut()), SGQEI_ERR_NULL);

        let mut holds = -1;
        assert_eq!(sgqei_identity_sums_hold(12, &mut holds), SGQEI_OK);
        assert_eq!(holds, 1);
        assert_eq!(sgqei_identity_sums_hold(1000, &mut holds), SGQEI_ERR_INPUT);
    }
}

#[test]
fn qei_summary() {
    unsafe {
        let (mut wl, mut f, mut st) = (ptr::null_mut(), ptr::null_mut(), ptr::null_mut());
        assert_eq!(sgqei_worldline_new_boosted(0.5, &mut wl), SGQEI_OK);
        assert_eq!(sgqei_smearing_new_gaussian(1.0, 0.0, 1.0, &mut f), SGQEI_OK);
        assert_eq!(sgqei_state_new_vacuum(&mut st), SGQEI_OK);
        let mut out = SgqeiQeiSummary::default();
        assert_eq!(sgqei_qei_verify(st, wl, f, PI, 0.01, 2.0, 2.0, 1, 500, 3, &mut out), SGQEI_OK);
        assert_eq!(out.verdict, SGQEI_VERDICT_SATISFIED);
        assert!(out.k0 > 0.0 && out.kv > 0.0 && out.kh > 0.0);
        // β² above the sampling cap is a domain error
        assert_eq!(sgqei_qei_verify(st, wl, f, 5.0, 0.01, 2.0, 2.0, 1, 500, 3, &mut out), SGQEI_ERR_DOMAIN);
        sgqei_worldline_free(wl);
        sgqei_smearing_free(f);
        sgqei_state_free(st);
    }
}
