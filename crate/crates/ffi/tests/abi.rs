use std::ffi::CStr;
use std::ptr;

use genus2_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as std::ffi::c_char; 256];
    let n = unsafe { genus2_last_error(buf.as_mut_ptr(), buf.len()) };
    assert!(n > 0);
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn integrals_at_bolza_angle() {
    let mut v = [0.0; 4];
    let mut e = [0.0; 4];
    let s = unsafe { genus2_integrals(std::f64::consts::FRAC_PI_4, 1e-12, v.as_mut_ptr(), e.as_mut_ptr()) };
    assert_eq!(s, Genus2Status::Ok);
    assert!((v[0] - v[1]).abs() < 1e-10);
    assert!(e.iter().all(|x| *x < 1e-12));
}

#[test]
fn errors_map_to_codes_with_messages() {
    let mut v = [0.0; 4];
    let s = unsafe { genus2_integrals(2.0, 1e-12, v.as_mut_ptr(), ptr::null_mut()) };
    assert_eq!(s, Genus2Status::ThetaDomain);
    assert!(last_error().contains("theta"));
    let s = unsafe { genus2_integrals(0.5, 1e-12, ptr::null_mut(), ptr::null_mut()) };
    assert_eq!(s, Genus2Status::NullPointer);
    assert!(last_error().contains("values"));
}

#[test]
fn critical_angles_and_nullity() {
    let (mut t1, mut t2) = (0.0, 0.0);
    assert_eq!(unsafe { genus2_critical_angles(1e-12, &mut t1, &mut t2) }, Genus2Status::Ok);
    assert!((0.64..0.66).contains(&t1));
    assert!((t1 + t2 - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    let mut n = 99;
    assert_eq!(unsafe { genus2_nullity(t1, 1e-8, &mut n) }, Genus2Status::Ok);
    assert_eq!(n, 1);
    assert_eq!(unsafe { genus2_nullity(0.5, 1e-8, &mut n) }, Genus2Status::Ok);
    assert_eq!(n, 0);
}

#[test]
fn spectrum_handle_lifecycle() {
    let mut h: *mut Genus2Spectrum = ptr::null_mut();
    assert_eq!(unsafe { genus2_spectrum_new(0.8, 0.08, 4, 0, &mut h) }, Genus2Status::Ok);
    assert!(!h.is_null());
    let (mut ind, mut nul) = (0, 0);
    assert_eq!(unsafe { genus2_spectrum_counts(h, &mut ind, &mut nul) }, Genus2Status::Ok);
    assert_eq!(ind, 1);
    assert!(nul >= 3);
    let mut count = 0;
    let s = unsafe { genus2_spectrum_eigenvalues(h, ptr::null_mut(), 0, &mut count) };
    assert_eq!(s, Genus2Status::BufferTooSmall);
    assert_eq!(count, 32);
    let mut buf = vec![0.0; count];
    assert_eq!(unsafe { genus2_spectrum_eigenvalues(h, buf.as_mut_ptr(), buf.len(), &mut count) }, Genus2Status::Ok);
    assert!(buf.windows(2).all(|w| w[0] <= w[1]));
    assert!(buf[0].abs() < 1e-8);
    let mut l1 = 0.0;
    assert_eq!(unsafe { genus2_spectrum_lambda1(h, &mut l1) }, Genus2Status::Ok);
    assert!((l1 - 2.0).abs() < 0.05);
    unsafe { genus2_spectrum_free(h) };
    unsafe { genus2_spectrum_free(ptr::null_mut()) };
}

#[test]
fn bad_spectrum_arguments() {
    let mut h: *mut Genus2Spectrum = ptr::null_mut();
    assert_eq!(unsafe { genus2_spectrum_new(0.8, 0.0, 4, 0, &mut h) }, Genus2Status::InvalidArgument);
    assert!(h.is_null());
    assert_eq!(unsafe { genus2_spectrum_new(0.8, 0.04, 4, 0, ptr::null_mut()) }, Genus2Status::NullPointer);
}
