//! Independent reference computations checked against the library.

use genus2_spectra::integrals::{integral_quartet, IntegralQuartet};
use genus2_spectra::periods::CycleSet;
use genus2_spectra::spectra::{richardson, solve_sector, SectorSpec};
use genus2_spectra::system::{
    assemble_system, nullspace, omega_pair_from_null, period_condition_residual, solve_critical_thetas,
};
use genus2_spectra::ThetaParam;
use proptest::prelude::*;

/// Adaptive Simpson on `[a, b]` with Richardson-corrected panels.
fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// The quartet from smooth integrands on `[0, 1]`: split at `t = 1`, map the
/// tail by `s = 1/t`, then put `t = u²` (resp. `s = u²`) on both halves.
fn oracle_quartet(theta: f64) -> [f64; 4] {
    let c = (2.0 * theta).cos();
    let first = |sign: f64| move |u: f64| {
        let u4 = u.powi(4);
        (2.0 + 2.0 * u * u) / (u4 * u4 + 2.0 * sign * c * u4 + 1.0).sqrt()
    };
    let third = |sign: f64| move |u: f64| {
        let u4 = u.powi(4);
        (2.0 * u4 + 2.0 * u4 * u * u) / (u4 * u4 + 2.0 * sign * c * u4 + 1.0).powf(1.5)
    };
    let tol = 1e-14;
    [
        simpson(&first(1.0), 0.0, 1.0, tol),
        simpson(&first(-1.0), 0.0, 1.0, tol),
        simpson(&third(1.0), 0.0, 1.0, tol),
        simpson(&third(-1.0), 0.0, 1.0, tol),
    ]
}

fn quartet(theta: f64) -> IntegralQuartet {
    integral_quartet(&ThetaParam::new(theta).unwrap(), 1e-12).unwrap()
}

#[test]
fn quartet_matches_simpson_oracle() {
    for theta in [0.2, 0.5, 0.658, std::f64::consts::FRAC_PI_4, 1.0, 1.3] {
        let q = quartet(theta);
        let o = oracle_quartet(theta);
        for (k, (v, r)) in q.values().iter().zip(&o).enumerate() {
            assert!((v - r).abs() < 1e-10, "theta {theta}, entry {k}: {v} vs {r}");
        }
    }
}

#[test]
fn bolza_quartet_is_symmetric() {
    let q = quartet(std::f64::consts::FRAC_PI_4);
    assert!((q.a - q.b).abs() < 1e-10);
    assert!((q.c - q.d).abs() < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn quartet_is_positive_and_swaps_under_complement(theta in 0.1f64..1.47) {
        let q = quartet(theta);
        let r = quartet(std::f64::consts::FRAC_PI_2 - theta);
        prop_assert!(q.values().iter().all(|v| *v > 0.0));
        prop_assert!((q.a - r.b).abs() <= 2e-12 + 1e-14 * q.a);
        prop_assert!((q.c - r.d).abs() <= 2e-12 + 1e-14 * q.c);
    }

    #[test]
    fn oracle_agreement_on_random_angles(theta in 0.15f64..1.42) {
        let q = quartet(theta);
        let o = oracle_quartet(theta);
        for (v, r) in q.values().iter().zip(&o) {
            prop_assert!((v - r).abs() < 1e-10);
        }
    }
}

/// Real periods of the form decoded from the least singular vector, computed
/// by cycle integration rather than from the assembled matrix.
fn decoded_period_residual(theta: f64) -> (f64, f64) {
    let tp = ThetaParam::new(theta).unwrap();
    let sys = assemble_system(&tp, 1e-12).unwrap();
    let ns = nullspace(&sys, 1e-8).unwrap();
    let svd = sys.m.svd(false, true);
    let vt = svd.v_t.unwrap();
    let (imin, _) = svd.singular_values.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    let y: [f64; 6] = std::array::from_fn(|j| vt[(imin, j)]);
    let (o1, o2) = omega_pair_from_null(tp, y);
    let cycles = CycleSet::new(&tp).unwrap();
    let r = period_condition_residual(&o1, &cycles)
        .unwrap()
        .max(period_condition_residual(&o2, &cycles).unwrap());
    (r, *ns.singular_values.last().unwrap())
}

#[test]
fn kernel_forms_have_vanishing_real_periods() {
    let ca = solve_critical_thetas(1e-12).unwrap();
    for theta in [ca.theta1, ca.theta2] {
        let (r, smin) = decoded_period_residual(theta);
        assert!(smin < 1e-8, "theta {theta}: smallest singular value {smin}");
        assert!(r < 1e-7, "theta {theta}: real period residual {r}");
    }
}

#[test]
fn off_critical_forms_keep_real_periods() {
    for theta in [0.4, 0.78, 1.2] {
        let (r, _) = decoded_period_residual(theta);
        assert!(r > 1e-4, "theta {theta}: residual {r}");
    }
}

/// Sectors whose boundary conditions are constant on the straight and on the
/// curved boundary see a quarter of the round sphere, whatever θ is. Their
/// eigenvalues are `l(l + 1)` over the spherical harmonics with the matching
/// parities under the equator and meridian reflections.
fn quarter_sphere_spectrum(straight_neumann: bool, arc_neumann: bool, count: usize) -> Vec<f64> {
    let mut out = Vec::new();
    for l in 0i64.. {
        for m in 0..=l {
            // Y_l^m ~ P_l^m(cos) trig(m phi): even across the equator iff l+m is even,
            // even across the meridian plane iff the factor is cos.
            let equator_even = (l + m) % 2 == 0;
            let cos_ok = straight_neumann;
            let sin_ok = !straight_neumann && m > 0;
            if equator_even == arc_neumann && (cos_ok || sin_ok) {
                out.push((l * (l + 1)) as f64);
            }
        }
        if out.len() >= count {
            out.truncate(count);
            return out;
        }
    }
    unreachable!()
}

#[test]
fn quarter_sphere_sectors_reproduce_spherical_harmonics() {
    let cases = [
        (SectorSpec::ALL_NEUMANN, true, true),
        (SectorSpec { s1: -1, j: 1, s3: -1 }, false, false),
        (SectorSpec { s1: 1, j: 1, s3: -1 }, true, false),
        (SectorSpec { s1: -1, j: 1, s3: 1 }, false, true),
    ];
    for theta in [0.35, 0.9] {
        let tp = ThetaParam::new(theta).unwrap();
        for (spec, straight, arc) in cases {
            assert_eq!(spec.bc_string(), format!("{0}{0}{1}{1}", if straight { 'N' } else { 'D' }, if arc { 'N' } else { 'D' }));
            let exact = quarter_sphere_spectrum(straight, arc, 5);
            let coarse = solve_sector(&tp, &spec, 5, 0.04).unwrap().values;
            let fine = solve_sector(&tp, &spec, 5, 0.02).unwrap().values;
            for i in 0..5 {
                let (ext, _) = richardson(coarse[i], fine[i]);
                let scale = exact[i].max(1.0);
                assert!((ext - exact[i]).abs() < 1e-3 * scale, "{spec} #{i}: {ext} vs {}", exact[i]);
                // conforming elements approach from above
                assert!(fine[i] > exact[i] - 1e-9 && coarse[i] > fine[i] - 1e-9, "{spec} #{i}");
            }
        }
    }
}

#[test]
fn eigenvalue_error_is_second_order() {
    let tp = ThetaParam::new(0.5).unwrap();
    let spec = SectorSpec { s1: 1, j: 1, s3: -1 };
    let exact = quarter_sphere_spectrum(true, false, 4);
    let errs: Vec<Vec<f64>> = [0.08, 0.04, 0.02]
        .iter()
        .map(|&h| {
            let v = solve_sector(&tp, &spec, 4, h).unwrap().values;
            v.iter().zip(&exact).map(|(a, b)| a - b).collect()
        })
        .collect();
    for (i, ((e0, e1), e2)) in errs[0].iter().zip(&errs[1]).zip(&errs[2]).enumerate() {
        let (r1, r2) = (e0 / e1, e1 / e2);
        assert!(r1 > 2.5 && r2 > 2.5, "mode {i}: ratios {r1}, {r2}");
    }
}
