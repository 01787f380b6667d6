//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion with
//! the measured quantities, then exits nonzero if any criterion outside
//! `KNOWN_FAILURES` failed.
//!
//! `GENUS2_ACCEPTANCE_SWEEP_H` overrides the mesh size used for the sweep
//! and the index table (default 0.04; the library default is 0.02).

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::time::Instant;

use genus2_spectra::forms::{hat_residue_table, RESIDUE_EPS};
use genus2_spectra::immersion::{symmetry_report, verify_omega};
use genus2_spectra::integrals::integral_quartet;
use genus2_spectra::periods::{period_table, relation_periods, CycleSet};
use genus2_spectra::spectra::{
    index_table, spectrum, sector_table, sweep, SectorSpec, SpectrumOptions, DEFAULT_H, MONOTONE_SLACK,
};
use genus2_spectra::system::{
    appendix_reduce, assemble_system, expected_reduced, kernel_equivalence, max_rel_deviation, nullspace,
    omega_pair_at, period_condition_residual, solve_critical_thetas, CriticalAngles, SCAN_SAMPLES,
};
use genus2_spectra::{Result, ThetaParam};
use rand::{RngExt, SeedableRng};

/// Criteria that fail for documented reasons; they still run and print.
const KNOWN_FAILURES: &[usize] = &[8, 12];

const SWEEP_H: f64 = 0.04;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Result<Verdict> {
    Ok(Verdict { passed, detail })
}

fn c1(ca: &CriticalAngles) -> Result<Verdict> {
    let ok = (0.64..=0.66).contains(&ca.theta1)
        && (0.90..=0.92).contains(&ca.theta2)
        && ca.f1_residual.abs() < 1e-10
        && ca.scan_sign_changes_f1 == 1;
    verdict(
        ok,
        format!(
            "theta1 = {:.12}, theta2 = {:.12}, |F1(theta1)| = {:.2e}, sign changes in {SCAN_SAMPLES} samples = {}",
            ca.theta1,
            ca.theta2,
            ca.f1_residual.abs(),
            ca.scan_sign_changes_f1
        ),
    )
}

fn c2() -> Result<Verdict> {
    let mut worst: f64 = 0.0;
    let mut entries = 0;
    for theta in [0.3, FRAC_PI_4, 1.1] {
        let t = period_table(&integral_quartet(&ThetaParam::new(theta)?, 1e-12)?)?;
        worst = worst.max(t.max_abs_err());
        entries += t.entries.len();
    }
    verdict(entries == 48 && worst < 1e-8, format!("{entries} periods, max abs error {worst:.2e} (tol 1e-8)"))
}

fn c3() -> Result<Verdict> {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for theta in [0.3, 0.7, 1.2] {
        for r in relation_periods(&ThetaParam::new(theta)?)? {
            worst = worst.max(r.max_abs);
            count += 1;
        }
    }
    verdict(worst < 1e-8, format!("{count} relation/cycle sets, max |period| {worst:.2e} (tol 1e-8)"))
}

fn c4(ca: &CriticalAngles) -> Result<Verdict> {
    let (mut res, mut halving): (f64, f64) = (0.0, 0.0);
    let mut count = 0;
    for theta in [0.4, ca.theta1, 1.1] {
        for r in hat_residue_table(ThetaParam::new(theta)?, RESIDUE_EPS)? {
            res = res.max(r.residue.value.norm());
            halving = halving.max(r.residue.halving_change);
            count += 1;
        }
    }
    verdict(
        count == 108 && res < 1e-8 && halving < 1e-8,
        format!("{count} residues, max |res| {res:.2e}, max eps/2 change {halving:.2e} (tol 1e-8)"),
    )
}

fn c5() -> Result<Verdict> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let (mut dev, mut defect): (f64, f64) = (0.0, 0.0);
    let mut min_scale = f64::INFINITY;
    let mut equivalent = true;
    let mut thetas = Vec::new();
    for _ in 0..5 {
        let theta = rng.random_range(0.05..1.52);
        thetas.push(format!("{theta:.3}"));
        let sys = assemble_system(&ThetaParam::new(theta)?, 1e-12)?;
        let red = appendix_reduce(&sys)?;
        dev = dev.max(max_rel_deviation(&red.matrix, &expected_reduced(&sys.quartet)));
        min_scale = red.scalings.iter().cloned().fold(min_scale, f64::min);
        let k = kernel_equivalence(&sys, &red)?;
        defect = defect.max(k.relative_defect);
        equivalent &= k.holds(1e-9);
    }
    verdict(
        dev < 1e-9 && min_scale > 0.0 && equivalent,
        format!(
            "theta = [{}], max rel deviation {dev:.2e}, min scaling {min_scale:.3e}, kernel defect {defect:.2e}",
            thetas.join(", ")
        ),
    )
}

fn c6(ca: &CriticalAngles) -> Result<Verdict> {
    let mut nullities = Vec::new();
    for theta in [ca.theta1, ca.theta2] {
        nullities.push(nullspace(&assemble_system(&ThetaParam::new(theta)?, 1e-12)?, 1e-8)?.nullity);
    }
    let mut others = 0;
    let mut nonzero = 0;
    let mut k = 0;
    while others < 16 {
        let theta = 0.08 + k as f64 * 0.09;
        k += 1;
        if (theta - ca.theta1).abs() < 0.02 || (theta - ca.theta2).abs() < 0.02 {
            continue;
        }
        others += 1;
        if nullspace(&assemble_system(&ThetaParam::new(theta)?, 1e-12)?, 1e-8)?.nullity != 0 {
            nonzero += 1;
        }
    }
    let pair = omega_pair_at(&ThetaParam::new(ca.theta1)?, 1e-8)?;
    let sin = pair.closed_form_sin_angle.unwrap_or(f64::INFINITY);
    let mut period: f64 = 0.0;
    for theta in [ca.theta1, ca.theta2] {
        let tp = ThetaParam::new(theta)?;
        let p = omega_pair_at(&tp, 1e-8)?;
        let cycles = CycleSet::new(&tp)?;
        period = period
            .max(period_condition_residual(&p.omega1, &cycles)?)
            .max(period_condition_residual(&p.omega2, &cycles)?);
    }
    verdict(
        nullities == [1, 1] && nonzero == 0 && sin < 1e-7 && period < 1e-7,
        format!(
            "nullity at theta1, theta2 = {nullities:?}, nonzero nullity at {nonzero}/16 others, sin angle {sin:.2e}, real periods {period:.2e}"
        ),
    )
}

fn c7(ca: &CriticalAngles) -> Result<Verdict> {
    let pair = omega_pair_at(&ThetaParam::new(ca.theta1)?, 1e-8)?;
    let s = symmetry_report(&[pair.omega1, pair.omega2], 20, 1)?;
    let psi = s.psi_omega1.max(s.psi_omega2);
    verdict(
        s.max_residual() < 1e-6 && psi < 1e-10,
        format!("max symmetry residual {:.2e} (tol 1e-6), psi densities {psi:.2e} (tol 1e-10)", s.max_residual()),
    )
}

fn c8(ca: &CriticalAngles) -> Result<Verdict> {
    let pair = omega_pair_at(&ThetaParam::new(ca.theta1)?, 1e-8)?;
    let v = verify_omega(&[pair.omega1, pair.omega2], 10, 10, 1, 1e-3)?;
    let (eig, harm) = (v.max_eigen_residual(), v.max_harmonic_residual());
    verdict(
        eig < 1e-3 && v.second_order_trend() && harm < 1e-10,
        format!(
            "u1 residual {eig:.2e} (tol 1e-3), min halving ratio {:.2}, trend {}, pullback harmonic residual {harm:.2e} (tol 1e-10)",
            v.min_ratio(),
            v.second_order_trend()
        ),
    )
}

fn c9() -> Result<Verdict> {
    let opts = SpectrumOptions::new(8, DEFAULT_H, true);
    let r = spectrum(&ThetaParam::new(FRAC_PI_4)?, &opts)?;
    let l1 = r.lambda1().unwrap_or(f64::NAN);
    let fine_h = 0.5 * opts.h;
    let area_err = (8.0 * r.weighted_area - 8.0 * PI).abs();
    verdict(
        (l1 - 2.0).abs() < 0.02 && area_err < 8.0 * fine_h * fine_h,
        format!(
            "lambda1 = {l1:.8} (|rel| {:.2e}, tol 1e-2), total area {:.8} vs 8 pi (err {area_err:.2e} < {:.1e})",
            (l1 - 2.0).abs() / 2.0,
            8.0 * r.weighted_area,
            8.0 * fine_h * fine_h
        ),
    )
}

fn c10(h: f64) -> Result<Verdict> {
    let thetas = [0.2, 0.4, 0.6, 0.7, FRAC_PI_4, 0.88, 0.95, 1.2];
    let expect = [3, 3, 3, 1, 1, 1, 3, 3];
    let rows = index_table(&thetas, &SpectrumOptions::new(8, h, true))?;
    let got: Vec<usize> = rows.iter().map(|r| r.ind).collect();
    verdict(got == expect, format!("h = {h}, Ind = {got:?}, expected {expect:?}"))
}

fn c11_c12(ca: &CriticalAngles, h: f64) -> Result<(Verdict, Verdict)> {
    let opts = SpectrumOptions::new(8, h, true);
    let res = sweep(0.3, 0.9, 40, &sector_table(), &opts)?;
    let drops: Vec<f64> = res.monotonicity.iter().map(|m| m.max_drop).collect();
    let mono = res.monotonicity.len() == 2 && drops.iter().all(|d| *d <= MONOTONE_SLACK);
    let mut offsets = Vec::new();
    for tracked in [SectorSpec::V1, SectorSpec::V2] {
        let off = res
            .crossings
            .iter()
            .filter(|c| c.sector == tracked.label() && c.branch_index == 0 && c.upward)
            .map(|c| (c.theta - ca.theta1).abs())
            .fold(f64::INFINITY, f64::min);
        offsets.push(off);
    }
    let crossing = offsets.iter().all(|o| *o < 0.02);
    let list = |xs: &[f64]| xs.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>().join(", ");
    let v11 = Verdict {
        passed: mono && crossing,
        detail: format!(
            "h = {h}, max drop (v1, v2) = [{}] (slack {MONOTONE_SLACK:.0e}), |crossing - theta1| = [{}] (tol 0.02)",
            list(&drops),
            list(&offsets)
        ),
    };

    let min_nul = res.counts.iter().map(|c| c.1).min().unwrap_or(0);
    let nearest = (0..res.thetas.len())
        .min_by(|&a, &b| (res.thetas[a] - ca.theta1).abs().total_cmp(&(res.thetas[b] - ca.theta1).abs()))
        .expect("non-empty grid");
    let (t_near, (_, nul_near, tol_near)) = (res.thetas[nearest], res.counts[nearest]);
    let v1_near = res
        .branch(&SectorSpec::V1, 0)
        .into_iter()
        .find(|(t, _)| *t == t_near)
        .map(|(_, v)| v)
        .unwrap_or(f64::NAN);
    let v12 = Verdict {
        passed: min_nul >= 3 && nul_near == 5,
        detail: format!(
            "min Nul over grid = {min_nul}, nearest sample {t_near:.6} (|d| = {:.2e}) has Nul = {nul_near}; v1 branch there {v1_near:.6}, |v1 - 2| = {:.2e} vs tol_cluster {tol_near:.1e}",
            (t_near - ca.theta1).abs(),
            (v1_near - 2.0).abs()
        ),
    };
    Ok((v11, v12))
}

fn report(n: usize, name: &str, started: Instant, v: Result<Verdict>) -> bool {
    let secs = started.elapsed().as_secs_f64();
    let (passed, detail) = match v {
        Ok(v) => (v.passed, v.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    let tag = if passed { "PASS" } else { "FAIL" };
    let note = if !passed && KNOWN_FAILURES.contains(&n) { " [known]" } else { "" };
    println!("{tag} criterion {n:>2} ({name}){note}: {detail} [{secs:.1}s]");
    passed
}

fn main() {
    let sweep_h = std::env::var("GENUS2_ACCEPTANCE_SWEEP_H")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(SWEEP_H);
    let mut results = Vec::new();
    let t = Instant::now();
    let ca = solve_critical_thetas(1e-12);
    let ca = match ca {
        Ok(ca) => ca,
        Err(e) => {
            println!("FAIL criterion  1 (critical angles): error: {e}");
            std::process::exit(1);
        }
    };
    assert!((ca.theta1 + ca.theta2 - FRAC_PI_2).abs() < 1e-12);
    results.push((1, report(1, "critical angles", t, c1(&ca))));
    let t = Instant::now();
    results.push((2, report(2, "period table", t, c2())));
    let t = Instant::now();
    results.push((3, report(3, "exact-form relations", t, c3())));
    let t = Instant::now();
    results.push((4, report(4, "residues", t, c4(&ca))));
    let t = Instant::now();
    results.push((5, report(5, "scripted reduction", t, c5())));
    let t = Instant::now();
    results.push((6, report(6, "null space and forms", t, c6(&ca))));
    let t = Instant::now();
    results.push((7, report(7, "symmetry identities", t, c7(&ca))));
    let t = Instant::now();
    results.push((8, report(8, "support-function eigen equation", t, c8(&ca))));
    let t = Instant::now();
    results.push((9, report(9, "first eigenvalue at the Bolza angle", t, c9())));
    let t = Instant::now();
    results.push((10, report(10, "index profile", t, c10(sweep_h))));
    let t = Instant::now();
    match c11_c12(&ca, sweep_h) {
        Ok((a, b)) => {
            results.push((11, report(11, "crossing and monotonicity", t, Ok(a))));
            results.push((12, report(12, "nullity bump", t, Ok(b))));
        }
        Err(e) => {
            results.push((11, report(11, "crossing and monotonicity", t, Err(e.clone()))));
            results.push((12, report(12, "nullity bump", t, Err(e))));
        }
    }
    let passed = results.iter().filter(|r| r.1).count();
    let unexpected: Vec<usize> = results.iter().filter(|r| !r.1 && !KNOWN_FAILURES.contains(&r.0)).map(|r| r.0).collect();
    let fixed: Vec<usize> = results.iter().filter(|r| r.1 && KNOWN_FAILURES.contains(&r.0)).map(|r| r.0).collect();
    println!("{passed}/{} criteria passed; known failures {KNOWN_FAILURES:?}", results.len());
    if !fixed.is_empty() {
        println!("note: criteria {fixed:?} are listed as known failures but passed");
    }
    if !unexpected.is_empty() {
        println!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
