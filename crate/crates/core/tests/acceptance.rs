//! End-to-end acceptance checks. Runs as a plain binary so that every
//! criterion prints its own PASS/FAIL line; exits non-zero if any fails.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use noisy_teleport::channels::{
    adc, alice_mixture, apply, apply_local, damp_pair, damped_bell, dilation_adc, dilation_pdc, pa_from_theta,
    pb_from_alpha, pdc, AliceSource, DampingFamily,
};
use noisy_teleport::entanglement::{
    classical_threshold, f_adc_both, f_adc_pdc, f_adc_single, f_pdc_both, fef, fef_bruteforce, teleport_fidelity,
    DampingPair, BRUTEFORCE_STARTS, BRUTEFORCE_TOL,
};
use noisy_teleport::harness::{
    enhancement_search, run_calibration, run_fidelity_pdc, AliceMethod, GridAxis, ResourceSpec, Series, SweepConfig,
    SweepKind,
};
use noisy_teleport::sampling::{random_density_matrix, random_density_matrix_rank};
use noisy_teleport::state::{phi_plus, state_fidelity, werner_state, DensityMatrix};
use noisy_teleport::teleport::average_fidelity_direct;
use noisy_teleport::tomography::{
    composite_teleport_fidelity, full_settings, monte_carlo_fidelity_error, simulate_counts, state_tomo_mle,
    ProcessMode, MLE_TOL,
};

type ClosedForm = fn(DampingPair) -> noisy_teleport::Result<f64>;
type Criterion = fn() -> Outcome;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn p_star() -> f64 {
    2.0 * 2f64.sqrt() - 2.0
}

fn pair(a: f64, b: f64) -> DampingPair {
    DampingPair::new(a, b).unwrap()
}

fn grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

fn closed_forms() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let g = grid(101);
    let phi = phi_plus();
    for &p in &g {
        let rho = apply_local(&adc(p).unwrap(), &phi, 0).unwrap();
        worst = worst.max((fef(&rho).unwrap().f - f_adc_single(p).unwrap()).abs());
    }
    use DampingFamily::{Adc, Pdc};
    let cases: [(DampingFamily, DampingFamily, ClosedForm); 3] =
        [(Adc, Adc, f_adc_both), (Adc, Pdc, f_adc_pdc), (Pdc, Pdc, f_pdc_both)];
    for (fa, fb, closed) in cases {
        for &a in &g {
            for &b in &g {
                let rho = damped_bell((fa, a), (fb, b)).unwrap();
                worst = worst.max((fef(&rho).unwrap().f - closed(pair(a, b)).unwrap()).abs());
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(worst <= 1e-9 && secs < 5.0, format!("max |fef - closed form| = {worst:.2e} over 101-point grids, {secs:.2} s"))
}

fn threshold() -> Outcome {
    let t = classical_threshold(|p| f_adc_single(p).unwrap()).map_err(|e| e.to_string())?;
    check(
        (t - 0.828427).abs() <= 1e-6 && (t - p_star()).abs() <= 1e-6,
        format!("threshold = {t:.9} (2 sqrt 2 - 2 = {:.9})", p_star()),
    )
}

fn enhancement_ideal() -> Outcome {
    let ps = p_star();
    let f_both = f_adc_both(pair(ps, ps)).unwrap();
    let big_f = teleport_fidelity(f_both, 2).unwrap();
    let direct = average_fidelity_direct(&damped_bell((DampingFamily::Adc, ps), (DampingFamily::Adc, ps)).unwrap()).unwrap();
    let single = average_fidelity_direct(&damped_bell((DampingFamily::Adc, 0.0), (DampingFamily::Adc, ps)).unwrap()).unwrap();
    check(
        (big_f - 0.676550).abs() <= 1e-4 && (direct - big_f).abs() < 1e-9 && direct > single && (single - 2.0 / 3.0).abs() < 1e-9,
        format!("F(p*, p*) = {big_f:.7} (circuit {direct:.7}), target 0.676550; single-sided F = {single:.7}"),
    )
}

fn caption_point() -> Outcome {
    let closed = f_adc_both(pair(p_star(), 0.602)).unwrap();
    let from_state = fef(&damped_bell((DampingFamily::Adc, p_star()), (DampingFamily::Adc, 0.602)).unwrap()).unwrap().f;
    check(
        (closed - 0.522).abs() <= 5e-3 && (from_state - closed).abs() < 1e-9,
        format!("f(2 sqrt 2 - 2, 0.602) = {closed:.6} (state fef {from_state:.6}), target 0.522"),
    )
}

fn horodecki() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst_direct, mut worst_composite): (f64, f64) = (0.0, 0.0);
    for _ in 0..50 {
        let fam = |r: &mut ChaCha8Rng| if r.random_bool(0.5) { DampingFamily::Adc } else { DampingFamily::Pdc };
        let (fa, fb) = (fam(&mut rng), fam(&mut rng));
        let rho = damped_bell((fa, rng.random()), (fb, rng.random())).unwrap();
        let expected = teleport_fidelity(fef(&rho).unwrap().f, 2).unwrap();
        let direct = average_fidelity_direct(&rho).unwrap();
        let composite = composite_teleport_fidelity(&rho, ProcessMode::Exact).unwrap();
        worst_direct = worst_direct.max((direct - expected).abs());
        worst_composite = worst_composite.max((composite - expected).abs()).max((composite - direct).abs());
    }
    check(
        worst_direct <= 1e-9 && worst_composite <= 1e-9,
        format!("50 damped Bell resources: direct vs (2f+1)/3 {worst_direct:.2e}, composite {worst_composite:.2e}"),
    )
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let rho = match i % 4 {
            0 => random_density_matrix_rank(2, 1, &mut rng),
            1 => random_density_matrix_rank(2, 2, &mut rng),
            _ => random_density_matrix(2, &mut rng),
        };
        let a = fef(&rho).unwrap().f;
        let b = fef_bruteforce(&rho, BRUTEFORCE_STARTS, BRUTEFORCE_TOL).unwrap().f;
        worst = worst.max((a - b).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    check(worst <= 1e-6 && secs < 60.0, format!("200 random states: max |eig - search| = {worst:.2e}, {secs:.2} s"))
}

fn dilation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let p: f64 = rng.random();
        let rho = random_density_matrix(1, &mut rng);
        let da = dilation_adc(p, &rho).unwrap();
        let dp = dilation_pdc(p, &rho).unwrap();
        worst = worst
            .max(da.matrix().max_abs_diff(apply(&adc(p).unwrap(), &rho).unwrap().matrix()))
            .max(dp.matrix().max_abs_diff(apply(&pdc(p).unwrap(), &rho).unwrap().matrix()));
    }
    check(worst <= 1e-12, format!("100 random (p, state) pairs: max entry deviation {worst:.2e}"))
}

fn mixture_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    for p in grid(21) {
        let mix = alice_mixture(p, &AliceSource::Ideal).unwrap();
        let direct = apply_local(&adc(p).unwrap(), &phi_plus(), 0).unwrap();
        worst = worst.max(mix.matrix().max_abs_diff(direct.matrix()));
    }
    check(worst <= 1e-12, format!("21-point grid: max entry deviation {worst:.2e}"))
}

fn calibration() -> Outcome {
    let mut bob = SweepConfig::new(SweepKind::CalibBob);
    bob.grid = vec![GridAxis::new(0.0, 45.0, 46)];
    let mut alice = SweepConfig::new(SweepKind::CalibAlice);
    alice.grid = vec![GridAxis::new(22.5, 45.0, 46)];
    let mut worst: f64 = 0.0;
    for (cfg, theory) in [(&bob, pb_from_alpha as fn(f64) -> f64), (&alice, |t| pa_from_theta(t).unwrap())] {
        let result = run_calibration(cfg).map_err(|e| e.to_string())?;
        for row in &result.rows {
            let angle = row[0].as_f64().unwrap();
            worst = worst.max((row[2].as_f64().unwrap() - theory(angle)).abs());
        }
    }
    check(worst <= 1e-3, format!("alpha and theta sweeps: max |estimate - theory| = {worst:.2e}"))
}

fn tomography_quality() -> Outcome {
    let truth = werner_state(0.8).unwrap();
    let records = simulate_counts(&truth, &full_settings(2), 10_000, 31).unwrap();
    let est = state_tomo_mle(&records, MLE_TOL).map_err(|e| e.to_string())?;
    let fidelity = state_fidelity(&est, &truth).unwrap();
    let coarse = monte_carlo_fidelity_error(&truth, 1_000, 100, 8).map_err(|e| e.to_string())?;
    let fine = monte_carlo_fidelity_error(&truth, 10_000, 100, 9).map_err(|e| e.to_string())?;
    let ratio = coarse.std / fine.std;
    let target = 10f64.sqrt();
    check(
        fidelity >= 0.99 && ratio >= 0.5 * target && ratio <= 1.5 * target,
        format!(
            "MLE fidelity {fidelity:.5}; MC std {:.2e} (n=1e3) / {:.2e} (n=1e4) = {ratio:.2} (sqrt 10 = {target:.2})",
            coarse.std, fine.std
        ),
    )
}

fn pdc_sweep() -> Outcome {
    let mut cfg = SweepConfig::new(SweepKind::FidelityPdc);
    cfg.series = Some(vec![Series::Fixed(0.0), Series::Fixed(0.5)]);
    let result = run_fidelity_pdc(&cfg).map_err(|e| e.to_string())?;
    let mut min_pa0 = f64::INFINITY;
    let mut monotone = true;
    for label in ["p_a=0", "p_a=0.5"] {
        let rows: Vec<(f64, f64)> = result
            .rows
            .iter()
            .filter(|r| matches!(&r[0], noisy_teleport::harness::Value::Text(t) if t == label))
            .map(|r| (r[2].as_f64().unwrap(), r[3].as_f64().unwrap()))
            .collect();
        if rows.len() != 101 {
            return Err(format!("series {label} has {} rows", rows.len()));
        }
        monotone &= rows.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-12);
        if label == "p_a=0" {
            min_pa0 = rows.iter().filter(|r| r.0 < 1.0).map(|r| r.1).fold(f64::INFINITY, f64::min);
        }
    }
    check(
        min_pa0 >= 2.0 / 3.0 - 1e-9 && monotone,
        format!("min F(p_a=0, p_b<1) = {min_pa0:.9}; both series non-increasing: {monotone}"),
    )
}

fn werner_enhancement() -> Outcome {
    let mut cfg = SweepConfig::new(SweepKind::EnhancementSearch);
    cfg.resource = ResourceSpec::Werner(0.8);
    cfg.alice_method = AliceMethod::Direct;
    let report = enhancement_search(&cfg).map_err(|e| e.to_string())?;
    let (Some(pb_star), Some(pa_opt), Some(f_max), Some(f_pa0)) =
        (report.p_b_star, report.p_a_opt, report.F_max, report.F_at_pa0)
    else {
        return Err("no crossing found for the Werner(0.8) surrogate".into());
    };

    // Oracle: fidelity through the fully entangled fraction, on dense grids.
    let base = werner_state(0.8).unwrap();
    let oracle = |a: f64, b: f64| -> f64 {
        let rho: DensityMatrix = damp_pair(&base, (DampingFamily::Adc, a), (DampingFamily::Adc, b)).unwrap();
        teleport_fidelity(fef(&rho).unwrap().f, 2).unwrap()
    };
    let pb_grid = grid(201);
    let vals: Vec<f64> = pb_grid.iter().map(|&b| oracle(0.0, b) - 2.0 / 3.0).collect();
    let k = vals.windows(2).position(|w| w[0] >= 0.0 && w[1] < 0.0).ok_or("oracle grid has no crossing")?;
    let (mut lo, mut hi) = (pb_grid[k], pb_grid[k + 1]);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if oracle(0.0, mid) >= 2.0 / 3.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let oracle_pb = 0.5 * (lo + hi);
    let scan: Vec<(f64, f64)> = grid(201).into_iter().map(|a| (a, oracle(a, oracle_pb))).collect();
    let best = scan.iter().copied().fold((0.0, f64::NEG_INFINITY), |m, x| if x.1 > m.1 { x } else { m });
    let ok = (pb_star - oracle_pb).abs() <= 1e-4
        && (pa_opt - best.0).abs() <= 1e-4
        && (f_max - best.1).abs() <= 1e-4
        && (f_pa0 - 2.0 / 3.0).abs() <= 1e-4
        && f_max >= f_pa0;
    check(
        ok,
        format!(
            "p_b* = {pb_star:.6} (grid {oracle_pb:.6}), p_a_opt = {pa_opt:.3} (grid {:.3}), F_max = {f_max:.6} (grid {:.6}), F_at_pa0 = {f_pa0:.6}",
            best.0, best.1
        ),
    )
}

fn main() {
    let criteria: [(&str, Criterion); 12] = [
        ("closed-form fef agreement", closed_forms),
        ("classical threshold", threshold),
        ("two-sided enhancement, ideal resource", enhancement_ideal),
        ("contour reference point", caption_point),
        ("fidelity / fef identity", horodecki),
        ("fef oracle equivalence", oracle_equivalence),
        ("dilation equivalence", dilation),
        ("Alice mixture identity", mixture_identity),
        ("calibration round trips", calibration),
        ("tomography quality", tomography_quality),
        ("phase-damping sweep properties", pdc_sweep),
        ("enhancement search, Werner(0.8)", werner_enhancement),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
