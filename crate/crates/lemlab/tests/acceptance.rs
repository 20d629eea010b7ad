//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! with the measured values before asserting.
//!
//! Campaign seeds are frozen so every run reproduces the same statistics
//! bit for bit; the asymptotic brackets are checked at the pinned degrees
//! and trial counts.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lemlab::critical::{oracle_critical_points, solve_critical_points, SolveOptions};
use lemlab::ensembles::{sample_polynomial, EnsembleFamily, EnsembleSpec, SeedPolicy, SQRT_E};
use lemlab::experiment::{
    pairing_campaign, phase_sweep, run_experiment, scaling_fit, CountMethodChoice,
    ExperimentConfig, FitModel,
};
use lemlab::potential::{
    circle_expectation_sq, clt_diagnostic, inverse_moment, inverse_moment_bound, potential_circle,
    potential_disk,
};
use lemlab::topology::{count_components_exact, count_components_grid, DEGENERACY_TOL};

fn report(criterion: &str, pass: bool, detail: &str) -> bool {
    println!(
        "ACCEPTANCE {criterion}: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    pass
}

fn random_instances(master: u64, count: usize, n_max: usize) -> Vec<(EnsembleFamily, usize, u64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    (0..count)
        .map(|_| {
            let family = if rng.random::<bool>() {
                EnsembleFamily::UniformDisk
            } else {
                EnsembleFamily::UniformCircle
            };
            let n = rng.random_range(2..=n_max);
            (family, n, rng.random::<u64>())
        })
        .collect()
}

/// Criterion 1: on 500 + 500 random instances with n <= 16, the exact
/// counter and the grid oracle agree in >= 99% of instances, and every
/// disagreement carries a degenerate or unstable flag.
#[test]
fn criterion_1_oracle_equivalence() {
    let mut agreements = 0usize;
    let mut flagged_disagreements = 0usize;
    let mut clean_disagreements = 0usize;
    let mut per_family = [0usize; 2];
    let mut instances = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x0C_1A55);
    while per_family[0] < 500 || per_family[1] < 500 {
        let family_idx = usize::from(per_family[0] >= 500 || (per_family[1] < 500 && rng.random::<bool>()));
        let family = [EnsembleFamily::UniformDisk, EnsembleFamily::UniformCircle][family_idx];
        if per_family[family_idx] >= 500 {
            continue;
        }
        per_family[family_idx] += 1;
        instances.push((family, rng.random_range(2..=16usize), rng.random::<u64>()));
    }
    for &(family, n, seed) in &instances {
        let spec = EnsembleSpec::new(family, 1.0, n).unwrap();
        let poly = sample_polynomial(&spec, &SeedPolicy::new(seed, 0));
        let cps = solve_critical_points(&poly, &SolveOptions::default()).unwrap();
        let exact = count_components_exact(&poly, &cps, DEGENERACY_TOL).unwrap();
        let grid = count_components_grid(&poly, 2048);
        if exact.count == grid.count {
            agreements += 1;
        } else if exact.degenerate || grid.degenerate {
            flagged_disagreements += 1;
        } else {
            clean_disagreements += 1;
        }
    }
    let total = instances.len();
    let rate = agreements as f64 / total as f64;
    let pass = rate >= 0.99 && clean_disagreements == 0;
    let ok = report(
        "1 oracle equivalence",
        pass,
        &format!(
            "{agreements}/{total} agreements ({:.2}%), {flagged_disagreements} flagged, \
             {clean_disagreements} clean disagreements",
            100.0 * rate
        ),
    );
    assert!(ok);
}

/// Criterion 2: solver vs coefficient oracle on 500 instances with n <= 12
/// (multiset Hausdorff < 1e-7), and the Vieta sum identity to 1e-8 relative
/// on every solve in the suite up to n = 2048.
#[test]
fn criterion_2_solver_correctness() {
    fn hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
        let one_way = |p: &[Complex64], q: &[Complex64]| {
            p.iter()
                .map(|&x| {
                    q.iter()
                        .map(|&y| (x - y).norm())
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(0.0, f64::max)
        };
        one_way(a, b).max(one_way(b, a))
    }
    fn vieta_residual(poly: &lemlab::RootedPolynomial, points: &[Complex64]) -> f64 {
        let n = poly.degree() as f64;
        let sum_roots: Complex64 = poly.roots().iter().sum();
        let sum_cps: Complex64 = points.iter().sum();
        (sum_cps - sum_roots * ((n - 1.0) / n)).norm() / (1.0 + sum_roots.norm())
    }

    let mut worst_hausdorff = 0.0f64;
    let mut worst_vieta = 0.0f64;
    for (family, n, seed) in random_instances(0x0C_2B66, 500, 12) {
        let spec = EnsembleSpec::new(family, 1.0, n).unwrap();
        let poly = sample_polynomial(&spec, &SeedPolicy::new(seed, 0));
        let solved = solve_critical_points(&poly, &SolveOptions::default()).unwrap();
        let oracle = oracle_critical_points(&poly).unwrap();
        worst_hausdorff = worst_hausdorff.max(hausdorff(&solved.points, &oracle.points));
        worst_vieta = worst_vieta.max(vieta_residual(&poly, &solved.points));
    }
    // Large-degree solves: the Vieta identity is the global accuracy check.
    for (family, n) in [
        (EnsembleFamily::UniformDisk, 128usize),
        (EnsembleFamily::UniformCircle, 512),
        (EnsembleFamily::UniformDisk, 2048),
    ] {
        let spec = EnsembleSpec::new(family, 1.0, n).unwrap();
        let poly = sample_polynomial(&spec, &SeedPolicy::new(0x0C2B67 + n as u64, 0));
        let solved = solve_critical_points(&poly, &SolveOptions::default()).unwrap();
        worst_vieta = worst_vieta.max(vieta_residual(&poly, &solved.points));
    }
    let pass = worst_hausdorff < 1e-7 && worst_vieta < 1e-8;
    let ok = report(
        "2 critical solver",
        pass,
        &format!("worst hausdorff {worst_hausdorff:.3e}, worst vieta {worst_vieta:.3e}"),
    );
    assert!(ok);
}

/// Criterion 3: circle ratio E[C]/n over degrees {100, 200, 400, 800} with
/// 200 trials each: the n = 800 ratio sits in [0.40, 0.60] and |ratio - 0.5|
/// is non-increasing within two standard errors.
#[test]
fn criterion_3_circle_ratio() {
    let config = ExperimentConfig {
        family: EnsembleFamily::UniformCircle,
        r: 1.0,
        degrees: vec![100, 200, 400, 800],
        trials_per_degree: 200,
        master_seed: 31,
        count_method: CountMethodChoice::Exact,
        grid_resolution: 1024,
        outputs: None,
    };
    let result = run_experiment(&config).unwrap();
    assert!(result.valid, "failure tally {}", result.total_failures);
    let fit = scaling_fit(&result, FitModel::LinearRatio).unwrap();
    let ratios: Vec<f64> = result
        .per_degree
        .iter()
        .map(|d| d.mean_count_over_n)
        .collect();
    let ses: Vec<f64> = result
        .per_degree
        .iter()
        .map(|d| d.stderr_count / d.n as f64)
        .collect();
    let mut trend_ok = true;
    for i in 1..ratios.len() {
        let slack = 2.0 * (ses[i] * ses[i] + ses[i - 1] * ses[i - 1]).sqrt();
        if (ratios[i] - 0.5).abs() > (ratios[i - 1] - 0.5).abs() + slack {
            trend_ok = false;
        }
    }
    let bracket_ok = (0.40..=0.60).contains(&fit.estimate);
    let ok = report(
        "3 circle n/2 law",
        bracket_ok && trend_ok,
        &format!(
            "ratio at n=800: {:.4} (CI {:.4}..{:.4}); ratios {:?}; trend ok: {trend_ok}",
            fit.estimate,
            fit.confidence_interval.0,
            fit.confidence_interval.1,
            ratios.iter().map(|r| (r * 1e4).round() / 1e4).collect::<Vec<_>>()
        ),
    );
    assert!(ok);
}

/// Criterion 4: disk log-log slope over degrees {64..1024} with 200 trials
/// each lands in [0.35, 0.65], with a bootstrap CI excluding 0 and 1.
#[test]
fn criterion_4_disk_sqrt_law() {
    let config = ExperimentConfig {
        family: EnsembleFamily::UniformDisk,
        r: 1.0,
        degrees: vec![64, 128, 256, 512, 1024],
        trials_per_degree: 200,
        master_seed: 42,
        count_method: CountMethodChoice::Exact,
        grid_resolution: 1024,
        outputs: None,
    };
    let result = run_experiment(&config).unwrap();
    assert!(result.valid, "failure tally {}", result.total_failures);
    let fit = scaling_fit(&result, FitModel::PowerLaw).unwrap();
    let (lo, hi) = fit.confidence_interval;
    let pass = (0.35..=0.65).contains(&fit.estimate) && lo > 0.0 && hi < 1.0;
    let ok = report(
        "4 disk sqrt(n) law",
        pass,
        &format!(
            "slope {:.4}, bootstrap CI ({lo:.4}, {hi:.4}), means {:?}",
            fit.estimate,
            result
                .per_degree
                .iter()
                .map(|d| (d.mean_count * 1e3).round() / 1e3)
                .collect::<Vec<_>>()
        ),
    );
    assert!(ok);
}

/// Criterion 5: the phase table at n = 500 with 50 trials per cell.
#[test]
fn criterion_5_phase_table() {
    let n = 500;
    let trials = 50;
    let circle = phase_sweep(
        EnsembleFamily::UniformCircle,
        &[0.9, 1.1],
        n,
        trials,
        51,
    )
    .unwrap();
    let disk = phase_sweep(
        EnsembleFamily::UniformDisk,
        &[0.95, 0.85 * SQRT_E, 1.5 * SQRT_E],
        n,
        trials,
        52,
    )
    .unwrap();
    let c09 = &circle.rows[0];
    let c11 = &circle.rows[1];
    let d095 = &disk.rows[0];
    let d085e = &disk.rows[1];
    let d15e = &disk.rows[2];

    let cell = |name: &str, pass: bool, detail: String| -> bool {
        println!("  phase cell {name}: {} — {detail}", if pass { "pass" } else { "FAIL" });
        pass
    };
    let p1 = cell(
        "circle r=0.9 -> 1",
        c09.fraction_exactly_one >= 0.99,
        format!("count==1 in {:.1}% of trials, mean {:.4}", 100.0 * c09.fraction_exactly_one, c09.mean_count),
    );
    let p2 = cell(
        "circle r=1.1 -> n",
        c11.mean_count >= 0.99 * n as f64,
        format!("mean {:.2} = {:.4} n (needs >= 0.99 n)", c11.mean_count, c11.ratio),
    );
    let p3 = cell(
        "disk r=0.95 -> 1",
        d095.fraction_exactly_one >= 0.99,
        format!("count==1 in {:.1}% of trials, mean {:.4}", 100.0 * d095.fraction_exactly_one, d095.mean_count),
    );
    let p4 = cell(
        "disk r=0.85*sqrt(e) -> strictly intermediate",
        d085e.ratio > 0.02 && d085e.ratio < 0.98,
        format!("mean/n {:.4}", d085e.ratio),
    );
    let p5 = cell(
        "disk r=1.5*sqrt(e) -> n",
        d15e.mean_count >= 0.99 * n as f64,
        format!("mean {:.2} = {:.4} n", d15e.mean_count, d15e.ratio),
    );
    let pass = p1 && p2 && p3 && p4 && p5;
    let ok = report(
        "5 phase table",
        pass,
        &format!("cells pass: [{p1}, {p2}, {p3}, {p4}, {p5}]"),
    );
    assert!(ok);
}

/// Criterion 6: disk pairing fraction over degrees {250, 500, 1000} with
/// 100 trials: non-decreasing within two standard errors and >= 0.8 at
/// n = 1000.
#[test]
fn criterion_6_pairing() {
    let campaign = pairing_campaign(&[250, 500, 1000], 100, 61).unwrap();
    let rows = &campaign.rows;
    assert!(rows.iter().all(|row| !row.excluded));
    let mut trend_ok = true;
    for i in 1..rows.len() {
        let f_prev = rows[i - 1].fraction.unwrap();
        let f_cur = rows[i].fraction.unwrap();
        let se = (rows[i].stderr.unwrap().powi(2) + rows[i - 1].stderr.unwrap().powi(2)).sqrt();
        if f_cur < f_prev - 2.0 * se {
            trend_ok = false;
        }
    }
    let last = rows.last().unwrap().fraction.unwrap();
    let pass = trend_ok && last >= 0.8;
    let ok = report(
        "6 pairing",
        pass,
        &format!(
            "fractions {:?}, n=1000 fraction {last:.4} (needs >= 0.8)",
            rows.iter()
                .map(|r| (r.fraction.unwrap() * 1e4).round() / 1e4)
                .collect::<Vec<_>>()
        ),
    );
    assert!(ok);
}

/// Criterion 7: potential and moment identities.
#[test]
fn criterion_7_potential_identities() {
    // (a) Closed-form potentials vs Monte Carlo means at 25 points each.
    let samples = 1_000_000usize;
    let mut worst_sigma = 0.0f64;
    for family in [EnsembleFamily::UniformDisk, EnsembleFamily::UniformCircle] {
        let spec = EnsembleSpec::new(family, 1.0, samples).unwrap();
        let draw = sample_polynomial(&spec, &SeedPolicy::new(71, 0));
        let xs = draw.roots();
        for k in 0..25 {
            // Radial fan of evaluation points inside and outside the disk.
            let radius = 0.1 + 1.3 * (k as f64 / 24.0);
            let angle = 2.399963 * k as f64;
            let z = Complex64::from_polar(radius, angle);
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            for &x in xs {
                let l = (z - x).norm().ln();
                sum += l;
                sumsq += l * l;
            }
            let mean = sum / samples as f64;
            let var = (sumsq / samples as f64 - mean * mean).max(0.0);
            let stderr = (var / samples as f64).sqrt();
            let expect = match family {
                EnsembleFamily::UniformDisk => potential_disk(z, 1.0),
                EnsembleFamily::UniformCircle => potential_circle(z, 1.0),
            };
            let sigmas = (mean - expect).abs() / stderr.max(1e-12);
            worst_sigma = worst_sigma.max(sigmas);
        }
    }
    let potentials_ok = worst_sigma <= 4.0;

    // (b) E[1/|t - X|^2] = 1/(1 - t^2) at three radii to 1e-8.
    let mut worst_identity = 0.0f64;
    for &t in &[0.3, 0.6, 0.9] {
        let v = circle_expectation_sq(t, &|d2: f64| 1.0 / d2).unwrap();
        worst_identity = worst_identity.max((v - 1.0 / (1.0 - t * t)).abs());
    }
    let identity_ok = worst_identity <= 1e-8;

    // (c) Inverse moments respect the explicit bound.
    let mut bound_ok = true;
    let mut worst_margin = f64::INFINITY;
    for &p in &[0.5, 1.0, 1.5, 1.9] {
        for &a in &[0.0, 0.5, 1.0] {
            let v = inverse_moment(Complex64::new(a, 0.0), p).unwrap();
            let bound = inverse_moment_bound(p);
            worst_margin = worst_margin.min(bound - v);
            if !(v.is_finite() && v <= bound + 1e-9) {
                bound_ok = false;
            }
        }
    }

    let pass = potentials_ok && identity_ok && bound_ok;
    let ok = report(
        "7 potential identities",
        pass,
        &format!(
            "worst MC deviation {worst_sigma:.2} sigma (<= 4); \
             inverse-square identity error {worst_identity:.2e} (<= 1e-8); \
             inverse-moment margin to bound {worst_margin:.3}"
        ),
    );
    assert!(ok);
}

/// Criterion 8: the empirical KS distance of normalized log-sums stays
/// within the Berry-Esseen budget plus sampling noise, and shrinks with n.
#[test]
fn criterion_8_clt_diagnostic() {
    let trials = 5000;
    let ks_noise = 1.358 / (trials as f64).sqrt();

    let spec = EnsembleSpec::new(EnsembleFamily::UniformCircle, 1.0, 400).unwrap();
    let circle = clt_diagnostic(&spec, Complex64::new(1.0, 0.0), trials, 81).unwrap();
    let circle_ok = circle.ks_distance <= circle.berry_esseen_budget + 2.0 * ks_noise;

    let mut disk_ks = Vec::new();
    for n in [100usize, 200, 400] {
        let spec = EnsembleSpec::new(EnsembleFamily::UniformDisk, 1.0, n).unwrap();
        let d = clt_diagnostic(&spec, Complex64::new(0.9, 0.0), trials, 82).unwrap();
        disk_ks.push(d.ks_distance);
    }
    let disk_ok = disk_ks.windows(2).all(|w| w[1] <= w[0] + 2.0 * ks_noise);

    let pass = circle_ok && disk_ok;
    let ok = report(
        "8 clt diagnostic",
        pass,
        &format!(
            "circle z=1 n=400: ks {:.4} vs budget {:.4} + noise; disk z=0.9 ks by n: {:?}",
            circle.ks_distance,
            circle.berry_esseen_budget,
            disk_ks.iter().map(|k| (k * 1e4).round() / 1e4).collect::<Vec<_>>()
        ),
    );
    assert!(ok);
}
