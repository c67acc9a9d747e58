//! Acceptance suite.
//!
//! One test per criterion, each printing a PASS/FAIL line with the
//! measured numbers before asserting. Criteria 4, 7, and 8 encode
//! asymptotic envelopes that the estimators provably do not meet at
//! n = 10^4 with the tabulated truncation exponents (see the test
//! bodies); they are implemented exactly as stated and left red rather
//! than loosened. The companion `theorem3_deviation_bound_envelope`
//! documents the same finite-sample gap for the deviation inequality.

use tailix::baselines::{hill, TailFraction};
use tailix::distributions::{sample_pareto, ParetoLaw};
use tailix::experiments::{
    normality_diagnostic, run_estimation_experiment, run_power_experiment, run_type1_experiment,
    trial_seed, ExperimentConfig, GridRow,
};
use tailix::inference::EstimatorId;
use tailix::truncated::{
    contraction_base, convergence_bound, g1, g2, solve_lower, solve_upper, truncated_mean,
    truncated_second_moment, Branch, SolverConfig, TruncationSchedule,
};
use tailix::Sample;

/// Closed-form population truncated mean, the independent oracle for the
/// fixed-point identity: alpha/(1-alpha) (b^(1-alpha) - 1), ln b at 1.
fn population_mean(alpha: f64, b: f64) -> f64 {
    if alpha == 1.0 {
        b.ln()
    } else {
        alpha / (1.0 - alpha) * (b.powf(1.0 - alpha) - 1.0)
    }
}

/// Closed-form population truncated second moment:
/// alpha/(2-alpha) (b^(2-alpha) - 1), 2 ln b at 2.
fn population_second_moment(alpha: f64, b: f64) -> f64 {
    if alpha == 2.0 {
        2.0 * b.ln()
    } else {
        alpha / (2.0 - alpha) * (b.powf(2.0 - alpha) - 1.0)
    }
}

fn lower_grid() -> Vec<GridRow> {
    [
        (0.10, 2.00),
        (0.20, 2.00),
        (0.30, 2.00),
        (0.40, 1.80),
        (0.50, 1.70),
        (0.60, 1.50),
        (0.70, 1.30),
        (0.80, 1.20),
        (0.90, 1.10),
    ]
    .into_iter()
    .map(|(a, q)| GridRow::new(a, q))
    .collect()
}

fn upper_grid() -> Vec<GridRow> {
    [
        (1.10, 0.80),
        (1.20, 0.70),
        (1.30, 0.65),
        (1.40, 0.63),
        (1.50, 0.61),
        (1.60, 0.60),
        (1.70, 0.60),
        (1.80, 0.58),
        (1.90, 0.45),
    ]
    .into_iter()
    .map(|(a, q)| GridRow::new(a, q))
    .collect()
}

fn config(
    grid: Vec<GridRow>,
    branch: Branch,
    reps: usize,
    base_seed: u64,
    estimators: Vec<EstimatorId>,
) -> ExperimentConfig {
    ExperimentConfig {
        n: 10_000,
        reps,
        base_seed,
        grid,
        branch,
        estimators,
        m_tail: 100,
        m_tlg: 5_000,
        solver: SolverConfig::default(),
    }
}

#[test]
fn criterion_01_fixed_point_identity() {
    let mut worst: f64 = 0.0;
    for &b in &[
        10_000f64.powf(1.7),
        10_000f64.powf(0.61),
        std::f64::consts::E,
        10.0,
        1.5,
    ] {
        for i in 1..10 {
            let alpha = i as f64 / 10.0;
            let mu = population_mean(alpha, b);
            worst = worst.max((g1(alpha, mu, b).unwrap() - alpha).abs());
            let alpha_u = 1.0 + alpha;
            let nu2 = population_second_moment(alpha_u, b);
            worst = worst.max((g2(alpha_u, nu2, b).unwrap() - alpha_u).abs());
        }
    }
    let pass = worst < 1e-10;
    println!(
        "criterion 1 {}: fixed-point identity on both grids, worst residual {worst:.3e} (tol 1e-10)",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass);
}

#[test]
fn criterion_02_table1_reproduction() {
    let cfg = config(
        lower_grid(),
        Branch::Lower,
        200,
        20_260_801,
        vec![EstimatorId::Truncated],
    );
    let table = run_estimation_experiment(&cfg).unwrap();
    let mut worst = 0.0f64;
    for row in &table.rows {
        let err = (row.values[0].unwrap() - row.alpha).abs();
        worst = worst.max(err);
    }
    let ae = table.aggregate[0].unwrap();
    let pass = worst <= 0.01 && ae <= 0.01;
    println!(
        "criterion 2 {}: (0,1) grid, worst per-row |mean-alpha| {worst:.4} (tol 0.01), AE {ae:.4} (tol 0.01)",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "worst {worst}, AE {ae}");
}

#[test]
fn criterion_03_table2_reproduction() {
    let cfg = config(
        upper_grid(),
        Branch::Upper,
        200,
        20_260_802,
        vec![EstimatorId::Truncated, EstimatorId::Hill],
    );
    let table = run_estimation_experiment(&cfg).unwrap();
    let ae_truncated = table.aggregate[0].unwrap();
    let ae_hill = table.aggregate[1].unwrap();
    let pass = ae_truncated <= 0.12 && ae_truncated < ae_hill;
    println!(
        "criterion 3 {}: (1,2) grid, truncated AE {ae_truncated:.4} (tol 0.12), Hill AE {ae_hill:.4}, truncated < Hill: {}",
        if pass { "PASS" } else { "FAIL" },
        ae_truncated < ae_hill
    );
    assert!(pass, "truncated {ae_truncated}, hill {ae_hill}");
}

#[test]
fn criterion_04_table3_type1_error() {
    // The truncated half of this criterion encodes the nominal 5% level
    // of the asymptotic rejection region. At n = 10^4 with the grid's
    // truncation exponents the region is anti-conservative: the CLT
    // scaling understates the fixed point's finite-sample spread by the
    // factor 1/(1 - G'(alpha_hat)), so the observed AT sits far above
    // the envelope. Asserted as stated; expected to fail.
    let cfg = config(
        lower_grid(),
        Branch::Lower,
        500,
        20_260_803,
        vec![EstimatorId::Truncated, EstimatorId::Hill],
    );
    let table = run_type1_experiment(&cfg).unwrap();
    let at_truncated = table.aggregate[0].unwrap();
    let at_hill = table.aggregate[1].unwrap();
    let rows: Vec<f64> = table.rows.iter().map(|r| r.values[0].unwrap()).collect();
    let pass = (0.03..=0.08).contains(&at_truncated) && (0.03..=0.09).contains(&at_hill);
    println!(
        "criterion 4 {}: truncated AT {at_truncated:.4} (envelope [0.03, 0.08]), Hill AT {at_hill:.4} (envelope [0.03, 0.09]); truncated per-row rates {rows:?}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "truncated AT {at_truncated}, hill AT {at_hill}");
}

#[test]
fn criterion_05_table5_power_spot_checks() {
    let grid: Vec<GridRow> = (0..9)
        .map(|i| GridRow::new(0.60 + 0.04 * i as f64, 1.5))
        .collect();
    let cfg = config(
        grid,
        Branch::Lower,
        500,
        20_260_805,
        vec![EstimatorId::Truncated],
    );
    let table = run_power_experiment(&cfg, 0.60).unwrap();
    let powers: Vec<f64> = table.rows.iter().map(|r| r.values[0].unwrap()).collect();
    let p076 = powers[4];
    let p088 = powers[7];
    let spot = (p076 - 0.967).abs() <= 0.05 && p088 >= 0.95;
    let monotone = powers.windows(2).all(|w| w[1] >= w[0] - 0.05);
    let pass = spot && monotone;
    println!(
        "criterion 5 {}: power at 0.76 = {p076:.3} (0.967 +- 0.05), at 0.88 = {p088:.3} (>= 0.95), nondecreasing within 0.05: {monotone}; full curve {powers:?}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "powers {powers:?}");
}

#[test]
fn criterion_06_table6_ranking() {
    let grid: Vec<GridRow> = (0..8)
        .map(|i| GridRow::new(1.40 + 0.08 * i as f64, 0.63))
        .collect();
    let cfg = config(
        grid,
        Branch::Upper,
        300,
        20_260_806,
        EstimatorId::ALL.to_vec(),
    );
    let table = run_power_experiment(&cfg, 1.40).unwrap();
    let aps: Vec<(EstimatorId, f64)> = table
        .estimators
        .iter()
        .zip(&table.aggregate)
        .map(|(&id, v)| (id, v.unwrap()))
        .collect();
    let truncated_ap = aps[0].1;
    let best_baseline = aps[1..]
        .iter()
        .map(|&(_, v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    let pass = aps[1..].iter().all(|&(_, v)| truncated_ap > v);
    println!(
        "criterion 6 {}: truncated AP {truncated_ap:.3} vs best baseline {best_baseline:.3}; all {aps:?}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{aps:?}");
}

#[test]
fn criterion_07_theorem1_convergence_properties() {
    // Monotone traces hold without exception. The printed rate constant
    // uses (1 - alpha_hat) [(2 - alpha_hat') upper] in the contraction
    // base for both iteration directions, but its own derivation only
    // supports that constant for ascending starts; descending starts
    // would need the start value in that factor instead. The bound is
    // asserted exactly as printed over both directions with the
    // converged estimate substituted and 2*epsilon slack; descending
    // instances violate it, so this criterion fails.
    let grids: [(Branch, Vec<(f64, f64)>); 2] = [
        (
            Branch::Lower,
            vec![(0.1, 2.0), (0.3, 2.0), (0.5, 1.7), (0.7, 1.3), (0.9, 1.1)],
        ),
        (
            Branch::Upper,
            vec![(1.1, 0.8), (1.3, 0.65), (1.5, 0.61), (1.7, 0.6), (1.9, 0.45)],
        ),
    ];
    let solver = SolverConfig {
        epsilon: 1e-9,
        max_iter: 5_000,
        n0: 50,
    };
    let n = 10_000;
    let instances = 1_000;
    let mut all_pass = true;

    for (branch, grid) in grids {
        let mut mono_violations = 0usize;
        let mut bound_checked = 0usize;
        let mut bound_violations = 0usize;
        let mut converged_runs = 0usize;

        for t in 0..instances {
            let (alpha, q) = grid[t % grid.len()];
            let law = ParetoLaw::new(alpha).unwrap();
            let b_n = TruncationSchedule::new(q).unwrap().level(n).unwrap();
            let seed = trial_seed(20_260_807 + matches!(branch, Branch::Upper) as u64, 0, t);
            let s = sample_pareto(law, n, seed).unwrap();
            // deterministic spread of starting points over the branch interval
            let frac = 0.05 + 0.90 * (t as f64 / instances as f64);
            let (outcome, start) = match branch {
                Branch::Lower => {
                    let mu = truncated_mean(&s, b_n).unwrap();
                    (solve_lower(mu, b_n, frac, &solver).unwrap(), frac)
                }
                Branch::Upper => {
                    let nu2 = truncated_second_moment(&s, b_n).unwrap();
                    let y0 = 1.0 + frac;
                    (solve_upper(nu2, b_n, y0, &solver).unwrap(), y0)
                }
                _ => unreachable!(),
            };
            if !outcome.converged {
                continue;
            }
            converged_runs += 1;

            let up = outcome.trace.windows(2).all(|w| w[1] >= w[0]);
            let down = outcome.trace.windows(2).all(|w| w[1] <= w[0]);
            if !(up || down) {
                mono_violations += 1;
            }

            let base = contraction_base(outcome.alpha_hat, start, b_n, branch).unwrap();
            if base <= 1.0 {
                continue;
            }
            bound_checked += 1;
            let violated = outcome.trace.iter().enumerate().any(|(k, &x)| {
                let bound = convergence_bound(k, outcome.alpha_hat, start, b_n, branch).unwrap();
                (outcome.alpha_hat - x).abs() > bound + 2.0 * solver.epsilon
            });
            if violated {
                bound_violations += 1;
            }
        }

        let branch_pass = mono_violations == 0 && bound_violations == 0;
        all_pass &= branch_pass;
        println!(
            "criterion 7 [{branch}] {}: {converged_runs}/{instances} converged, monotonicity violations {mono_violations}, rate-bound violations {bound_violations}/{bound_checked} checked",
            if branch_pass { "PASS" } else { "FAIL" }
        );
    }
    assert!(all_pass);
}

#[test]
fn criterion_08_theorem3_clt_diagnostics() {
    // The solver-branch points inherit the finite-sample variance
    // inflation described at criterion 4, so their envelopes fail; the
    // boundary laws at alpha = 1 and alpha = 2 are linear in the
    // truncated moments and pass.
    let mut cfg = config(
        vec![],
        Branch::Lower,
        1_000,
        20_260_808,
        vec![EstimatorId::Truncated],
    );
    cfg.grid = vec![GridRow::new(0.5, 1.7)]; // validation needs a nonempty grid
    let mut all_pass = true;
    for (i, (alpha, q)) in [(0.5, 1.7), (1.5, 0.61), (1.0, 0.9), (2.0, 0.45)]
        .into_iter()
        .enumerate()
    {
        cfg.base_seed = 20_260_808 + i as u64;
        let report = normality_diagnostic(&cfg, alpha, q).unwrap();
        let sd = report.sd.unwrap();
        let pass = (-0.15..=0.15).contains(&report.mean)
            && (0.85..=1.15).contains(&sd)
            && (0.02..=0.09).contains(&report.tail_frac);
        all_pass &= pass;
        println!(
            "criterion 8 [alpha={alpha}, q={q}] {}: standardized mean {:+.3} (envelope +-0.15), SD {:.3} (envelope [0.85, 1.15]), 1.96-tail {:.3} (envelope [0.02, 0.09]), excluded {}",
            if pass { "PASS" } else { "FAIL" },
            report.mean,
            sd,
            report.tail_frac,
            report.excluded
        );
    }
    assert!(all_pass);
}

#[test]
fn criterion_09_tiny_input_oracles() {
    let e = std::f64::consts::E;

    // hill on [1, e, e^2], m = 2: mean log-ratio 1.5, estimate 2/3
    let data = [1.0, e, e * e];
    let view = tailix::OrderStatView::from_sorted(&data).unwrap();
    let hill_val = hill(&view, TailFraction::new(2).unwrap()).unwrap();
    let hill_ok = (hill_val - 2.0 / 3.0).abs() < 1e-12;

    // t_hill on top three [8, 4, 2], m = 2: mean ratio 0.375, estimate 0.6
    let data = [1.0, 2.0, 4.0, 8.0];
    let view = tailix::OrderStatView::from_sorted(&data).unwrap();
    let th = tailix::baselines::t_hill(&view, TailFraction::new(2).unwrap()).unwrap();
    let t_hill_ok = (th - 0.6).abs() < 1e-12;

    // m_stat on [1, e, e^2], m = 2, display indexing: both moments 1/2
    let data = [1.0, e, e * e];
    let view = tailix::OrderStatView::from_sorted(&data).unwrap();
    let m = TailFraction::new(2).unwrap();
    let m1 = tailix::baselines::m_stat(&view, m, 1).unwrap();
    let m2 = tailix::baselines::m_stat(&view, m, 2).unwrap();
    let m_stat_ok = (m1 - 0.5).abs() < 1e-12 && (m2 - 0.5).abs() < 1e-12;

    // moment with M1 = 1, M2 = 2 (log-ratios {2, 0}): estimate exactly 1
    let data = [1.0, 1.0, 1.0, e * e, e * e];
    let view = tailix::OrderStatView::from_sorted(&data).unwrap();
    let mom = tailix::baselines::moment(&view, m).unwrap();
    let moment_ok = (mom - 1.0).abs() < 1e-12;

    // truncated moments on [2, 4, 8] at level 5 and the degenerate level 1
    let s = Sample::new(vec![2.0, 4.0, 8.0]).unwrap();
    let mean_ok = (truncated_mean(&s, 5.0).unwrap() - 2.0).abs() < 1e-12
        && truncated_mean(&s, 1.0).unwrap() == 0.0;
    let second_ok = (truncated_second_moment(&s, 5.0).unwrap() - 20.0 / 3.0).abs() < 1e-12
        && truncated_second_moment(&Sample::new(vec![3.0]).unwrap(), 3.0).unwrap() == 9.0;

    let pass = hill_ok && t_hill_ok && m_stat_ok && moment_ok && mean_ok && second_ok;
    println!(
        "criterion 9 {}: hill {hill_ok}, t_hill {t_hill_ok}, m_stat {m_stat_ok}, moment {moment_ok}, truncated_mean {mean_ok}, truncated_second_moment {second_ok} (all at 1e-12)",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass);
}

/// Finite-sample check of the deviation inequality
/// P(|alpha_hat - alpha| >= 2/(ln b_n sqrt(ln b_n))) <= 2/n^2, asserted
/// at the conservative 0.01 envelope. The radius at (0.5, 1.7, n=10^4)
/// is 0.0323 while the estimator's true spread is about 0.025, so the
/// event probability is around 0.2 at this sample size and the envelope
/// fails; kept red as documentation of the asymptotic/finite-sample gap.
#[test]
fn theorem3_deviation_bound_envelope() {
    let alpha = 0.5;
    let q = 1.7;
    let n = 10_000;
    let reps = 1_000;
    let law = ParetoLaw::new(alpha).unwrap();
    let b_n = TruncationSchedule::new(q).unwrap().level(n).unwrap();
    let radius = 2.0 / (b_n.ln() * b_n.ln().sqrt());
    let solver = SolverConfig::default();
    let mut exceed = 0usize;
    for t in 0..reps {
        let s = sample_pareto(law, n, trial_seed(20_260_809, 0, t)).unwrap();
        let mu = truncated_mean(&s, b_n).unwrap();
        let out = solve_lower(mu, b_n, 0.5, &solver).unwrap();
        if out.converged && (out.alpha_hat - alpha).abs() >= radius {
            exceed += 1;
        }
    }
    let frac = exceed as f64 / reps as f64;
    let pass = frac <= 0.01;
    println!(
        "deviation bound {}: P(|alpha_hat - 0.5| >= {radius:.4}) = {frac:.3} (envelope 0.01)",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "exceedance fraction {frac}");
}
