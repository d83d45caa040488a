//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured quantities (run with `--nocapture` to see them).
//!
//! The criteria are desk-scale quantitative stand-ins for the asymptotic
//! limit behavior: closed-form scalar oracles, envelope and drift bounds
//! with Monte-Carlo slack, orderings across step-size grids, and full
//! reproducibility. Tests grab a global lock so the wall-clock budgets are
//! measured without contention from sibling tests.

use std::sync::Mutex;
use std::time::Instant;

use viergo_core::diagnostics::{
    analytic_stationary_variance_linear, drift_check, moment_estimate, stationary_gap,
    steady_state_mse,
};
use viergo_core::ergodics::{batch_means_variance, clt_replicates, sample_stats, TestFunction};
use viergo_core::linalg::{dist_sq, norm_sq};
use viergo_core::operators::{
    ball_probes, gradient_consistency, make_linear, make_logistic_game,
    make_quadratic_quartic_game, make_quasi_bilinear,
};
use viergo_core::oracle::{oracle_factory, NoiseModel, Phase, StochasticOracle, StreamKey};
use viergo_core::refinement::{bias_slope_probe, rr_replicates, summarize, Coupling};
use viergo_core::solvers::{
    convergence_envelope, max_step_size, run, run_fresh, run_with_observer, seg_step, sgda_step,
    Algorithm, SolverConfig,
};

static SERIAL: Mutex<()> = Mutex::new(());

fn locked() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn budget(t0: Instant, seconds: u64, label: &str) {
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(
        elapsed < seconds as f64,
        "{}: took {:.1}s, budget {}s",
        label,
        elapsed,
        seconds
    );
}

const NO_STORE: u64 = u64::MAX / 2;

#[test]
fn criterion_01_linear_chain_variance_sgda() {
    let _g = locked();
    let t0 = Instant::now();
    let op = make_linear(1.0, 1);
    let noise = NoiseModel::gaussian(0.5);
    let config = SolverConfig::new(Algorithm::Sgda, 0.1, 1_000_000, vec![1.0], 101)
        .with_burn_in(10_000)
        .with_record_stride(NO_STORE);
    let mut oracle = StochasticOracle::new(op, noise, StreamKey::new(101, 0, Phase::Main));
    let est = steady_state_mse(&config, &mut oracle, 0.5).unwrap();
    let v = analytic_stationary_variance_linear(Algorithm::Sgda, 1.0, 0.5, 0.1, 0.5).unwrap();
    let rel = (est.mse - v).abs() / v;
    assert!(rel < 0.03, "relative error {} vs analytic {}", rel, v);
    budget(t0, 10, "criterion 1");
    println!(
        "ACCEPTANCE 1 PASS: SGDA steady-state mse {:.6} vs analytic {:.6} (rel {:.4})",
        est.mse, v, rel
    );
}

#[test]
fn criterion_02_linear_chain_variance_seg() {
    let _g = locked();
    let t0 = Instant::now();
    let op = make_linear(1.0, 1);
    let noise = NoiseModel::gaussian(0.5);
    let config = SolverConfig::new(Algorithm::Seg, 0.1, 1_000_000, vec![1.0], 102)
        .with_alpha(0.5)
        .with_burn_in(10_000)
        .with_record_stride(NO_STORE);
    let mut oracle = StochasticOracle::new(op, noise, StreamKey::new(102, 0, Phase::Main));
    let est = steady_state_mse(&config, &mut oracle, 0.5).unwrap();
    let v = analytic_stationary_variance_linear(Algorithm::Seg, 1.0, 0.5, 0.1, 0.5).unwrap();
    assert!((v - 0.0071753).abs() < 1e-6);
    let rel = (est.mse - v).abs() / v;
    assert!(rel < 0.03, "relative error {} vs analytic {}", rel, v);
    budget(t0, 20, "criterion 2");
    println!(
        "ACCEPTANCE 2 PASS: SEG steady-state mse {:.6} vs analytic {:.6} (rel {:.4})",
        est.mse, v, rel
    );
}

#[test]
fn criterion_03_convergence_envelope() {
    let _g = locked();
    let t0 = Instant::now();
    let op = make_linear(1.0, 1);
    let noise = NoiseModel::gaussian(0.5);
    let sigma2 = noise.second_moment_bound(1);
    let env = convergence_envelope(Algorithm::Sgda, &op.params, 0.1, 0.5, sigma2).unwrap();
    let x0 = 3.0;
    let checkpoints = [10u64, 50, 200];
    let n_chains = 200;
    // sq_errs[k] collects the checkpoint-k squared errors across chains.
    let mut sq_errs = vec![Vec::with_capacity(n_chains); checkpoints.len()];
    for chain in 0..n_chains as u64 {
        let config = SolverConfig::new(Algorithm::Sgda, 0.1, 200, vec![x0], 103);
        let mut oracle =
            StochasticOracle::new(op.clone(), noise, StreamKey::new(103, chain, Phase::Main));
        let mut k = 0;
        run_with_observer(&config, &mut oracle, |t, x| {
            if k < checkpoints.len() && t == checkpoints[k] {
                sq_errs[k].push(norm_sq(x));
                k += 1;
            }
        })
        .unwrap()
        .completed()
        .unwrap();
    }
    for (k, &t) in checkpoints.iter().enumerate() {
        let stats = sample_stats(&sq_errs[k]);
        let se = (stats.variance / n_chains as f64).sqrt();
        let bound = env.bound_at(t, x0 * x0);
        assert!(
            stats.mean <= bound + 3.0 * se,
            "t = {}: mean {} exceeds envelope {} + 3se {}",
            t,
            stats.mean,
            bound,
            se
        );
        println!(
            "  envelope t={}: mc mean {:.4} <= bound {:.4} + 3se {:.4}",
            t, stats.mean, bound, se
        );
    }
    budget(t0, 30, "criterion 3");
    println!(
        "ACCEPTANCE 3 PASS: envelope (c1={:.3}, c2={:.3}) dominates the Monte-Carlo mean at t in {{10,50,200}}",
        env.c1, env.c2
    );
}

#[test]
fn criterion_04_steady_state_mse_ordering() {
    let _g = locked();
    let t0 = Instant::now();
    let game = make_quadratic_quartic_game(50, 7, 0.1).unwrap();
    let op = game.operator().clone();
    let noise = NoiseModel::gaussian(0.5);
    let gammas = [0.1, 0.05, 0.01, 0.001];
    for alg in [Algorithm::Sgda, Algorithm::Seg] {
        let mut plateaus = Vec::new();
        for (i, &gamma) in gammas.iter().enumerate() {
            let config = SolverConfig::new(alg, gamma, 200_000, vec![0.0; 100], 104)
                .with_alpha(0.5)
                .with_burn_in(100_000)
                .with_record_stride(NO_STORE)
                .with_allow_inadmissible(true);
            let mut oracle = StochasticOracle::new(
                op.clone(),
                noise,
                StreamKey::new(104, i as u64, Phase::Main),
            );
            let est = steady_state_mse(&config, &mut oracle, 0.5).unwrap();
            plateaus.push(est);
        }
        for w in plateaus.windows(2) {
            let gap = w[0].mse - w[1].mse;
            let slack = w[0].ci_halfwidth + w[1].ci_halfwidth;
            assert!(
                gap > slack,
                "{:?}: plateaus {:?} not separated ({} vs {})",
                alg,
                plateaus.iter().map(|p| p.mse).collect::<Vec<_>>(),
                gap,
                slack
            );
        }
        println!(
            "  {:?} plateaus: {:?}",
            alg,
            plateaus.iter().map(|p| p.mse).collect::<Vec<_>>()
        );
    }
    budget(t0, 300, "criterion 4");
    println!("ACCEPTANCE 4 PASS: steady-state mse strictly decreasing in gamma for SGDA and SEG");
}

#[test]
fn criterion_05_clt_normality_and_variance() {
    let _g = locked();
    let t0 = Instant::now();
    let op = make_linear(1.0, 1);
    let noise = NoiseModel::gaussian(0.5);
    let f = TestFunction::Coordinate(0);

    // 2000 replicates of N = 1e4 post-burn-in samples.
    let config = SolverConfig::new(Algorithm::Sgda, 0.1, 10_500, vec![1.0], 105)
        .with_burn_in(500)
        .with_record_stride(NO_STORE);
    let factory = oracle_factory(op.clone(), noise, 105, Phase::Main);
    let values = clt_replicates(&config, &factory, &f, 2000, 0.0).unwrap();
    let stats = sample_stats(&values);
    assert!(stats.skewness.abs() <= 0.2, "skewness {}", stats.skewness);
    assert!(
        stats.excess_kurtosis.abs() <= 0.5,
        "excess kurtosis {}",
        stats.excess_kurtosis
    );

    // Long-run variance from one long chain via batch means.
    let config =
        SolverConfig::new(Algorithm::Sgda, 0.1, 1_010_000, vec![1.0], 106).with_burn_in(10_000);
    let traj = run_fresh(&config, &op, &noise)
        .unwrap()
        .completed()
        .unwrap();
    let series: Vec<f64> = traj.iterates.iter().map(|x| x[0]).collect();
    let bm = batch_means_variance(&series, 1000).unwrap();
    let rel = (stats.variance - bm).abs() / bm;
    assert!(
        rel < 0.15,
        "replicate variance {} vs batch means {} (rel {})",
        stats.variance,
        bm,
        rel
    );
    budget(t0, 300, "criterion 5");
    println!(
        "ACCEPTANCE 5 PASS: skew {:.3}, ex-kurt {:.3}, replicate var {:.4} vs batch means {:.4} (rel {:.3})",
        stats.skewness, stats.excess_kurtosis, stats.variance, bm, rel
    );
}

#[test]
fn criterion_06_histogram_concentration() {
    let _g = locked();
    let t0 = Instant::now();
    // Conditioning 2.0 keeps the slowest relaxation time ~50 steps at
    // gamma = 0.005, so the horizons {100, 200, 1000} straddle the
    // transient-to-stationary crossover.
    let game = make_quadratic_quartic_game(50, 7, 2.0).unwrap();
    let op = game.operator().clone();
    let noise = NoiseModel::gaussian(0.5);
    let f = TestFunction::GameValue { game: game.clone() };

    // Part A: hot start, sd of the normalized sums shrinks with the horizon.
    let mut sds = Vec::new();
    for horizon in [100u64, 200, 1000] {
        let config = SolverConfig::new(Algorithm::Sgda, 0.005, horizon, vec![1.0; 100], 107)
            .with_record_stride(NO_STORE)
            .with_allow_inadmissible(true);
        let factory = oracle_factory(op.clone(), noise, 107, Phase::Main);
        let values = clt_replicates(&config, &factory, &f, 2000, 0.0).unwrap();
        sds.push(sample_stats(&values).variance.sqrt());
    }
    assert!(
        sds[0] > sds[1] && sds[1] > sds[2],
        "histogram sds not decreasing: {:?}",
        sds
    );

    // Part B: cold start at horizon 1000, the small step size stays closer
    // to the game value (zero).
    let mut means = Vec::new();
    for gamma in [0.1, 0.001] {
        let config = SolverConfig::new(Algorithm::Sgda, gamma, 1000, vec![0.0; 100], 108)
            .with_record_stride(NO_STORE)
            .with_allow_inadmissible(true);
        let factory = oracle_factory(op.clone(), noise, 108, Phase::Main);
        let values = clt_replicates(&config, &factory, &f, 2000, 0.0).unwrap();
        means.push(sample_stats(&values).mean);
    }
    assert!(
        means[1].abs() < means[0].abs(),
        "small-step mean {} not closer to 0 than large-step mean {}",
        means[1],
        means[0]
    );
    budget(t0, 600, "criterion 6");
    println!(
        "ACCEPTANCE 6 PASS: sds {:.3}/{:.3}/{:.3} decreasing; |mean| {:.4} (g=0.001) < {:.4} (g=0.1)",
        sds[0],
        sds[1],
        sds[2],
        means[1].abs(),
        means[0].abs()
    );
}

#[test]
fn criterion_07_rr_refinement() {
    let _g = locked();
    let t0 = Instant::now();
    let game = make_logistic_game();
    let op = game.operator().clone();
    // sigma = 1.0 and common random numbers: at T = 1e5 with 20 pairs the
    // bias must dominate the Monte-Carlo variance of the extrapolated
    // point for the 0.3 factor to be resolvable at 3 combined SE.
    let noise = NoiseModel::gaussian(1.0);
    let base = SolverConfig::new(Algorithm::Sgda, 0.1, 100_000, vec![0.0, 0.0], 109)
        .with_burn_in(10_000)
        .with_record_stride(NO_STORE)
        .with_allow_inadmissible(true); // 2 gamma = 0.2 sits above the SGDA gate
    let results = rr_replicates(&base, &op, &noise, Coupling::CommonRandomNumbers, 20).unwrap();
    let s = summarize(&results).unwrap();
    assert!(
        s.mean_err_rr <= 0.3 * s.mean_err_gamma,
        "err_rr {} vs 0.3 * err_gamma {}",
        s.mean_err_rr,
        0.3 * s.mean_err_gamma
    );
    let separation = 0.3 * s.mean_err_gamma - s.mean_err_rr;
    let combined_se = (0.09 * s.se_err_gamma.powi(2) + s.se_err_rr.powi(2)).sqrt();
    assert!(
        separation > 3.0 * combined_se,
        "separation {} vs 3 combined se {}",
        separation,
        combined_se
    );
    budget(t0, 120, "criterion 7");
    println!(
        "ACCEPTANCE 7 PASS: err_rr {:.2e} <= 0.3 * err_gamma {:.2e} (z = {:.1})",
        s.mean_err_rr,
        s.mean_err_gamma,
        separation / combined_se
    );
}

#[test]
fn criterion_08_bias_linearity() {
    let _g = locked();
    let t0 = Instant::now();
    let game = make_logistic_game();
    let op = game.operator().clone();
    let noise = NoiseModel::gaussian(0.5);
    let base = SolverConfig::new(Algorithm::Sgda, 0.05, 3_000_000, vec![0.0, 0.0], 110)
        .with_burn_in(100_000)
        .with_record_stride(NO_STORE);
    let points = bias_slope_probe(&base, &op, &noise, &[0.02, 0.04, 0.08], 30).unwrap();
    let slopes: Vec<f64> = points.iter().map(|p| p.bias_norm / p.gamma).collect();
    let max = slopes.iter().cloned().fold(f64::MIN, f64::max);
    let min = slopes.iter().cloned().fold(f64::MAX, f64::min);
    let spread = (max - min) / min;
    assert!(
        spread < 0.35,
        "slope spread {} (slopes {:?})",
        spread,
        slopes
    );
    let at_008 = points.iter().find(|p| p.gamma == 0.08).unwrap();
    assert!(
        at_008.bias_norm > at_008.ci_halfwidth,
        "bias at gamma=0.08 ({}) does not exclude zero (ci {})",
        at_008.bias_norm,
        at_008.ci_halfwidth
    );
    // Larger steps carry larger bias, resolvable at the error bars.
    for w in points.windows(2) {
        assert!(
            w[1].bias_norm - w[0].bias_norm > w[0].ci_halfwidth + w[1].ci_halfwidth,
            "bias not increasing in gamma: {:?}",
            points.iter().map(|p| p.bias_norm).collect::<Vec<_>>()
        );
    }
    budget(t0, 300, "criterion 8");
    println!(
        "ACCEPTANCE 8 PASS: bias/gamma slopes {:?} spread {:.3}; bias(0.08) = {:.2e} > ci {:.2e}",
        slopes, spread, at_008.bias_norm, at_008.ci_halfwidth
    );
}

#[test]
fn criterion_09_gap_scaling() {
    let _g = locked();
    let t0 = Instant::now();
    let game = make_quadratic_quartic_game(50, 7, 0.1).unwrap();
    let op = game.operator().clone();
    let noise = NoiseModel::gaussian(0.5);
    let mut ratios = Vec::new();
    for (i, gamma) in [0.1, 0.05, 0.01].into_iter().enumerate() {
        let config = SolverConfig::new(Algorithm::Sgda, gamma, 200_000, vec![0.0; 100], 111)
            .with_burn_in(100_000)
            .with_record_stride(NO_STORE)
            .with_allow_inadmissible(true);
        let mut oracle = StochasticOracle::new(
            op.clone(),
            noise,
            StreamKey::new(111, i as u64, Phase::Main),
        );
        let est = stationary_gap(&config, &mut oracle).unwrap();
        assert!(est.avg_gap > 0.0);
        ratios.push(est.avg_gap / gamma);
    }
    let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
    let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
    assert!(
        max / min < 3.0,
        "gap/gamma ratios {:?} span more than a factor 3",
        ratios
    );
    budget(t0, 300, "criterion 9");
    println!(
        "ACCEPTANCE 9 PASS: avg_gap/gamma = {:?} within factor {:.2}",
        ratios,
        max / min
    );
}

#[test]
fn criterion_10_drift_inequality() {
    let _g = locked();
    let t0 = Instant::now();
    let noise = NoiseModel::gaussian(0.5);

    let lin = make_linear(1.0, 5);
    let probes = ball_probes(lin.solution().unwrap(), 10.0, 100, 112);
    let config = SolverConfig::new(Algorithm::Sgda, 0.1, 10, vec![0.0; 5], 112);
    let out = drift_check(&lin, &noise, &config, &probes, 10_000).unwrap();
    let worst_lin = out
        .iter()
        .map(|p| p.margin_sigmas)
        .fold(f64::INFINITY, f64::min);
    assert!(worst_lin > -3.0, "linear drift margin {}", worst_lin);

    let game = make_quadratic_quartic_game(50, 7, 0.1).unwrap();
    let op = game.operator().clone();
    let gamma = 0.8 * max_step_size(Algorithm::Sgda, &op.params).unwrap();
    let probes = ball_probes(op.solution().unwrap(), 10.0, 100, 113);
    let config = SolverConfig::new(Algorithm::Sgda, gamma, 10, vec![0.0; 100], 113);
    let out = drift_check(&op, &noise, &config, &probes, 10_000).unwrap();
    let worst_game = out
        .iter()
        .map(|p| p.margin_sigmas)
        .fold(f64::INFINITY, f64::min);
    assert!(worst_game > -3.0, "game drift margin {}", worst_game);
    budget(t0, 120, "criterion 10");
    println!(
        "ACCEPTANCE 10 PASS: worst drift margins {:.1} (linear) and {:.1} (game) over 100 probes each",
        worst_lin, worst_game
    );
}

#[test]
fn criterion_11_divergence_detection() {
    let _g = locked();
    let t0 = Instant::now();
    let game = make_quasi_bilinear(1e-4);
    let op = game.operator().clone();
    let noise = NoiseModel::gaussian(0.5);

    let bad = SolverConfig::new(Algorithm::Seg, 2.0, 100_000, vec![1.0, 1.0], 114)
        .with_alpha(0.5)
        .with_allow_inadmissible(true);
    let outcome = run_fresh(&bad, &op, &noise).unwrap();
    let report = outcome
        .divergence()
        .expect("inadmissible step must diverge");
    assert!(report.iteration < 100_000);

    let seg_bound = max_step_size(Algorithm::Seg, &op.params).unwrap();
    let good = SolverConfig::new(Algorithm::Seg, 0.1, 100_000, vec![1.0, 1.0], 114).with_alpha(0.5);
    assert!(0.1 < seg_bound);
    let outcome = run_fresh(&good, &op, &noise).unwrap();
    assert!(
        outcome.divergence().is_none(),
        "admissible SEG step must not trip the guard"
    );
    budget(t0, 10, "criterion 11");
    println!(
        "ACCEPTANCE 11 PASS: divergence at iteration {} with gamma=2.0; none in 1e5 iterations at gamma=0.1",
        report.iteration
    );
}

#[test]
fn criterion_12_property_suites() {
    let _g = locked();
    let t0 = Instant::now();

    // Step-size gates reject gamma at and above the bounds.
    let lin = make_linear(1.0, 1);
    let noise = NoiseModel::gaussian(0.5);
    for gamma in [1.0, 1.3] {
        let cfg = SolverConfig::new(Algorithm::Sgda, gamma, 10, vec![1.0], 0);
        assert!(run_fresh(&cfg, &lin, &noise).is_err());
    }
    let seg_bound = max_step_size(Algorithm::Seg, &lin.params).unwrap();
    for gamma in [seg_bound, seg_bound * 1.5] {
        let cfg = SolverConfig::new(Algorithm::Seg, gamma, 10, vec![1.0], 0);
        assert!(run_fresh(&cfg, &lin, &noise).is_err());
    }
    assert!(run_fresh(
        &SolverConfig::new(Algorithm::Seg, seg_bound * 0.999, 10, vec![1.0], 0),
        &lin,
        &noise
    )
    .is_ok());

    // Fixed-point invariance of both steps under zero noise.
    let quiet = NoiseModel::gaussian(0.0);
    let zero2 = vec![0.0, 0.0];
    let mut oracle = StochasticOracle::new(
        make_linear(0.7, 2),
        quiet,
        StreamKey::new(1, 0, Phase::Main),
    );
    assert_eq!(sgda_step(&zero2, &mut oracle, 0.3).unwrap(), zero2);
    assert_eq!(seg_step(&zero2, &mut oracle, 0.3, 0.5).unwrap(), zero2);
    let logistic = make_logistic_game();
    let star = logistic.operator().solution().unwrap().to_vec();
    let mut oracle = StochasticOracle::new(
        logistic.operator().clone(),
        quiet,
        StreamKey::new(1, 0, Phase::Main),
    );
    let moved = sgda_step(&star, &mut oracle, 0.1).unwrap();
    assert!(dist_sq(&moved, &star).sqrt() < 1e-12);

    // Jensen chain of the moments on a real trajectory.
    let cfg = SolverConfig::new(Algorithm::Sgda, 0.1, 20_000, vec![1.0], 5).with_burn_in(1000);
    let traj = run_fresh(&cfg, &lin, &noise).unwrap().completed().unwrap();
    let m1 = moment_estimate(&traj, 1).unwrap();
    let m2 = moment_estimate(&traj, 2).unwrap();
    let m4 = moment_estimate(&traj, 4).unwrap();
    assert!(m1 * m1 <= m2 * (1.0 + 1e-12));
    assert!(m2 * m2 <= m4 * (1.0 + 1e-12));

    // Hand-coded gradients agree with finite differences on every game.
    let qq = make_quadratic_quartic_game(8, 3, 0.1).unwrap();
    for game in [&qq, &make_logistic_game(), &make_quasi_bilinear(0.3)] {
        let d = game.joint_dimension();
        for x in ball_probes(&vec![0.0; d], 2.0, 20, 6) {
            let err = gradient_consistency(game, &x, 1e-6);
            assert!(err < 1e-4, "{:?}: {}", game.operator().kind, err);
        }
    }

    // Bit-identical replicate values across repeated seeds and thread
    // counts.
    let game = make_quadratic_quartic_game(10, 3, 0.1).unwrap();
    let op = game.operator().clone();
    let f = TestFunction::GameValue { game: game.clone() };
    let cfg = SolverConfig::new(Algorithm::Sgda, 0.01, 500, vec![0.5; 20], 7)
        .with_burn_in(100)
        .with_record_stride(NO_STORE)
        .with_allow_inadmissible(true);
    let factory = oracle_factory(op.clone(), NoiseModel::gaussian(0.5), 7, Phase::Main);
    let pool1 = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let pool4 = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap();
    let a = pool1
        .install(|| clt_replicates(&cfg, &factory, &f, 64, 0.0))
        .unwrap();
    let b = pool4
        .install(|| clt_replicates(&cfg, &factory, &f, 64, 0.0))
        .unwrap();
    let c = clt_replicates(&cfg, &factory, &f, 64, 0.0).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
    // And a determinism check of a full chain object.
    let r1 = run(
        &cfg,
        &mut StochasticOracle::new(
            op.clone(),
            NoiseModel::gaussian(0.5),
            StreamKey::new(7, 0, Phase::Main),
        ),
    )
    .unwrap();
    let r2 = run(
        &cfg,
        &mut StochasticOracle::new(
            op,
            NoiseModel::gaussian(0.5),
            StreamKey::new(7, 0, Phase::Main),
        ),
    )
    .unwrap();
    assert_eq!(r1, r2);

    budget(t0, 120, "criterion 12");
    println!("ACCEPTANCE 12 PASS: gates, fixed points, moment inequalities, gradient checks, and bit-level reproducibility hold");
}
