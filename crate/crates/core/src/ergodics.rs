//! Ergodic-average machinery: Cesaro means of test functions along a chain,
//! batch-means long-run variance estimation, and the replicate harness used
//! to examine asymptotic normality of the averaged iterates.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::dist_sq;
use crate::operators::GameSpec;
use crate::oracle::StochasticOracle;
use crate::solvers::{run_with_observer, SolverConfig, Trajectory};

type ScalarFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A scalar test function of the iterate, with an optional declared linear
/// growth constant `G_l` such that `|l(x)| <= G_l (1 + ||x||)`.
#[derive(Clone)]
pub enum TestFunction {
    /// `l(x) = x_i`.
    Coordinate(usize),
    /// `l(x) = ||x - x*||^2`.
    SquaredError { x_star: Vec<f64> },
    /// `l(x) = f(x1, x2)`, the payoff of a game at the joint iterate.
    GameValue { game: GameSpec },
    Custom {
        f: Arc<ScalarFn>,
        growth_constant: Option<f64>,
    },
}

impl TestFunction {
    pub fn custom(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        TestFunction::Custom {
            f: Arc::new(f),
            growth_constant: None,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            TestFunction::Coordinate(i) => x[*i],
            TestFunction::SquaredError { x_star } => dist_sq(x, x_star),
            TestFunction::GameValue { game } => game.value(x),
            TestFunction::Custom { f, .. } => f(x),
        }
    }

    pub fn growth_constant(&self) -> Option<f64> {
        match self {
            TestFunction::Coordinate(_) => Some(1.0),
            TestFunction::Custom {
                growth_constant, ..
            } => *growth_constant,
            _ => None,
        }
    }
}

impl std::fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TestFunction::Coordinate(i) => write!(f, "Coordinate({})", i),
            TestFunction::SquaredError { .. } => write!(f, "SquaredError"),
            TestFunction::GameValue { .. } => write!(f, "GameValue"),
            TestFunction::Custom { .. } => write!(f, "Custom"),
        }
    }
}

/// Ergodic summary of one chain for one test function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErgodicReport {
    /// Post-burn-in Cesaro mean `S_N(l) / N`.
    pub cesaro: f64,
    /// Batch-means estimate of the long-run (CLT) variance.
    pub long_run_variance: f64,
    /// Post-burn-in sample count.
    pub n_effective: u64,
}

/// Post-burn-in Cesaro mean of a test function along a trajectory.
///
/// Coordinate and squared-error functions use the exact online accumulators
/// and therefore work at any `record_stride`; other kinds need
/// `record_stride = 1` so the stored iterates are the full chain.
pub fn cesaro_mean(traj: &Trajectory, f: &TestFunction) -> Result<f64> {
    if traj.running.count == 0 {
        return Err(Error::Precondition(
            "trajectory has no post-burn-in iterates".into(),
        ));
    }
    let n = traj.running.count as f64;
    match f {
        TestFunction::Coordinate(i) => {
            if *i >= traj.running.cesaro_sum.len() {
                return Err(Error::DimensionMismatch {
                    expected: traj.running.cesaro_sum.len(),
                    got: *i,
                });
            }
            Ok(traj.running.cesaro_sum[*i] / n)
        }
        TestFunction::SquaredError { .. } => match traj.running.sq_err_sum {
            Some(sum) => Ok(sum / n),
            None => average_over_iterates(traj, f),
        },
        _ => average_over_iterates(traj, f),
    }
}

fn average_over_iterates(traj: &Trajectory, f: &TestFunction) -> Result<f64> {
    if traj.config.record_stride != 1 {
        return Err(Error::Precondition(
            "this test function needs record_stride = 1 (stored iterates are thinned)".into(),
        ));
    }
    let n = traj.iterates.len();
    if n == 0 {
        return Err(Error::Precondition(
            "trajectory has no stored iterates".into(),
        ));
    }
    Ok(traj.iterates.iter().map(|x| f.eval(x)).sum::<f64>() / n as f64)
}

/// Batch-means estimate of the long-run variance
/// `sigma^2 = lim (1/N) E[S_N^2]` of a stationary series: split into
/// `n_batches` contiguous batches of length `b = floor(N / n_batches)` and
/// return `b` times the sample variance of the batch means. Samples past
/// `n_batches * b` are dropped, so the estimate is exactly
/// reversal-invariant when `n_batches` divides the sample count.
pub fn batch_means_variance(samples: &[f64], n_batches: usize) -> Result<f64> {
    if n_batches < 2 {
        return Err(Error::Precondition(
            "batch means needs n_batches >= 2".into(),
        ));
    }
    if samples.len() < 2 * n_batches {
        return Err(Error::Precondition(format!(
            "batch means needs at least {} samples, got {}",
            2 * n_batches,
            samples.len()
        )));
    }
    let b = samples.len() / n_batches;
    let means: Vec<f64> = (0..n_batches)
        .map(|k| samples[k * b..(k + 1) * b].iter().sum::<f64>() / b as f64)
        .collect();
    let grand = means.iter().sum::<f64>() / n_batches as f64;
    let var = means.iter().map(|m| (m - grand) * (m - grand)).sum::<f64>() / (n_batches - 1) as f64;
    Ok(b as f64 * var)
}

/// Default batch count `floor(sqrt(N))`, the standard rate-optimal choice.
pub fn default_batch_count(n: usize) -> usize {
    ((n as f64).sqrt().floor() as usize).max(2)
}

/// Full ergodic report for a trajectory: Cesaro mean plus a batch-means
/// long-run variance over the stored series (needs `record_stride = 1`).
pub fn ergodic_report(traj: &Trajectory, f: &TestFunction) -> Result<ErgodicReport> {
    let cesaro = cesaro_mean(traj, f)?;
    if traj.config.record_stride != 1 {
        return Err(Error::Precondition(
            "ergodic_report needs record_stride = 1 for the variance estimate".into(),
        ));
    }
    let series: Vec<f64> = traj.iterates.iter().map(|x| f.eval(x)).collect();
    let long_run_variance = batch_means_variance(&series, default_batch_count(series.len()))?;
    Ok(ErgodicReport {
        cesaro,
        long_run_variance,
        n_effective: traj.running.count,
    })
}

/// Runs `n_reps` independent chains (one stream split per replicate) and
/// returns the normalized sums `N^{-1/2} sum_t (f(x_t) - center)` over the
/// post-burn-in window of each.
///
/// Pass `center = 0` for uncentered histograms, or the
/// estimated stationary mean for the CLT statistic proper.
pub fn clt_replicates(
    config: &SolverConfig,
    factory: &(dyn Fn(u64) -> StochasticOracle + Sync),
    f: &TestFunction,
    n_reps: usize,
    center: f64,
) -> Result<Vec<f64>> {
    if n_reps < 1 {
        return Err(Error::Precondition(
            "clt_replicates needs n_reps >= 1".into(),
        ));
    }
    let n = (config.horizon - config.burn_in) as f64;
    (0..n_reps as u64)
        .into_par_iter()
        .map(|rep| {
            let mut oracle = factory(rep);
            let mut sum = 0.0;
            let burn_in = config.burn_in;
            let outcome = run_with_observer(config, &mut oracle, |t, x| {
                if t > burn_in {
                    sum += f.eval(x) - center;
                }
            })?;
            outcome.completed()?;
            Ok(sum / n.sqrt())
        })
        .collect()
}

/// Single chain, Cesaro value of `f` recorded at each post-burn-in
/// checkpoint.
pub fn lln_probe(
    config: &SolverConfig,
    oracle: &mut StochasticOracle,
    f: &TestFunction,
    checkpoints: &[u64],
) -> Result<Vec<(u64, f64)>> {
    let n_max = config.horizon - config.burn_in;
    for w in checkpoints.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Precondition(
                "checkpoints must be strictly increasing".into(),
            ));
        }
    }
    if checkpoints.iter().any(|&c| c == 0 || c > n_max) {
        return Err(Error::Precondition(format!(
            "checkpoints must lie in [1, {}]",
            n_max
        )));
    }
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut sum = 0.0;
    let mut next = 0usize;
    let burn_in = config.burn_in;
    let outcome = run_with_observer(config, oracle, |t, x| {
        if t > burn_in {
            let k = t - burn_in;
            sum += f.eval(x);
            if next < checkpoints.len() && k == checkpoints[next] {
                out.push((k, sum / k as f64));
                next += 1;
            }
        }
    })?;
    outcome.completed()?;
    Ok(out)
}

/// Moment summary of a replicate sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleStats {
    pub n: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

pub fn sample_stats(xs: &[f64]) -> SampleStats {
    let n = xs.len();
    assert!(n >= 2, "sample_stats needs at least two values");
    let nf = n as f64;
    let mean = xs.iter().sum::<f64>() / nf;
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for x in xs {
        let d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    SampleStats {
        n,
        mean,
        variance: m2 * nf / (nf - 1.0),
        skewness: m3 / m2.powf(1.5),
        excess_kurtosis: m4 / (m2 * m2) - 3.0,
    }
}
