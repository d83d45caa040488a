//! Stationary-regime diagnostics: the restricted merit gap, stationary
//! bias and moments, the one-step drift inequality, plus the closed-form
//! scalar-linear oracles used as ground truth in tests.

use crate::ergodics::{batch_means_variance, default_batch_count};
use crate::error::{Error, Result};
use crate::linalg::{dist_sq, dot, norm_sq};
use crate::operators::OperatorSpec;
use crate::oracle::{NoiseModel, Phase, StochasticOracle, StreamKey};
use crate::solvers::{
    convergence_envelope, run_with_observer, Algorithm, SolverConfig, Trajectory,
};

/// Restricted merit value `<F(x), x - x*>` at a point. The solution set is
/// represented by the single recorded `x*`, so the supremum degenerates to
/// one inner product.
pub fn restricted_gap(op: &OperatorSpec, x: &[f64]) -> Result<f64> {
    let x_star = op.solution()?;
    let f = op.evaluate(x)?;
    let diff: Vec<f64> = x.iter().zip(x_star).map(|(a, b)| a - b).collect();
    Ok(dot(&f, &diff))
}

/// Stationary-mean bias estimate from one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasEstimate {
    /// Cesaro iterate average minus `x*`.
    pub bias_vector: Vec<f64>,
    pub bias_norm: f64,
    /// 3-sigma half-width: per-coordinate batch-means standard errors scaled
    /// by 3 and combined as a norm.
    pub ci_halfwidth: f64,
}

/// Bias of the Cesaro iterate average relative to `x*`, with a batch-means
/// confidence half-width. Needs `record_stride = 1` and at least 100
/// post-burn-in iterates.
pub fn bias_estimate(traj: &Trajectory) -> Result<BiasEstimate> {
    let x_star = traj.solution.as_ref().ok_or(Error::MissingSolution)?;
    if traj.running.count < 100 {
        return Err(Error::Precondition(
            "bias_estimate needs at least 100 post-burn-in iterates".into(),
        ));
    }
    if traj.config.record_stride != 1 {
        return Err(Error::Precondition(
            "bias_estimate needs record_stride = 1 for the per-coordinate series".into(),
        ));
    }
    let cesaro = traj.cesaro_vector()?;
    let bias_vector: Vec<f64> = cesaro.iter().zip(x_star).map(|(c, s)| c - s).collect();
    let n = traj.iterates.len();
    let k = default_batch_count(n);
    let mut hw_sq = 0.0;
    let mut series = vec![0.0; n];
    for i in 0..x_star.len() {
        for (s, x) in series.iter_mut().zip(&traj.iterates) {
            *s = x[i];
        }
        let lrv = batch_means_variance(&series, k)?;
        let hw = 3.0 * (lrv / n as f64).sqrt();
        hw_sq += hw * hw;
    }
    Ok(BiasEstimate {
        bias_norm: norm_sq(&bias_vector).sqrt(),
        bias_vector,
        ci_halfwidth: hw_sq.sqrt(),
    })
}

/// Monte-Carlo estimate of `Mom(k) = E||x - x*||^k` over the post-burn-in
/// iterates. `k = 2` uses the exact online accumulator; `k` in {1, 3, 4}
/// need `record_stride = 1`.
pub fn moment_estimate(traj: &Trajectory, k: u32) -> Result<f64> {
    let x_star = traj.solution.as_ref().ok_or(Error::MissingSolution)?;
    if !(1..=4).contains(&k) {
        return Err(Error::Precondition(
            "moment_estimate supports k in 1..=4".into(),
        ));
    }
    if k == 2 {
        return traj.mean_sq_err();
    }
    if traj.config.record_stride != 1 {
        return Err(Error::Precondition(
            "moment_estimate with k != 2 needs record_stride = 1".into(),
        ));
    }
    if traj.iterates.is_empty() {
        return Err(Error::Precondition(
            "trajectory has no stored iterates".into(),
        ));
    }
    let sum: f64 = traj
        .iterates
        .iter()
        .map(|x| dist_sq(x, x_star).sqrt().powi(k as i32))
        .sum();
    Ok(sum / traj.iterates.len() as f64)
}

/// One probe of the one-step quasi-descent inequality
/// `E[V(x+) | x] <= (1 - c1) V(x) + c1 (1 + c2)` with `V(x) = ||x-x*||^2 + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftProbe {
    pub x: Vec<f64>,
    /// Monte-Carlo estimate of `E[V(x+)]`.
    pub lhs_estimate: f64,
    /// `(1 - c1) V(x) + c1 (1 + c2)`.
    pub rhs_bound: f64,
    /// `(rhs - lhs) / SE(lhs)`; +inf when the estimate is exact.
    pub margin_sigmas: f64,
}

/// Monte-Carlo check of the drift inequality at each probe point, using
/// `mc_samples` one-step draws per probe. The step size must be admissible
/// (the envelope constants are only defined below the gate).
pub fn drift_check(
    op: &OperatorSpec,
    noise: &NoiseModel,
    config: &SolverConfig,
    probes: &[Vec<f64>],
    mc_samples: usize,
) -> Result<Vec<DriftProbe>> {
    let x_star = op.solution()?.to_vec();
    if mc_samples < 100 {
        return Err(Error::Precondition(
            "drift_check needs mc_samples >= 100".into(),
        ));
    }
    let sigma2 = noise.second_moment_bound(op.dimension);
    let env = convergence_envelope(
        config.algorithm,
        &op.params,
        config.gamma,
        config.alpha,
        sigma2,
    )?;
    let multiplier = env.drift_multiplier();
    let offset = env.drift_offset();

    let mut out = Vec::with_capacity(probes.len());
    for (idx, x) in probes.iter().enumerate() {
        if x.len() != op.dimension {
            return Err(Error::DimensionMismatch {
                expected: op.dimension,
                got: x.len(),
            });
        }
        let mut oracle = StochasticOracle::new(
            op.clone(),
            *noise,
            StreamKey::new(config.seed, idx as u64, Phase::Probe),
        );
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        let mut y = vec![0.0; op.dimension];
        let mut half = vec![0.0; op.dimension];
        let mut buf = vec![0.0; op.dimension];
        for _ in 0..mc_samples {
            match config.algorithm {
                Algorithm::Sgda => {
                    oracle.sample_into(x, &mut buf)?;
                    for ((yi, xi), b) in y.iter_mut().zip(x).zip(&buf) {
                        *yi = xi - config.gamma * b;
                    }
                }
                Algorithm::Seg => {
                    oracle.sample_into(x, &mut buf)?;
                    for ((h, xi), b) in half.iter_mut().zip(x).zip(&buf) {
                        *h = xi - config.gamma * b;
                    }
                    oracle.sample_into(&half, &mut buf)?;
                    for ((yi, xi), b) in y.iter_mut().zip(x).zip(&buf) {
                        *yi = xi - config.alpha * config.gamma * b;
                    }
                }
            }
            let v = dist_sq(&y, &x_star) + 1.0;
            sum += v;
            sum_sq += v * v;
        }
        let m = mc_samples as f64;
        let lhs = sum / m;
        let var = (sum_sq / m - lhs * lhs).max(0.0);
        let se = (var / m).sqrt();
        let vx = dist_sq(x, &x_star) + 1.0;
        let rhs = multiplier * vx + offset;
        let margin_sigmas = if se > 0.0 {
            (rhs - lhs) / se
        } else if rhs >= lhs {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        };
        out.push(DriftProbe {
            x: x.clone(),
            lhs_estimate: lhs,
            rhs_bound: rhs,
            margin_sigmas,
        });
    }
    Ok(out)
}

/// Exact stationary variance of the scalar linear chain `F(x) = mu x`.
///
/// SGDA: `v = g^2 s^2 / (1 - (1 - g mu)^2) = g s^2 / (mu (2 - g mu))`.
/// SEG: `rho = 1 - a g mu (1 - g mu)`,
/// `v = a^2 g^2 s^2 (1 + g^2 mu^2) / (1 - rho^2)`.
pub fn analytic_stationary_variance_linear(
    algorithm: Algorithm,
    mu: f64,
    sigma: f64,
    gamma: f64,
    alpha: f64,
) -> Result<f64> {
    match algorithm {
        Algorithm::Sgda => {
            let rho = 1.0 - gamma * mu;
            if rho.abs() >= 1.0 {
                return Err(Error::Domain(format!(
                    "SGDA contraction factor |{}| >= 1",
                    rho
                )));
            }
            Ok(gamma * gamma * sigma * sigma / (1.0 - rho * rho))
        }
        Algorithm::Seg => {
            let rho = 1.0 - alpha * gamma * mu * (1.0 - gamma * mu);
            if rho.abs() >= 1.0 {
                return Err(Error::Domain(format!(
                    "SEG contraction factor |{}| >= 1",
                    rho
                )));
            }
            let num =
                alpha * alpha * gamma * gamma * sigma * sigma * (1.0 + gamma * gamma * mu * mu);
            Ok(num / (1.0 - rho * rho))
        }
    }
}

/// Steady-state mean squared error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MseEstimate {
    pub mse: f64,
    /// 3-sigma batch-means half-width.
    pub ci_halfwidth: f64,
    /// Number of tail samples averaged.
    pub n_tail: u64,
}

/// Averages `||x_t - x*||^2` over the final `tail_fraction` of the horizon.
pub fn steady_state_mse(
    config: &SolverConfig,
    oracle: &mut StochasticOracle,
    tail_fraction: f64,
) -> Result<MseEstimate> {
    if !(tail_fraction > 0.0 && tail_fraction <= 0.5) {
        return Err(Error::Precondition(
            "tail_fraction must lie in (0, 0.5]".into(),
        ));
    }
    let x_star = oracle.operator().solution()?.to_vec();
    let tail = ((config.horizon as f64) * tail_fraction).floor().max(1.0) as u64;
    let start = config.horizon - tail + 1;
    let mut series = Vec::with_capacity(tail as usize);
    let outcome = run_with_observer(config, oracle, |t, x| {
        if t >= start {
            series.push(dist_sq(x, &x_star));
        }
    })?;
    outcome.completed()?;
    let n = series.len();
    let mse = series.iter().sum::<f64>() / n as f64;
    let ci_halfwidth = if n >= 4 {
        let lrv = batch_means_variance(&series, default_batch_count(n))?;
        3.0 * (lrv / n as f64).sqrt()
    } else {
        f64::INFINITY
    };
    Ok(MseEstimate {
        mse,
        ci_halfwidth,
        n_tail: n as u64,
    })
}

/// Average restricted gap over the post-burn-in chain, with a batch-means
/// half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapEstimate {
    pub avg_gap: f64,
    pub ci_halfwidth: f64,
}

/// Runs the configured chain and averages `<F(x_t), x_t - x*>` over the
/// post-burn-in iterates.
pub fn stationary_gap(config: &SolverConfig, oracle: &mut StochasticOracle) -> Result<GapEstimate> {
    let op = oracle.operator().clone();
    let x_star = op.solution()?.to_vec();
    let mut series = Vec::new();
    let burn_in = config.burn_in;
    let mut f = vec![0.0; op.dimension];
    let outcome = run_with_observer(config, oracle, |t, x| {
        if t > burn_in {
            op.eval_into(x, &mut f).expect("dimension fixed by the run");
            let gap: f64 = f
                .iter()
                .zip(x.iter().zip(&x_star))
                .map(|(fi, (xi, si))| fi * (xi - si))
                .sum();
            series.push(gap);
        }
    })?;
    outcome.completed()?;
    let n = series.len();
    if n == 0 {
        return Err(Error::Precondition("no post-burn-in samples".into()));
    }
    let avg = series.iter().sum::<f64>() / n as f64;
    let ci = if n >= 4 {
        let lrv = batch_means_variance(&series, default_batch_count(n))?;
        3.0 * (lrv / n as f64).sqrt()
    } else {
        f64::INFINITY
    };
    Ok(GapEstimate {
        avg_gap: avg,
        ci_halfwidth: ci,
    })
}
