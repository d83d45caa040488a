//! Richardson-Romberg extrapolation over paired runs at step sizes `gamma`
//! and `2 gamma`: the stationary mean is `x* + gamma D + O(gamma^2)`, so
//! `2 xbar_gamma - xbar_2gamma` cancels the first-order bias term.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::dist_sq;
use crate::operators::OperatorSpec;
use crate::oracle::{NoiseModel, Phase, StochasticOracle, StreamKey};
use crate::solvers::{run, Algorithm, SolverConfig};

/// How the `gamma` and `2 gamma` chains share randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coupling {
    /// Chains use independent stream splits (the experiment as described).
    Independent,
    /// Both chains consume the same noise realizations, as a
    /// variance-reduction option.
    CommonRandomNumbers,
}

/// Squared errors of the three averaged points, when `x*` is known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RrErrors {
    pub err_gamma: f64,
    pub err_2gamma: f64,
    pub err_rr: f64,
}

/// Output of one refinement pair.
#[derive(Debug, Clone, PartialEq)]
pub struct RrResult {
    pub xbar_gamma: Vec<f64>,
    pub xbar_2gamma: Vec<f64>,
    /// `2 xbar_gamma - xbar_2gamma`.
    pub rr_point: Vec<f64>,
    pub errors: Option<RrErrors>,
}

fn doubled_config(base: &SolverConfig) -> SolverConfig {
    let mut cfg = base.clone();
    cfg.gamma = 2.0 * base.gamma;
    cfg
}

fn check_rr_preconditions(base: &SolverConfig, op: &OperatorSpec) -> Result<()> {
    if base.algorithm != Algorithm::Sgda {
        return Err(Error::Unsupported(
            "Richardson-Romberg refinement is defined for SGDA; the SEG expansion is open".into(),
        ));
    }
    base.validate(op)?;
    doubled_config(base).validate(op)?;
    Ok(())
}

/// Runs one `(gamma, 2 gamma)` pair with the given coupling and stream
/// index, and extrapolates the averaged iterates.
pub fn rr_refine_pair(
    base: &SolverConfig,
    op: &OperatorSpec,
    noise: &NoiseModel,
    coupling: Coupling,
    pair_index: u64,
) -> Result<RrResult> {
    check_rr_preconditions(base, op)?;
    let key_gamma = StreamKey::new(base.seed, pair_index, Phase::Main);
    let key_double = match coupling {
        Coupling::CommonRandomNumbers => key_gamma,
        Coupling::Independent => StreamKey::new(base.seed, pair_index, Phase::Pair),
    };
    let mut oracle_a = StochasticOracle::new(op.clone(), *noise, key_gamma);
    let mut oracle_b = StochasticOracle::new(op.clone(), *noise, key_double);
    let traj_a = run(base, &mut oracle_a)?.completed()?;
    let traj_b = run(&doubled_config(base), &mut oracle_b)?.completed()?;

    let xbar_gamma = traj_a.cesaro_vector()?;
    let xbar_2gamma = traj_b.cesaro_vector()?;
    let rr_point: Vec<f64> = xbar_gamma
        .iter()
        .zip(&xbar_2gamma)
        .map(|(a, b)| 2.0 * a - b)
        .collect();
    let errors = op.solution.as_ref().map(|star| RrErrors {
        err_gamma: dist_sq(&xbar_gamma, star),
        err_2gamma: dist_sq(&xbar_2gamma, star),
        err_rr: dist_sq(&rr_point, star),
    });
    Ok(RrResult {
        xbar_gamma,
        xbar_2gamma,
        rr_point,
        errors,
    })
}

/// One refinement pair on the default stream (pair index 0).
pub fn rr_refine_run(
    base: &SolverConfig,
    op: &OperatorSpec,
    noise: &NoiseModel,
    coupling: Coupling,
) -> Result<RrResult> {
    rr_refine_pair(base, op, noise, coupling, 0)
}

/// Runs `n_reps` independent refinement pairs concurrently; results are
/// ordered by pair index.
pub fn rr_replicates(
    base: &SolverConfig,
    op: &OperatorSpec,
    noise: &NoiseModel,
    coupling: Coupling,
    n_reps: usize,
) -> Result<Vec<RrResult>> {
    if n_reps < 1 {
        return Err(Error::Precondition(
            "rr_replicates needs n_reps >= 1".into(),
        ));
    }
    check_rr_preconditions(base, op)?;
    (0..n_reps as u64)
        .into_par_iter()
        .map(|pair| rr_refine_pair(base, op, noise, coupling, pair))
        .collect()
}

/// Replicate means and standard errors of the squared errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RrSummary {
    pub n: usize,
    pub mean_err_gamma: f64,
    pub se_err_gamma: f64,
    pub mean_err_2gamma: f64,
    pub se_err_2gamma: f64,
    pub mean_err_rr: f64,
    pub se_err_rr: f64,
}

pub fn summarize(results: &[RrResult]) -> Result<RrSummary> {
    let errs: Vec<&RrErrors> = results
        .iter()
        .map(|r| r.errors.as_ref().ok_or(Error::MissingSolution))
        .collect::<Result<_>>()?;
    let n = errs.len();
    if n < 2 {
        return Err(Error::Precondition(
            "summarize needs at least 2 replicates".into(),
        ));
    }
    let mean_se = |f: &dyn Fn(&RrErrors) -> f64| {
        let mean = errs.iter().map(|e| f(e)).sum::<f64>() / n as f64;
        let var = errs.iter().map(|e| (f(e) - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        (mean, (var / n as f64).sqrt())
    };
    let (mean_err_gamma, se_err_gamma) = mean_se(&|e: &RrErrors| e.err_gamma);
    let (mean_err_2gamma, se_err_2gamma) = mean_se(&|e: &RrErrors| e.err_2gamma);
    let (mean_err_rr, se_err_rr) = mean_se(&|e: &RrErrors| e.err_rr);
    Ok(RrSummary {
        n,
        mean_err_gamma,
        se_err_gamma,
        mean_err_2gamma,
        se_err_2gamma,
        mean_err_rr,
        se_err_rr,
    })
}

/// Replicated bias measurement at one step size.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasPoint {
    pub gamma: f64,
    /// Replicate mean of the Cesaro averages, minus `x*`.
    pub bias_vector: Vec<f64>,
    pub bias_norm: f64,
    /// 3-sigma half-width: per-coordinate standard errors over replicates,
    /// scaled by 3 and combined as a norm.
    pub ci_halfwidth: f64,
    pub n_reps: usize,
}

/// Estimates the stationary bias `||E_pi[x] - x*||` at each step size from
/// `n_reps` replicate chains. Arms share stream keys, so the comparison
/// across step sizes is variance-reduced.
pub fn bias_slope_probe(
    base: &SolverConfig,
    op: &OperatorSpec,
    noise: &NoiseModel,
    gammas: &[f64],
    n_reps: usize,
) -> Result<Vec<BiasPoint>> {
    let x_star = op.solution()?.to_vec();
    if n_reps < 2 {
        return Err(Error::Precondition(
            "bias_slope_probe needs n_reps >= 2".into(),
        ));
    }
    let d = op.dimension;
    gammas
        .iter()
        .map(|&gamma| {
            let mut cfg = base.clone();
            cfg.gamma = gamma;
            cfg.validate(op)?;
            let xbars: Vec<Vec<f64>> = (0..n_reps as u64)
                .into_par_iter()
                .map(|rep| {
                    let mut oracle = StochasticOracle::new(
                        op.clone(),
                        *noise,
                        StreamKey::new(cfg.seed, rep, Phase::Main),
                    );
                    run(&cfg, &mut oracle)?.completed()?.cesaro_vector()
                })
                .collect::<Result<_>>()?;
            let nf = n_reps as f64;
            let mut mean = vec![0.0; d];
            for xb in &xbars {
                for (m, v) in mean.iter_mut().zip(xb) {
                    *m += v / nf;
                }
            }
            let mut hw_sq = 0.0;
            for i in 0..d {
                let var = xbars
                    .iter()
                    .map(|xb| (xb[i] - mean[i]).powi(2))
                    .sum::<f64>()
                    / (nf - 1.0);
                let hw = 3.0 * (var / nf).sqrt();
                hw_sq += hw * hw;
            }
            let bias_vector: Vec<f64> = mean.iter().zip(&x_star).map(|(m, s)| m - s).collect();
            let bias_norm = bias_vector.iter().map(|b| b * b).sum::<f64>().sqrt();
            Ok(BiasPoint {
                gamma,
                bias_vector,
                bias_norm,
                ci_halfwidth: hw_sq.sqrt(),
                n_reps,
            })
        })
        .collect()
}
