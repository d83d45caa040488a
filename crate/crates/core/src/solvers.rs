//! The two constant step-size Markov-chain update rules (SGDA and double
//! step-size SEG), their step-size admissibility gates, and the closed-form
//! convergence envelopes.

use crate::error::{Error, Result};
use crate::linalg::{axpy, dist_sq, norm_sq};
use crate::operators::{OperatorParams, OperatorSpec};
use crate::oracle::{NoiseModel, Phase, StochasticOracle, StreamKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Sgda,
    Seg,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Sgda => "SGDA",
            Algorithm::Seg => "SEG",
        }
    }
}

/// Default norm threshold above which a chain is declared divergent.
pub const DIVERGENCE_GUARD: f64 = 1e12;

/// Everything needed to run one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    /// Constant step size gamma.
    pub gamma: f64,
    /// Extrapolated-step scaling for SEG; ignored by SGDA.
    pub alpha: f64,
    /// Total iterations T.
    pub horizon: u64,
    /// Iterations discarded before ergodic statistics; must be < horizon.
    pub burn_in: u64,
    /// Thinning for stored iterates; the online accumulators are unaffected.
    pub record_stride: u64,
    pub x0: Vec<f64>,
    pub seed: u64,
    /// Skip the step-size admissibility gate (needed to reproduce the
    /// divergence experiment and the large-step sweeps).
    pub allow_inadmissible: bool,
    pub divergence_guard: f64,
}

impl SolverConfig {
    pub fn new(algorithm: Algorithm, gamma: f64, horizon: u64, x0: Vec<f64>, seed: u64) -> Self {
        SolverConfig {
            algorithm,
            gamma,
            alpha: 0.5,
            horizon,
            burn_in: 0,
            record_stride: 1,
            x0,
            seed,
            allow_inadmissible: false,
            divergence_guard: DIVERGENCE_GUARD,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_burn_in(mut self, burn_in: u64) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn with_record_stride(mut self, stride: u64) -> Self {
        self.record_stride = stride;
        self
    }

    pub fn with_allow_inadmissible(mut self, allow: bool) -> Self {
        self.allow_inadmissible = allow;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Default burn-in: max(10^3, T/100), capped below the horizon.
    pub fn default_burn_in(horizon: u64) -> u64 {
        1000u64.max(horizon / 100).min(horizon.saturating_sub(1))
    }

    /// Checks shape and range requirements that hold regardless of the
    /// operator.
    pub fn validate_structural(&self) -> Result<()> {
        if !self.gamma.is_finite() || self.gamma <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "gamma must be positive and finite, got {}",
                self.gamma
            )));
        }
        if self.horizon == 0 {
            return Err(Error::InvalidConfig("horizon must be at least 1".into()));
        }
        if self.burn_in >= self.horizon {
            return Err(Error::InvalidConfig(format!(
                "burn_in ({}) must be smaller than horizon ({})",
                self.burn_in, self.horizon
            )));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidConfig(
                "record_stride must be at least 1".into(),
            ));
        }
        if self.algorithm == Algorithm::Seg {
            let open_ok = self.alpha > 0.0 && self.alpha < 1.0;
            // alpha = 1 (classical EG) has no contraction constant here and
            // is allowed only under the override flag.
            let eg_ok = self.allow_inadmissible && self.alpha == 1.0;
            if !(open_ok || eg_ok) {
                return Err(Error::InvalidConfig(format!(
                    "SEG needs alpha in (0,1), got {}",
                    self.alpha
                )));
            }
        }
        if self.divergence_guard.is_nan() || self.divergence_guard <= 0.0 {
            return Err(Error::InvalidConfig(
                "divergence_guard must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Structural checks plus the step-size admissibility gate for the given
    /// operator (the gate is skipped under `allow_inadmissible`).
    pub fn validate(&self, op: &OperatorSpec) -> Result<()> {
        self.validate_structural()?;
        if self.x0.len() != op.dimension {
            return Err(Error::DimensionMismatch {
                expected: op.dimension,
                got: self.x0.len(),
            });
        }
        if !self.allow_inadmissible {
            let bound = max_step_size(self.algorithm, &op.params)?;
            if self.gamma >= bound {
                return Err(Error::InadmissibleStepSize {
                    algorithm: self.algorithm.as_str(),
                    gamma: self.gamma,
                    bound,
                });
            }
        }
        Ok(())
    }
}

/// Strict upper bound on admissible step sizes: `mu / G^2` for SGDA and
/// `1 / (2 mu + sqrt(3) L)` for SEG.
pub fn max_step_size(algorithm: Algorithm, params: &OperatorParams) -> Result<f64> {
    match algorithm {
        Algorithm::Sgda => {
            let g = params.growth.ok_or(Error::MissingParameter("growth"))?;
            if g.is_nan() || g <= 0.0 {
                return Err(Error::InvalidConfig(
                    "growth constant must be positive".into(),
                ));
            }
            Ok(params.mu / (g * g))
        }
        Algorithm::Seg => {
            let l = params
                .lipschitz
                .ok_or(Error::MissingParameter("lipschitz"))?;
            if l.is_nan() || l <= 0.0 {
                return Err(Error::InvalidConfig(
                    "Lipschitz constant must be positive".into(),
                ));
            }
            Ok(1.0 / (2.0 * params.mu + 3.0f64.sqrt() * l))
        }
    }
}

/// Constants `(c1, c2)` of the geometric envelope
/// `E||x_t - x*||^2 <= (1 - c1)^t ||x0 - x*||^2 + c2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceEnvelope {
    pub c1: f64,
    pub c2: f64,
}

impl ConvergenceEnvelope {
    /// The envelope evaluated after `t` steps.
    pub fn bound_at(&self, t: u64, initial_sq_err: f64) -> f64 {
        (1.0 - self.c1).powi(t as i32) * initial_sq_err + self.c2
    }

    /// Multiplier of the one-step quasi-descent inequality on
    /// `V(x) = ||x - x*||^2 + 1`.
    pub fn drift_multiplier(&self) -> f64 {
        1.0 - self.c1
    }

    /// Offset of the one-step quasi-descent inequality:
    /// `E[V(x+) | x] <= (1 - c1) V(x) + c1 (1 + c2)`.
    pub fn drift_offset(&self) -> f64 {
        self.c1 * (1.0 + self.c2)
    }
}

/// Closed-form envelope constants.
///
/// SGDA: `c1 = 2 mu g - 2 g^2 G^2`,
/// `c2 = (2 lambda g + 2 g^2 G^2 (1+R)^2 + g^2 sigma_b^2) / c1`.
/// SEG: `c1 = alpha (1-alpha) g mu`,
/// `c2 = 2 alpha (3 g^2 sigma_b^2 + g lambda) / c1`.
/// `sigma2` is the total noise second moment `sigma_b^2 = E||Z||^2`.
pub fn convergence_envelope(
    algorithm: Algorithm,
    params: &OperatorParams,
    gamma: f64,
    alpha: f64,
    sigma2: f64,
) -> Result<ConvergenceEnvelope> {
    let bound = max_step_size(algorithm, params)?;
    if !(gamma > 0.0 && gamma < bound) {
        return Err(Error::InadmissibleStepSize {
            algorithm: algorithm.as_str(),
            gamma,
            bound,
        });
    }
    let (c1, offset) = match algorithm {
        Algorithm::Sgda => {
            let g2 = params.growth.unwrap().powi(2);
            let c1 = 2.0 * params.mu * gamma - 2.0 * gamma * gamma * g2;
            let r1 = 1.0 + params.radius_bound;
            let offset = 2.0 * params.lambda * gamma
                + 2.0 * gamma * gamma * g2 * r1 * r1
                + gamma * gamma * sigma2;
            (c1, offset)
        }
        Algorithm::Seg => {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "SEG envelope needs alpha in (0,1), got {}",
                    alpha
                )));
            }
            let c1 = alpha * (1.0 - alpha) * gamma * params.mu;
            let offset = 2.0 * alpha * (3.0 * gamma * gamma * sigma2 + gamma * params.lambda);
            (c1, offset)
        }
    };
    if !(c1 > 0.0 && c1 < 1.0) {
        return Err(Error::Domain(format!(
            "envelope contraction constant c1 = {} is outside (0,1)",
            c1
        )));
    }
    Ok(ConvergenceEnvelope {
        c1,
        c2: offset / c1,
    })
}

/// One SGDA update `x - gamma * (F(x) + Z)`; consumes one oracle query.
pub fn sgda_step(x: &[f64], oracle: &mut StochasticOracle, gamma: f64) -> Result<Vec<f64>> {
    let mut sample = oracle.sample(x)?;
    for (s, xi) in sample.iter_mut().zip(x) {
        *s = xi - gamma * *s;
    }
    Ok(sample)
}

/// One double step-size SEG update: look-ahead `x_half = x - gamma (F(x)+Z)`
/// then `x - alpha gamma (F(x_half)+Z')`. Consumes two oracle queries at
/// distinct stream positions.
pub fn seg_step(
    x: &[f64],
    oracle: &mut StochasticOracle,
    gamma: f64,
    alpha: f64,
) -> Result<Vec<f64>> {
    let mut half = oracle.sample(x)?;
    for (h, xi) in half.iter_mut().zip(x) {
        *h = xi - gamma * *h;
    }
    let mut out = oracle.sample(&half)?;
    for (o, xi) in out.iter_mut().zip(x) {
        *o = xi - alpha * gamma * *o;
    }
    Ok(out)
}

/// Online accumulators over the post-burn-in part of a chain.
#[derive(Debug, Clone, PartialEq)]
pub struct RunningStats {
    /// Number of post-burn-in iterations processed (unthinned).
    pub count: u64,
    /// Exact sum of all post-burn-in iterates.
    pub cesaro_sum: Vec<f64>,
    /// Exact sum of `||x_t - x*||^2`, when the solution is known.
    pub sq_err_sum: Option<f64>,
}

/// Recorded chain output: thinned iterates plus exact online accumulators.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Every `record_stride`-th post-burn-in iterate.
    pub iterates: Vec<Vec<f64>>,
    pub running: RunningStats,
    pub config: SolverConfig,
    /// Copy of the operator's solution, when known.
    pub solution: Option<Vec<f64>>,
}

impl Trajectory {
    /// Post-burn-in Cesaro average of the iterates.
    pub fn cesaro_vector(&self) -> Result<Vec<f64>> {
        if self.running.count == 0 {
            return Err(Error::Precondition(
                "trajectory has no post-burn-in iterates".into(),
            ));
        }
        let n = self.running.count as f64;
        Ok(self.running.cesaro_sum.iter().map(|s| s / n).collect())
    }

    /// Post-burn-in mean squared error to the solution.
    pub fn mean_sq_err(&self) -> Result<f64> {
        let sum = self.running.sq_err_sum.ok_or(Error::MissingSolution)?;
        if self.running.count == 0 {
            return Err(Error::Precondition(
                "trajectory has no post-burn-in iterates".into(),
            ));
        }
        Ok(sum / self.running.count as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceReport {
    /// Iteration at which the guard tripped (1-based step count).
    pub iteration: u64,
    /// Norm of the iterate at the trip, infinite if non-finite.
    pub norm: f64,
}

/// Result of running a chain: either a complete trajectory or a divergence
/// report with whatever was accumulated up to the trip.
#[derive(Debug, Clone, PartialEq)]
pub enum RunOutcome {
    Completed(Trajectory),
    Diverged {
        report: DivergenceReport,
        partial: Trajectory,
    },
}

impl RunOutcome {
    pub fn trajectory(&self) -> &Trajectory {
        match self {
            RunOutcome::Completed(t) => t,
            RunOutcome::Diverged { partial, .. } => partial,
        }
    }

    pub fn divergence(&self) -> Option<&DivergenceReport> {
        match self {
            RunOutcome::Completed(_) => None,
            RunOutcome::Diverged { report, .. } => Some(report),
        }
    }

    /// Unwraps the completed trajectory, turning divergence into an error.
    pub fn completed(self) -> Result<Trajectory> {
        match self {
            RunOutcome::Completed(t) => Ok(t),
            RunOutcome::Diverged { report, .. } => Err(Error::Precondition(format!(
                "chain diverged at iteration {} (norm {:e})",
                report.iteration, report.norm
            ))),
        }
    }
}

/// Runs the configured chain, calling `observe(t, x_t)` after every step
/// (`t = 1..=horizon`).
pub fn run_with_observer(
    config: &SolverConfig,
    oracle: &mut StochasticOracle,
    mut observe: impl FnMut(u64, &[f64]),
) -> Result<RunOutcome> {
    config.validate(oracle.operator())?;
    let d = oracle.dimension();
    let gamma = config.gamma;
    let alpha = config.alpha;
    let x_star = oracle.operator().solution.clone();
    let guard_sq = config.divergence_guard * config.divergence_guard;

    let mut x = config.x0.clone();
    let mut sample = vec![0.0; d];
    let mut half = vec![0.0; d];

    let mut running = RunningStats {
        count: 0,
        cesaro_sum: vec![0.0; d],
        sq_err_sum: x_star.as_ref().map(|_| 0.0),
    };
    let mut iterates = Vec::new();

    for t in 1..=config.horizon {
        match config.algorithm {
            Algorithm::Sgda => {
                oracle.sample_into(&x, &mut sample)?;
                axpy(-gamma, &sample, &mut x);
            }
            Algorithm::Seg => {
                oracle.sample_into(&x, &mut sample)?;
                half.copy_from_slice(&x);
                axpy(-gamma, &sample, &mut half);
                oracle.sample_into(&half, &mut sample)?;
                axpy(-alpha * gamma, &sample, &mut x);
            }
        }

        let sq = norm_sq(&x);
        if !sq.is_finite() || sq > guard_sq {
            let report = DivergenceReport {
                iteration: t,
                norm: sq.sqrt(),
            };
            let partial = Trajectory {
                iterates,
                running,
                config: config.clone(),
                solution: x_star,
            };
            return Ok(RunOutcome::Diverged { report, partial });
        }

        if t > config.burn_in {
            let k = t - config.burn_in;
            running.count += 1;
            axpy(1.0, &x, &mut running.cesaro_sum);
            if let (Some(sum), Some(star)) = (running.sq_err_sum.as_mut(), x_star.as_ref()) {
                *sum += dist_sq(&x, star);
            }
            if (k - 1).is_multiple_of(config.record_stride) {
                iterates.push(x.clone());
            }
        }
        observe(t, &x);
    }

    Ok(RunOutcome::Completed(Trajectory {
        iterates,
        running,
        config: config.clone(),
        solution: x_star,
    }))
}

/// Runs the configured chain against the given oracle.
pub fn run(config: &SolverConfig, oracle: &mut StochasticOracle) -> Result<RunOutcome> {
    run_with_observer(config, oracle, |_, _| {})
}

/// Convenience: builds the chain's oracle from the config seed (chain 0,
/// main phase) and runs.
pub fn run_fresh(
    config: &SolverConfig,
    op: &OperatorSpec,
    noise: &NoiseModel,
) -> Result<RunOutcome> {
    let mut oracle = StochasticOracle::new(
        op.clone(),
        *noise,
        StreamKey::new(config.seed, 0, Phase::Main),
    );
    run(config, &mut oracle)
}
