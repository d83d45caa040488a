//! Vector-field operators, the built-in games, and sampling-based verifiers
//! of the regularity conditions the solvers rely on.
//!
//! An operator is a map `F: R^d -> R^d`; solving the problem means finding
//! `x*` with `F(x*) = 0`. Min-max games induce operators via
//! `F = (grad_min f, -grad_max f)`, so critical points of the game become
//! roots of `F`.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::error::{Error, Result};
use crate::linalg::{dist_sq, dot, norm, norm_sq, Mat};

/// Declared regularity parameters of an operator.
///
/// `mu`/`lambda` are the quasi-strong-monotonicity constants in
/// `<F(x), x - x*> >= mu * ||x - x*||^2 - lambda`. `growth` is the linear
/// growth constant `G` in `||F(x)|| <= G (1 + ||x||)` (needed by SGDA);
/// `lipschitz` is the Lipschitz constant `L` (needed by SEG). For the
/// polynomial games these are estimates valid on the ball the chains
/// actually visit, not global constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorParams {
    pub mu: f64,
    pub lambda: f64,
    pub lipschitz: Option<f64>,
    pub growth: Option<f64>,
    pub radius_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Linear,
    QuadraticQuarticGame,
    LogisticGame,
    QuasiBilinear,
    Custom,
}

impl OperatorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            OperatorKind::Linear => "linear",
            OperatorKind::QuadraticQuarticGame => "quadratic_quartic_game",
            OperatorKind::LogisticGame => "logistic_game",
            OperatorKind::QuasiBilinear => "quasi_bilinear",
            OperatorKind::Custom => "custom",
        }
    }
}

type EvalFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;

/// A d-dimensional vector field with its declared regularity parameters and,
/// when known, the solution `x*`.
#[derive(Clone)]
pub struct OperatorSpec {
    pub dimension: usize,
    pub kind: OperatorKind,
    pub params: OperatorParams,
    pub solution: Option<Vec<f64>>,
    eval: Arc<EvalFn>,
}

impl std::fmt::Debug for OperatorSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OperatorSpec")
            .field("dimension", &self.dimension)
            .field("kind", &self.kind)
            .field("params", &self.params)
            .field("solution", &self.solution)
            .finish()
    }
}

impl OperatorSpec {
    /// Builds a custom operator from a closure.
    pub fn custom(
        dimension: usize,
        params: OperatorParams,
        solution: Option<Vec<f64>>,
        eval: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        assert!(dimension >= 1, "operator dimension must be at least 1");
        OperatorSpec {
            dimension,
            kind: OperatorKind::Custom,
            params,
            solution,
            eval: Arc::new(eval),
        }
    }

    /// Evaluates the deterministic field `F(x)`.
    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dimension];
        self.eval_into(x, &mut out)?;
        Ok(out)
    }

    /// In-place evaluation, for the hot solver loops.
    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: x.len(),
            });
        }
        debug_assert_eq!(out.len(), self.dimension);
        (self.eval)(x, out);
        Ok(())
    }

    pub fn solution(&self) -> Result<&[f64]> {
        self.solution.as_deref().ok_or(Error::MissingSolution)
    }
}

type PayoffFn = dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64], &[f64], &mut [f64]) + Send + Sync;

/// A two-player zero-sum game `min_{x1} max_{x2} f(x1, x2)` together with its
/// hand-coded partial gradients and the induced operator.
#[derive(Clone)]
pub struct GameSpec {
    pub dim_min: usize,
    pub dim_max: usize,
    payoff: Arc<PayoffFn>,
    grad_min: Arc<GradFn>,
    grad_max: Arc<GradFn>,
    operator: OperatorSpec,
}

impl std::fmt::Debug for GameSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GameSpec")
            .field("dim_min", &self.dim_min)
            .field("dim_max", &self.dim_max)
            .field("operator", &self.operator)
            .finish()
    }
}

impl GameSpec {
    /// Payoff at a joint point `(x1, x2)` packed into one vector.
    pub fn value(&self, joint: &[f64]) -> f64 {
        let (x1, x2) = joint.split_at(self.dim_min);
        (self.payoff)(x1, x2)
    }

    /// `grad_{x1} f` at a joint point.
    pub fn grad_min_at(&self, joint: &[f64]) -> Vec<f64> {
        let (x1, x2) = joint.split_at(self.dim_min);
        let mut g = vec![0.0; self.dim_min];
        (self.grad_min)(x1, x2, &mut g);
        g
    }

    /// `grad_{x2} f` at a joint point.
    pub fn grad_max_at(&self, joint: &[f64]) -> Vec<f64> {
        let (x1, x2) = joint.split_at(self.dim_min);
        let mut g = vec![0.0; self.dim_max];
        (self.grad_max)(x1, x2, &mut g);
        g
    }

    /// The induced operator `F = (grad_min f, -grad_max f)`.
    pub fn operator(&self) -> &OperatorSpec {
        &self.operator
    }

    pub fn joint_dimension(&self) -> usize {
        self.dim_min + self.dim_max
    }
}

fn operator_from_grads(
    dim_min: usize,
    dim_max: usize,
    grad_min: Arc<GradFn>,
    grad_max: Arc<GradFn>,
    kind: OperatorKind,
    params: OperatorParams,
    solution: Option<Vec<f64>>,
) -> OperatorSpec {
    let d = dim_min + dim_max;
    let eval = move |x: &[f64], out: &mut [f64]| {
        let (x1, x2) = x.split_at(dim_min);
        let (o1, o2) = out.split_at_mut(dim_min);
        grad_min(x1, x2, o1);
        grad_max(x1, x2, o2);
        for v in o2.iter_mut() {
            *v = -*v;
        }
    };
    OperatorSpec {
        dimension: d,
        kind,
        params,
        solution,
        eval: Arc::new(eval),
    }
}

/// `F(x) = mu * x`, the analytic benchmark operator. Strongly monotone with
/// equality in the quasi-monotonicity condition, solution at the origin.
pub fn make_linear(mu: f64, d: usize) -> OperatorSpec {
    assert!(mu > 0.0, "linear operator needs mu > 0");
    assert!(d >= 1);
    OperatorSpec {
        dimension: d,
        kind: OperatorKind::Linear,
        params: OperatorParams {
            mu,
            lambda: 0.0,
            lipschitz: Some(mu),
            growth: Some(mu),
            radius_bound: 0.0,
        },
        solution: Some(vec![0.0; d]),
        eval: Arc::new(move |x: &[f64], out: &mut [f64]| {
            for (o, xi) in out.iter_mut().zip(x) {
                *o = mu * xi;
            }
        }),
    }
}

/// Symmetric positive definite `Q^T Q / n + c I` with `Q` standard normal.
/// Every eigenvalue is at least `c`.
fn random_psd(n: usize, c: f64, rng: &mut ChaCha8Rng) -> Mat {
    let normal = StandardNormal;
    let q: Vec<f64> = (0..n * n).map(|_| normal.sample(rng)).collect();
    let mut m = Mat::zeros(n);
    for i in 0..n {
        for j in i..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += q[k * n + i] * q[k * n + j];
            }
            acc /= n as f64;
            if i == j {
                acc += c;
            }
            *m.at_mut(i, j) = acc;
            *m.at_mut(j, i) = acc;
        }
    }
    m
}

/// Scale applied to the quartic matrices so that the game stays contractive
/// at the step sizes used in the experiments.
const QUARTIC_SCALE: f64 = 0.04;

/// Builds the d-per-block quadratic-quartic game
/// `f(x1,x2) = x1'A1x1 - x2'A2x2 + (x1'B1x1)^2 - (x2'B2x2)^2 + x1'Cx2`
/// with `A1,A2,B1,B2` symmetric positive definite and `C` a random coupling
/// matrix, all deterministic functions of the seed. The global solution is
/// the origin with value 0.
pub fn make_quadratic_quartic_game(d: usize, seed: u64, conditioning: f64) -> Result<GameSpec> {
    if d == 0 {
        return Err(Error::InvalidConfig(
            "quadratic_quartic_game needs block dimension d >= 1".into(),
        ));
    }
    if conditioning.is_nan() || conditioning <= 0.0 {
        return Err(Error::InvalidConfig(
            "quadratic_quartic_game needs conditioning > 0".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a1 = random_psd(d, conditioning, &mut rng);
    let a2 = random_psd(d, conditioning, &mut rng);
    let mut b1 = random_psd(d, conditioning, &mut rng);
    let mut b2 = random_psd(d, conditioning, &mut rng);
    for v in b1.data.iter_mut().chain(b2.data.iter_mut()) {
        *v *= QUARTIC_SCALE;
    }
    // Coupling scaled so its spectral norm is ~1 (entries N(0, 1/(4d))).
    let c_sd = 0.5 / (d as f64).sqrt();
    let normal = StandardNormal;
    let mut c = Mat::zeros(d);
    for v in c.data.iter_mut() {
        let z: f64 = normal.sample(&mut rng);
        *v = c_sd * z;
    }

    let payoff = {
        let (a1, a2, b1, b2, c) = (a1.clone(), a2.clone(), b1.clone(), b2.clone(), c.clone());
        move |x1: &[f64], x2: &[f64]| -> f64 {
            let q1 = b1.quad_form(x1);
            let q2 = b2.quad_form(x2);
            let mut cx2 = vec![0.0; x2.len()];
            c.matvec(x2, &mut cx2);
            a1.quad_form(x1) - a2.quad_form(x2) + q1 * q1 - q2 * q2 + dot(x1, &cx2)
        }
    };
    // grad_{x1} f = 2 A1 x1 + 4 (x1'B1x1) B1 x1 + C x2
    let grad_min = {
        let (a1, b1, c) = (a1.clone(), b1.clone(), c.clone());
        move |x1: &[f64], x2: &[f64], out: &mut [f64]| {
            let n = x1.len();
            let mut tmp = vec![0.0; n];
            a1.matvec(x1, out);
            for v in out.iter_mut() {
                *v *= 2.0;
            }
            let q1 = b1.quad_form(x1);
            b1.matvec(x1, &mut tmp);
            for (o, t) in out.iter_mut().zip(&tmp) {
                *o += 4.0 * q1 * t;
            }
            c.matvec(x2, &mut tmp);
            for (o, t) in out.iter_mut().zip(&tmp) {
                *o += t;
            }
        }
    };
    // grad_{x2} f = -2 A2 x2 - 4 (x2'B2x2) B2 x2 + C^T x1
    let grad_max = {
        let (a2, b2, c) = (a2.clone(), b2.clone(), c.clone());
        move |x1: &[f64], x2: &[f64], out: &mut [f64]| {
            let n = x2.len();
            let mut tmp = vec![0.0; n];
            a2.matvec(x2, out);
            for v in out.iter_mut() {
                *v *= -2.0;
            }
            let q2 = b2.quad_form(x2);
            b2.matvec(x2, &mut tmp);
            for (o, t) in out.iter_mut().zip(&tmp) {
                *o -= 4.0 * q2 * t;
            }
            c.matvec_t(x1, &mut tmp);
            for (o, t) in out.iter_mut().zip(&tmp) {
                *o += t;
            }
        }
    };

    let grad_min: Arc<GradFn> = Arc::new(grad_min);
    let grad_max: Arc<GradFn> = Arc::new(grad_max);

    // mu = 2 * conditioning holds exactly: <F(x), x> = 2 x1'A1x1 + 2 x2'A2x2
    // + 4(x1'B1x1)^2 + 4(x2'B2x2)^2 >= 2c ||x||^2 (the coupling cancels).
    let mut params = OperatorParams {
        mu: 2.0 * conditioning,
        lambda: 0.0,
        lipschitz: None,
        growth: None,
        radius_bound: 0.0,
    };
    let operator = operator_from_grads(
        d,
        d,
        grad_min.clone(),
        grad_max.clone(),
        OperatorKind::QuadraticQuarticGame,
        params,
        Some(vec![0.0; 2 * d]),
    );

    // Growth/Lipschitz estimates probed on ball(0, 12), which covers the
    // drift-check region; inflated because sampled maxima are lower bounds.
    let (g_hat, l_hat) = probe_growth_lipschitz(&operator, 12.0, 128, &mut rng);
    params.growth = Some(1.05 * g_hat);
    params.lipschitz = Some(1.25 * l_hat);
    let operator = OperatorSpec { params, ..operator };

    Ok(GameSpec {
        dim_min: d,
        dim_max: d,
        payoff: Arc::new(payoff),
        grad_min,
        grad_max,
        operator,
    })
}

fn probe_growth_lipschitz(
    op: &OperatorSpec,
    radius: f64,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> (f64, f64) {
    let points: Vec<Vec<f64>> = (0..n)
        .map(|_| sample_in_ball(&vec![0.0; op.dimension], radius, rng))
        .collect();
    let values: Vec<Vec<f64>> = points.iter().map(|p| op.evaluate(p).unwrap()).collect();
    let mut g = 0.0f64;
    for (p, f) in points.iter().zip(&values) {
        g = g.max(norm(f) / (1.0 + norm(p)));
    }
    let mut l = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = dist_sq(&points[i], &points[j]).sqrt();
            if dx > 1e-12 {
                let df = dist_sq(&values[i], &values[j]).sqrt();
                l = l.max(df / dx);
            }
        }
    }
    (g, l)
}

/// Numerically stable logistic sigmoid.
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable softplus `log(1 + e^z)`.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Builds the scalar logistic game
/// `f(x1,x2) = h(x1) + h(-2x1) - h(x2) - h(-2x2) + 0.1x1^2 - 0.1x2^2 + 0.1x1x2`
/// with `h(z) = log(1+e^z)`. The solution is found by damped Newton at
/// construction time and matches (0.3268, 0.3801) to four decimals.
pub fn make_logistic_game() -> GameSpec {
    let payoff = |x1: &[f64], x2: &[f64]| -> f64 {
        let (a, b) = (x1[0], x2[0]);
        softplus(a) + softplus(-2.0 * a) - softplus(b) - softplus(-2.0 * b) + 0.1 * a * a
            - 0.1 * b * b
            + 0.1 * a * b
    };
    let grad_min = |x1: &[f64], x2: &[f64], out: &mut [f64]| {
        let (a, b) = (x1[0], x2[0]);
        out[0] = sigmoid(a) - 2.0 * sigmoid(-2.0 * a) + 0.2 * a + 0.1 * b;
    };
    let grad_max = |x1: &[f64], x2: &[f64], out: &mut [f64]| {
        let (a, b) = (x1[0], x2[0]);
        out[0] = -sigmoid(b) + 2.0 * sigmoid(-2.0 * b) - 0.2 * b + 0.1 * a;
    };

    let field = |a: f64, b: f64| -> (f64, f64) {
        (
            sigmoid(a) - 2.0 * sigmoid(-2.0 * a) + 0.2 * a + 0.1 * b,
            sigmoid(b) - 2.0 * sigmoid(-2.0 * b) + 0.2 * b - 0.1 * a,
        )
    };
    let solution = logistic_newton(field);
    assert!(
        (solution[0] - 0.3268).abs() < 5e-5 && (solution[1] - 0.3801).abs() < 5e-5,
        "logistic game root {:?} drifted from the reference (0.3268, 0.3801)",
        solution
    );

    // mu = 0.2 holds globally: the symmetric part of the Jacobian is
    // diag(s'(x1) + 4 s'(-2x1) + 0.2, s'(x2) + 4 s'(-2x2) + 0.2) >= 0.2 I.
    // sup ||J|| <= 1.55 and sup ||F(x)||/(1+||x||) ~= 1.01.
    let radius_bound = norm(&solution);
    let params = OperatorParams {
        mu: 0.2,
        lambda: 0.0,
        lipschitz: Some(1.6),
        growth: Some(1.05),
        radius_bound,
    };
    let grad_min: Arc<GradFn> = Arc::new(grad_min);
    let grad_max: Arc<GradFn> = Arc::new(grad_max);
    let operator = operator_from_grads(
        1,
        1,
        grad_min.clone(),
        grad_max.clone(),
        OperatorKind::LogisticGame,
        params,
        Some(solution),
    );
    GameSpec {
        dim_min: 1,
        dim_max: 1,
        payoff: Arc::new(payoff),
        grad_min,
        grad_max,
        operator,
    }
}

/// Damped Newton on the induced 2-d field, to 1e-12 residual.
fn logistic_newton(field: impl Fn(f64, f64) -> (f64, f64)) -> Vec<f64> {
    let sig_d = |z: f64| {
        let s = sigmoid(z);
        s * (1.0 - s)
    };
    let (mut a, mut b) = (0.0f64, 0.0f64);
    for _ in 0..200 {
        let (f1, f2) = field(a, b);
        if f1.abs().max(f2.abs()) < 1e-13 {
            break;
        }
        let j11 = sig_d(a) + 4.0 * sig_d(-2.0 * a) + 0.2;
        let j22 = sig_d(b) + 4.0 * sig_d(-2.0 * b) + 0.2;
        let (j12, j21) = (0.1, -0.1);
        let det = j11 * j22 - j12 * j21;
        let da = (f1 * j22 - f2 * j12) / det;
        let db = (j11 * f2 - j21 * f1) / det;
        let res0 = f1 * f1 + f2 * f2;
        let mut step = 1.0;
        loop {
            let (t1, t2) = field(a - step * da, b - step * db);
            if t1 * t1 + t2 * t2 < res0 || step < 1e-8 {
                a -= step * da;
                b -= step * db;
                break;
            }
            step *= 0.5;
        }
    }
    let (f1, f2) = field(a, b);
    assert!(
        f1.abs().max(f2.abs()) < 1e-12,
        "logistic game Newton solve did not converge"
    );
    vec![a, b]
}

/// The 1x1 game `min_x max_y eps*x^2 + x*y - eps*y^2` behind the divergence
/// experiment. Induced operator `F(x,y) = (2 eps x + y, -x + 2 eps y)`, a
/// near-rotation whose Jacobian eigenvalues are `2 eps ± i`.
pub fn make_quasi_bilinear(epsilon: f64) -> GameSpec {
    assert!(epsilon >= 0.0, "quasi_bilinear needs epsilon >= 0");
    let payoff = move |x1: &[f64], x2: &[f64]| -> f64 {
        epsilon * x1[0] * x1[0] + x1[0] * x2[0] - epsilon * x2[0] * x2[0]
    };
    let grad_min = move |x1: &[f64], x2: &[f64], out: &mut [f64]| {
        out[0] = 2.0 * epsilon * x1[0] + x2[0];
    };
    let grad_max = move |x1: &[f64], x2: &[f64], out: &mut [f64]| {
        out[0] = x1[0] - 2.0 * epsilon * x2[0];
    };
    let l = (4.0 * epsilon * epsilon + 1.0).sqrt();
    let params = OperatorParams {
        mu: 2.0 * epsilon,
        lambda: 0.0,
        lipschitz: Some(l),
        growth: Some(l),
        radius_bound: 0.0,
    };
    let grad_min: Arc<GradFn> = Arc::new(grad_min);
    let grad_max: Arc<GradFn> = Arc::new(grad_max);
    let operator = operator_from_grads(
        1,
        1,
        grad_min.clone(),
        grad_max.clone(),
        OperatorKind::QuasiBilinear,
        params,
        Some(vec![0.0, 0.0]),
    );
    GameSpec {
        dim_min: 1,
        dim_max: 1,
        payoff: Arc::new(payoff),
        grad_min,
        grad_max,
        operator,
    }
}

/// Outcome of the sampling-based assumption checks.
///
/// A `true` violation flag is a certificate that the declared parameter is
/// wrong; the absence of violations is *not* a proof that the assumption
/// holds (the conditions are global, sampling is not).
#[derive(Debug, Clone)]
pub struct AssumptionReport {
    pub n_samples: usize,
    pub radius: f64,
    /// min over samples of `<F(x), x - x*> - mu ||x - x*||^2 + lambda`.
    pub wqsm_min_slack: f64,
    pub wqsm_violation: bool,
    /// max over samples of `||F(x)|| / (1 + ||x||)`; a lower bound on G.
    pub growth_lower_bound: f64,
    pub growth_violation: Option<bool>,
    /// max over sample pairs of `||F(x)-F(y)|| / ||x-y||`; a lower bound on L.
    pub lipschitz_lower_bound: f64,
    pub lipschitz_violation: Option<bool>,
}

impl AssumptionReport {
    pub fn any_violation(&self) -> bool {
        self.wqsm_violation
            || self.growth_violation.unwrap_or(false)
            || self.lipschitz_violation.unwrap_or(false)
    }
}

/// Deterministic batch of uniform samples from `ball(center, radius)`.
pub fn ball_probes(center: &[f64], radius: f64, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| sample_in_ball(center, radius, &mut rng))
        .collect()
}

/// Uniform sample from the ball of the given radius around `center`.
fn sample_in_ball(center: &[f64], radius: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let d = center.len();
    let normal = StandardNormal;
    let mut v: Vec<f64> = (0..d).map(|_| normal.sample(rng)).collect();
    let n = norm(&v).max(1e-300);
    let u: f64 = Uniform::new(0.0f64, 1.0).unwrap().sample(rng);
    let r = radius * u.powf(1.0 / d as f64);
    for vi in v.iter_mut() {
        *vi *= r / n;
    }
    for (vi, ci) in v.iter_mut().zip(center) {
        *vi += ci;
    }
    v
}

/// Samples points uniformly in `ball(x*, radius)` and checks the declared
/// parameters against them.
pub fn verify_assumptions(
    op: &OperatorSpec,
    n_samples: usize,
    radius: f64,
    seed: u64,
) -> Result<AssumptionReport> {
    let x_star = op.solution()?;
    if n_samples < 1 {
        return Err(Error::Precondition(
            "verify_assumptions needs n_samples >= 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Vec<f64>> = (0..n_samples)
        .map(|_| sample_in_ball(x_star, radius, &mut rng))
        .collect();
    let values: Vec<Vec<f64>> = points
        .iter()
        .map(|p| op.evaluate(p))
        .collect::<Result<_>>()?;

    let mut min_slack = f64::INFINITY;
    let mut g_obs = 0.0f64;
    for (p, f) in points.iter().zip(&values) {
        let diff: Vec<f64> = p.iter().zip(x_star).map(|(a, b)| a - b).collect();
        let slack = dot(f, &diff) - op.params.mu * norm_sq(&diff) + op.params.lambda;
        min_slack = min_slack.min(slack);
        g_obs = g_obs.max(norm(f) / (1.0 + norm(p)));
    }
    let mut l_obs = 0.0f64;
    for i in 0..n_samples {
        for j in (i + 1)..n_samples {
            let dx = dist_sq(&points[i], &points[j]).sqrt();
            if dx > 1e-12 {
                l_obs = l_obs.max(dist_sq(&values[i], &values[j]).sqrt() / dx);
            }
        }
    }

    Ok(AssumptionReport {
        n_samples,
        radius,
        wqsm_min_slack: min_slack,
        wqsm_violation: min_slack < -1e-10,
        growth_lower_bound: g_obs,
        growth_violation: op.params.growth.map(|g| g_obs > g),
        lipschitz_lower_bound: l_obs,
        lipschitz_violation: op.params.lipschitz.map(|l| l_obs > l),
    })
}

/// Compares the declared partial gradients of a game against central finite
/// differences of its payoff at `x`; returns the worst absolute component
/// error.
pub fn gradient_consistency(game: &GameSpec, x: &[f64], h: f64) -> f64 {
    assert!(h > 0.0);
    let d = game.joint_dimension();
    assert_eq!(x.len(), d);
    let g1 = game.grad_min_at(x);
    let g2 = game.grad_max_at(x);
    let mut worst = 0.0f64;
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    for i in 0..d {
        xp[i] = x[i] + h;
        xm[i] = x[i] - h;
        let fd = (game.value(&xp) - game.value(&xm)) / (2.0 * h);
        let declared = if i < game.dim_min {
            g1[i]
        } else {
            g2[i - game.dim_min]
        };
        worst = worst.max((fd - declared).abs());
        xp[i] = x[i];
        xm[i] = x[i];
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm;

    #[test]
    fn linear_identity_field() {
        let op = make_linear(1.0, 2);
        assert_eq!(op.evaluate(&[3.0, 4.0]).unwrap(), vec![3.0, 4.0]);
        let op = make_linear(0.5, 3);
        assert_eq!(op.evaluate(&[0.0, 0.0, 0.0]).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn evaluate_rejects_dimension_mismatch() {
        let op = make_linear(1.0, 2);
        assert!(matches!(
            op.evaluate(&[1.0]),
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 1
            })
        ));
    }

    #[test]
    fn builtin_solutions_are_roots() {
        let games = [
            make_quadratic_quartic_game(50, 7, 0.1).unwrap(),
            make_logistic_game(),
            make_quasi_bilinear(1e-4),
        ];
        for game in &games {
            let op = game.operator();
            let x_star = op.solution().unwrap();
            let f = op.evaluate(x_star).unwrap();
            assert!(norm(&f) <= 1e-8, "{:?}: |F(x*)| = {}", op.kind, norm(&f));
        }
        let lin = make_linear(0.7, 4);
        assert!(norm(&lin.evaluate(lin.solution().unwrap()).unwrap()) == 0.0);
    }

    #[test]
    fn quadratic_quartic_zero_at_origin_and_payoff_zero() {
        for seed in [0u64, 1, 42] {
            let game = make_quadratic_quartic_game(50, seed, 0.1).unwrap();
            let zero = vec![0.0; 100];
            assert_eq!(game.value(&zero), 0.0);
            let f = game.operator().evaluate(&zero).unwrap();
            assert_eq!(f, vec![0.0; 100]);
        }
    }

    #[test]
    fn quadratic_quartic_deterministic_in_seed() {
        let g1 = make_quadratic_quartic_game(10, 99, 0.1).unwrap();
        let g2 = make_quadratic_quartic_game(10, 99, 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let x = sample_in_ball(&[0.0; 20], 3.0, &mut rng);
            let f1 = g1.operator().evaluate(&x).unwrap();
            let f2 = g2.operator().evaluate(&x).unwrap();
            assert_eq!(f1, f2);
            assert_eq!(g1.value(&x), g2.value(&x));
        }
        let g3 = make_quadratic_quartic_game(10, 100, 0.1).unwrap();
        let x = vec![1.0; 20];
        assert_ne!(
            g1.operator().evaluate(&x).unwrap(),
            g3.operator().evaluate(&x).unwrap()
        );
    }

    #[test]
    fn quadratic_quartic_rejects_zero_dim() {
        assert!(make_quadratic_quartic_game(0, 1, 0.1).is_err());
    }

    #[test]
    fn logistic_solution_matches_reference() {
        let game = make_logistic_game();
        let sol = game.operator().solution().unwrap();
        assert!((sol[0] - 0.3268).abs() < 5e-5);
        assert!((sol[1] - 0.3801).abs() < 5e-5);
        let f = game.operator().evaluate(sol).unwrap();
        assert!(norm(&f) < 1e-8);
    }

    #[test]
    fn logistic_operator_matches_finite_differences() {
        let game = make_logistic_game();
        // The operator flips the sign of grad_max, so check the gradients.
        let err = gradient_consistency(&game, &[1.0, -1.0], 1e-6);
        assert!(err < 1e-5, "finite-difference error {}", err);
        let op = game.operator();
        let f = op.evaluate(&[1.0, -1.0]).unwrap();
        let g1 = game.grad_min_at(&[1.0, -1.0]);
        let g2 = game.grad_max_at(&[1.0, -1.0]);
        assert_eq!(f[0], g1[0]);
        assert_eq!(f[1], -g2[0]);
    }

    #[test]
    fn quasi_bilinear_field_values() {
        let game = make_quasi_bilinear(0.0);
        let op = game.operator();
        // Skew field: F(x,y) = (y, -x) at eps = 0.
        assert_eq!(op.evaluate(&[1.0, 0.0]).unwrap(), vec![0.0, -1.0]);
        let game = make_quasi_bilinear(1e-4);
        assert_eq!(
            game.operator().evaluate(&[0.0, 0.0]).unwrap(),
            vec![0.0, 0.0]
        );
    }

    #[test]
    fn quasi_bilinear_jacobian_eigen_modulus() {
        // Jacobian [[2e, 1], [-1, 2e]] has eigenvalues 2e ± i, modulus
        // sqrt(4e^2 + 1); check via the field's action on basis vectors.
        let eps = 1e-4;
        let game = make_quasi_bilinear(eps);
        let op = game.operator();
        let e1 = op.evaluate(&[1.0, 0.0]).unwrap();
        let e2 = op.evaluate(&[0.0, 1.0]).unwrap();
        assert!((e1[0] - 2.0 * eps).abs() < 1e-15 && (e1[1] + 1.0).abs() < 1e-15);
        assert!((e2[0] - 1.0).abs() < 1e-15 && (e2[1] - 2.0 * eps).abs() < 1e-15);
        let modulus = (4.0 * eps * eps + 1.0f64).sqrt();
        assert!((op.params.lipschitz.unwrap() - modulus).abs() < 1e-15);
    }

    #[test]
    fn wqsm_equality_for_linear() {
        let op = make_linear(1.0, 3);
        let report = verify_assumptions(&op, 200, 5.0, 11).unwrap();
        assert!(!report.wqsm_violation);
        assert!(report.wqsm_min_slack.abs() < 1e-12);
    }

    #[test]
    fn wqsm_fails_for_skew_field_with_positive_mu() {
        let game = make_quasi_bilinear(0.0);
        let mut op = game.operator().clone();
        op.params.mu = 0.1; // claim monotonicity the skew field does not have
        let report = verify_assumptions(&op, 100, 1.0, 5).unwrap();
        assert!(report.wqsm_violation);
    }

    #[test]
    fn gradient_consistency_on_builtins() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let qq = make_quadratic_quartic_game(8, 3, 0.1).unwrap();
        let games: [(&GameSpec, f64); 3] = [
            (&qq, 1e-4),
            (&make_logistic_game(), 1e-4),
            (&make_quasi_bilinear(0.5), 1e-4),
        ];
        for (game, tol) in games {
            let d = game.joint_dimension();
            for _ in 0..20 {
                let x = sample_in_ball(&vec![0.0; d], 2.0, &mut rng);
                let err = gradient_consistency(game, &x, 1e-6);
                assert!(err < tol, "{:?} error {}", game.operator().kind, err);
            }
        }
    }

    #[test]
    fn gradient_consistency_is_pure() {
        let game = make_logistic_game();
        let a = gradient_consistency(&game, &[0.3, 0.7], 1e-6);
        let b = gradient_consistency(&game, &[0.3, 0.7], 1e-6);
        assert_eq!(a, b);
    }

    #[test]
    fn verify_assumptions_requires_solution() {
        let op = OperatorSpec::custom(
            1,
            OperatorParams {
                mu: 1.0,
                lambda: 0.0,
                lipschitz: Some(1.0),
                growth: Some(1.0),
                radius_bound: 0.0,
            },
            None,
            |x, out| out[0] = x[0],
        );
        assert!(matches!(
            verify_assumptions(&op, 10, 1.0, 0),
            Err(Error::MissingSolution)
        ));
    }
}
