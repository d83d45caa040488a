//! Stochastic first-order oracle: queries return `F(x) + Z` with independent
//! zero-mean noise, drawn from reproducible splittable streams.
//!
//! Every chain, replicate, and probe gets its own stream keyed by
//! `(experiment seed, chain index, phase)`, so parallel replication is
//! deterministic regardless of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{norm, norm_sq};
use crate::operators::OperatorSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    GaussianIsotropic,
}

/// Per-coordinate Gaussian noise `Z ~ N(0, sigma^2 I_d)`, so
/// `E||Z||^2 = d sigma^2` and the density has full support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub sigma: f64,
}

impl NoiseModel {
    pub fn gaussian(sigma: f64) -> Self {
        assert!(sigma >= 0.0, "noise sigma must be nonnegative");
        NoiseModel {
            kind: NoiseKind::GaussianIsotropic,
            sigma,
        }
    }

    /// The oracle bound `sigma_b^2 = E||Z||^2 = d sigma^2`.
    pub fn second_moment_bound(&self, dimension: usize) -> f64 {
        dimension as f64 * self.sigma * self.sigma
    }
}

/// Role a stream plays inside an experiment. Distinct phases of the same
/// chain index are independent streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// The main chain noise.
    Main = 0,
    /// The partner chain of a coupled pair (e.g. the 2-gamma chain).
    Pair = 1,
    /// One-step Monte-Carlo probes.
    Probe = 2,
    /// Anything auxiliary (centering chains, validators).
    Aux = 3,
}

/// Key identifying one independent sub-stream of the experiment's
/// randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamKey {
    pub seed: u64,
    pub chain: u64,
    pub phase: Phase,
}

impl StreamKey {
    pub fn new(seed: u64, chain: u64, phase: Phase) -> Self {
        StreamKey { seed, chain, phase }
    }

    /// Instantiates the ChaCha stream for this key. Streams with distinct
    /// keys never overlap.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.chain.wrapping_mul(4).wrapping_add(self.phase as u64));
        rng
    }
}

/// An operator paired with a noise model and one seeded stream. Owned by
/// exactly one chain at a time; concurrent chains each build their own from
/// distinct keys.
#[derive(Debug, Clone)]
pub struct StochasticOracle {
    operator: OperatorSpec,
    noise: NoiseModel,
    rng: ChaCha8Rng,
    queries: u64,
}

impl StochasticOracle {
    pub fn new(operator: OperatorSpec, noise: NoiseModel, key: StreamKey) -> Self {
        StochasticOracle {
            operator,
            noise,
            rng: key.rng(),
            queries: 0,
        }
    }

    pub fn operator(&self) -> &OperatorSpec {
        &self.operator
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn dimension(&self) -> usize {
        self.operator.dimension
    }

    /// Number of queries answered so far.
    pub fn queries(&self) -> u64 {
        self.queries
    }

    /// Returns `F(x) + Z` and advances the stream.
    pub fn sample(&mut self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.operator.dimension];
        self.sample_into(x, &mut out)?;
        Ok(out)
    }

    /// In-place version of [`sample`](Self::sample) for the solver loops.
    pub fn sample_into(&mut self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.operator.eval_into(x, out)?;
        let normal = StandardNormal;
        let sigma = self.noise.sigma;
        for o in out.iter_mut() {
            let z: f64 = normal.sample(&mut self.rng);
            *o += sigma * z;
        }
        self.queries += 1;
        Ok(())
    }
}

/// Builds a replicate-indexed oracle factory over a shared operator and
/// noise model.
pub fn oracle_factory(
    operator: OperatorSpec,
    noise: NoiseModel,
    seed: u64,
    phase: Phase,
) -> impl Fn(u64) -> StochasticOracle + Sync {
    move |chain: u64| {
        StochasticOracle::new(operator.clone(), noise, StreamKey::new(seed, chain, phase))
    }
}

/// Monte-Carlo estimates of the noise moments at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseMoments {
    /// `|| (1/n) sum Z_i ||`.
    pub mean_norm: f64,
    /// `(1/n) sum ||Z_i||^2`.
    pub second_moment: f64,
    /// `(1/n) sum ||Z_i||^4`.
    pub fourth_moment: f64,
}

/// Estimates `||E[Z]||`, `E||Z||^2`, `E||Z||^4` at `x` from `n` fresh
/// queries.
pub fn empirical_noise_moments(
    oracle: &mut StochasticOracle,
    x: &[f64],
    n: usize,
) -> Result<NoiseMoments> {
    if n < 2 {
        return Err(Error::Precondition(
            "empirical_noise_moments needs n >= 2".into(),
        ));
    }
    let d = oracle.dimension();
    let f = oracle.operator().evaluate(x)?;
    let mut mean = vec![0.0; d];
    let mut m2 = 0.0;
    let mut m4 = 0.0;
    let mut buf = vec![0.0; d];
    for _ in 0..n {
        oracle.sample_into(x, &mut buf)?;
        for (b, fi) in buf.iter_mut().zip(&f) {
            *b -= fi;
        }
        let sq = norm_sq(&buf);
        m2 += sq;
        m4 += sq * sq;
        for (m, b) in mean.iter_mut().zip(&buf) {
            *m += b;
        }
    }
    let nf = n as f64;
    for m in mean.iter_mut() {
        *m /= nf;
    }
    Ok(NoiseMoments {
        mean_norm: norm(&mean),
        second_moment: m2 / nf,
        fourth_moment: m4 / nf,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::make_linear;

    fn key(seed: u64, chain: u64) -> StreamKey {
        StreamKey::new(seed, chain, Phase::Main)
    }

    #[test]
    fn zero_sigma_reproduces_the_field() {
        let op = make_linear(1.0, 3);
        let mut oracle = StochasticOracle::new(op.clone(), NoiseModel::gaussian(0.0), key(1, 0));
        let x = [1.0, -2.0, 0.5];
        assert_eq!(oracle.sample(&x).unwrap(), op.evaluate(&x).unwrap());
    }

    #[test]
    fn same_key_same_draws() {
        let op = make_linear(1.0, 2);
        let noise = NoiseModel::gaussian(0.5);
        let mut a = StochasticOracle::new(op.clone(), noise, key(42, 3));
        let mut b = StochasticOracle::new(op, noise, key(42, 3));
        for _ in 0..50 {
            let x = [0.3, -0.7];
            assert_eq!(a.sample(&x).unwrap(), b.sample(&x).unwrap());
        }
    }

    #[test]
    fn distinct_chains_are_decorrelated() {
        let op = make_linear(1.0, 1);
        let noise = NoiseModel::gaussian(1.0);
        let mut a = StochasticOracle::new(op.clone(), noise, key(7, 0));
        let mut b = StochasticOracle::new(op, noise, key(7, 1));
        let n = 10_000;
        let mut xs = Vec::with_capacity(n);
        let mut ys = Vec::with_capacity(n);
        for _ in 0..n {
            xs.push(a.sample(&[0.0]).unwrap()[0]);
            ys.push(b.sample(&[0.0]).unwrap()[0]);
        }
        let mx = xs.iter().sum::<f64>() / n as f64;
        let my = ys.iter().sum::<f64>() / n as f64;
        let mut cov = 0.0;
        let mut vx = 0.0;
        let mut vy = 0.0;
        for (x, y) in xs.iter().zip(&ys) {
            cov += (x - mx) * (y - my);
            vx += (x - mx) * (x - mx);
            vy += (y - my) * (y - my);
        }
        let rho = cov / (vx.sqrt() * vy.sqrt());
        assert!(rho.abs() < 0.05, "cross-correlation {}", rho);
    }

    #[test]
    fn sample_mean_and_variance_match_the_model() {
        let op = make_linear(1.0, 2);
        let noise = NoiseModel::gaussian(0.5);
        let mut oracle = StochasticOracle::new(op, noise, key(123, 0));
        let n = 100_000;
        let x = [0.0, 0.0];
        let mut sum = [0.0f64; 2];
        let mut sum_sq = [0.0f64; 2];
        let mut buf = vec![0.0; 2];
        for _ in 0..n {
            oracle.sample_into(&x, &mut buf).unwrap();
            for i in 0..2 {
                sum[i] += buf[i];
                sum_sq[i] += buf[i] * buf[i];
            }
        }
        for i in 0..2 {
            let mean = sum[i] / n as f64;
            let var = sum_sq[i] / n as f64 - mean * mean;
            assert!(mean.abs() < 0.01, "component mean {}", mean);
            assert!((0.24..=0.26).contains(&var), "component variance {}", var);
        }
        assert_eq!(oracle.queries(), n as u64);
    }

    #[test]
    fn noise_moments_gaussian_identities() {
        let op = make_linear(1.0, 1);
        let mut oracle = StochasticOracle::new(op, NoiseModel::gaussian(0.5), key(9, 0));
        let m = empirical_noise_moments(&mut oracle, &[0.7], 1_000_000).unwrap();
        assert!((m.second_moment - 0.25).abs() / 0.25 < 0.01);
        assert!((m.fourth_moment - 0.1875).abs() / 0.1875 < 0.03);
        assert!(m.mean_norm < 0.002);
    }

    #[test]
    fn noise_moments_zero_sigma() {
        let op = make_linear(1.0, 4);
        let mut oracle = StochasticOracle::new(op, NoiseModel::gaussian(0.0), key(2, 0));
        let m = empirical_noise_moments(&mut oracle, &[1.0, 1.0, 1.0, 1.0], 10).unwrap();
        assert_eq!(m.mean_norm, 0.0);
        assert_eq!(m.second_moment, 0.0);
        assert_eq!(m.fourth_moment, 0.0);
    }

    #[test]
    fn noise_is_state_independent() {
        // The same stream produces the same Z sequence at any query point
        // (up to the roundoff of recovering Z = sample - F(x)).
        let op = make_linear(1.0, 2);
        let noise = NoiseModel::gaussian(0.5);
        let mut a = StochasticOracle::new(op.clone(), noise, key(5, 0));
        let mut b = StochasticOracle::new(op.clone(), noise, key(5, 0));
        let ma = empirical_noise_moments(&mut a, &[0.0, 0.0], 1000).unwrap();
        let mb = empirical_noise_moments(&mut b, &[5.0, -3.0], 1000).unwrap();
        assert!((ma.second_moment - mb.second_moment).abs() < 1e-12 * ma.second_moment);
        assert!((ma.fourth_moment - mb.fourth_moment).abs() < 1e-12 * ma.fourth_moment);
        assert!((ma.mean_norm - mb.mean_norm).abs() < 1e-12);
    }

    #[test]
    fn moments_need_two_samples() {
        let op = make_linear(1.0, 1);
        let mut oracle = StochasticOracle::new(op, NoiseModel::gaussian(0.5), key(2, 0));
        assert!(empirical_noise_moments(&mut oracle, &[0.0], 1).is_err());
    }
}
