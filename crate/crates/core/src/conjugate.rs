//! Normal-gamma conjugate updates for a normal kernel with unknown mean and
//! precision.
//!
//! The prior is `λ ~ Ga(a, b)` (shape, rate) and `μ | λ ~ N(ω, c/λ)`: `c`
//! scales the variance of the mean, so larger `c` means weaker shrinkage of
//! group means towards `ω`.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::distributions::sample_gamma;
use crate::error::{Error, Result};
use crate::types::GroupParams;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalGammaParams {
    pub omega: f64,
    pub c: f64,
    pub a: f64,
    pub b: f64,
}

/// Size, mean and sum of squared deviations of a group.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SuffStats {
    pub n: usize,
    pub mean: f64,
    pub ssd: f64,
}

impl SuffStats {
    pub fn from_slice(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self::default();
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let ssd = values.iter().map(|y| (y - mean) * (y - mean)).sum();
        Self { n, mean, ssd }
    }
}

/// Posterior parameters after observing a group with the given statistics.
pub fn posterior_from_stats(prior: &NormalGammaParams, stats: &SuffStats) -> NormalGammaParams {
    let n = stats.n as f64;
    let shrink = prior.c * n + 1.0;
    let dev = stats.mean - prior.omega;
    NormalGammaParams {
        omega: (prior.c * n * stats.mean + prior.omega) / shrink,
        c: prior.c / shrink,
        a: prior.a + n / 2.0,
        b: prior.b + 0.5 * stats.ssd + n * dev * dev / (2.0 * shrink),
    }
}

/// Posterior parameters given the values of a nonempty group.
///
/// The result depends on the values only as a multiset: they are summed in
/// sorted order, so any permutation gives bitwise-identical output.
pub fn posterior_params(prior: &NormalGammaParams, values: &[f64]) -> Result<NormalGammaParams> {
    if values.is_empty() {
        return Err(Error::EmptyGroup);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(posterior_from_stats(prior, &SuffStats::from_slice(&sorted)))
}

/// Log marginal likelihood of `n` observations from the prior and the
/// posterior it leads to.
pub fn log_marginal_from(prior: &NormalGammaParams, post: &NormalGammaParams, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    -(n as f64) / 2.0 * LN_2PI + 0.5 * (post.c / prior.c).ln() + ln_gamma(post.a)
        - ln_gamma(prior.a)
        + prior.a * prior.b.ln()
        - post.a * post.b.ln()
}

/// `log ∫∫ ∏ N(y_i | μ, 1/λ) dNG(μ, λ)`; zero for an empty group.
pub fn log_marginal_likelihood(prior: &NormalGammaParams, values: &[f64]) -> f64 {
    let stats = SuffStats::from_slice(values);
    log_marginal_from(prior, &posterior_from_stats(prior, &stats), stats.n)
}

/// Log posterior-predictive density of one more observation.
pub fn log_predictive(post: &NormalGammaParams, y: f64) -> f64 {
    log_marginal_likelihood(post, &[y])
}

/// The marginal likelihood factorized as a product of one-step predictives.
pub fn log_marginal_sequential(prior: &NormalGammaParams, values: &[f64]) -> f64 {
    let mut current = *prior;
    let mut total = 0.0;
    for &y in values {
        total += log_predictive(&current, y);
        current = posterior_from_stats(
            &current,
            &SuffStats {
                n: 1,
                mean: y,
                ssd: 0.0,
            },
        );
    }
    total
}

/// Draws `λ ~ Ga(a', b')` then `μ | λ ~ N(ω', c'/λ)`.
pub fn sample_group_params<R: Rng + ?Sized>(
    post: &NormalGammaParams,
    rng: &mut R,
) -> Result<GroupParams> {
    let lambda = sample_gamma(post.a, post.b, rng)?;
    let z: f64 = StandardNormal.sample(rng);
    Ok(GroupParams {
        mu: post.omega + z * (post.c / lambda).sqrt(),
        lambda,
    })
}

/// The within-group model seen by the sampler.
///
/// The default methods implement the exact normal-gamma update; overriding
/// [`GroupModel::posterior`] changes every conditional that depends on it,
/// which is how the correctness tests inject deliberately broken samplers.
pub trait GroupModel: Sync {
    fn prior(&self) -> &NormalGammaParams;

    fn posterior(&self, stats: &SuffStats) -> NormalGammaParams {
        posterior_from_stats(self.prior(), stats)
    }

    fn log_marginal(&self, stats: &SuffStats) -> f64 {
        if stats.n == 0 {
            return 0.0;
        }
        log_marginal_from(self.prior(), &self.posterior(stats), stats.n)
    }
}

impl GroupModel for NormalGammaParams {
    fn prior(&self) -> &NormalGammaParams {
        self
    }
}
