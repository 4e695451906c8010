//! Independent verification oracles: numerical quadrature of group marginal
//! likelihoods, exhaustive partition posteriors for small samples, and the
//! Geweke joint-distribution test of the full kernel.
//!
//! None of these are used by the sampler itself.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::function::gamma::ln_gamma;

use crate::conjugate::{sample_group_params, GroupModel, NormalGammaParams, SuffStats};
use crate::distributions::sample_gamma;
use crate::error::{Error, Result};
use crate::prior::log_restricted_prior;
use crate::sampler::{MoveMix, Sampler, SamplerConfig, Updates};
use crate::types::{BinLayout, ChainState, GroupParams, Hyperparams, MoveCounts, Partition};

pub use crate::prior::enumerate_compositions;

/// Largest sample size accepted by [`enumerate_partition_posterior`].
pub const MAX_POSTERIOR_ENUMERATION: usize = 10;
const QUADRATURE_MAX_REFINEMENTS: usize = 10;
const QUADRATURE_TOLERANCE: f64 = 1e-8;

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Composite Simpson weights for `intervals` (even) subintervals of width `h`.
fn simpson_weights(intervals: usize, h: f64) -> Vec<f64> {
    (0..=intervals)
        .map(|i| {
            let w = if i == 0 || i == intervals {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * h / 3.0
        })
        .collect()
}

struct MarginalIntegrand<'a> {
    prior: &'a NormalGammaParams,
    values: &'a [f64],
    log_norm: f64,
    mu_center: f64,
    mu_precision_factor: f64,
}

impl<'a> MarginalIntegrand<'a> {
    fn new(prior: &'a NormalGammaParams, values: &'a [f64]) -> Self {
        let n = values.len() as f64;
        let ln_2pi = (2.0 * std::f64::consts::PI).ln();
        // normal likelihood terms, the N(ω, c/λ) normalizer and the gamma
        // normalizer, excluding all λ-dependent factors
        let log_norm = -0.5 * (n + 1.0) * ln_2pi - 0.5 * prior.c.ln() + prior.a * prior.b.ln()
            - ln_gamma(prior.a);
        let weight = 1.0 / prior.c;
        Self {
            prior,
            values,
            log_norm,
            mu_center: (values.iter().sum::<f64>() + weight * prior.omega) / (n + weight),
            mu_precision_factor: n + weight,
        }
    }

    /// `log` of the joint integrand at `(μ, λ)`.
    fn log_at(&self, mu: f64, lambda: f64) -> f64 {
        let p = self.prior;
        let n = self.values.len() as f64;
        let sq: f64 = self.values.iter().map(|y| (y - mu) * (y - mu)).sum();
        self.log_norm + 0.5 * (n + 1.0) * lambda.ln()
            - 0.5 * lambda * (sq + (mu - p.omega) * (mu - p.omega) / p.c)
            + (p.a - 1.0) * lambda.ln()
            - p.b * lambda
    }

    /// `log ∫ integrand dμ` at `λ = e^s`, plus `s` for the change of variable.
    fn log_inner(&self, s: f64, mu_intervals: usize) -> f64 {
        const SPAN: f64 = 12.0;
        let lambda = s.exp();
        let sd = 1.0 / (lambda * self.mu_precision_factor).sqrt();
        let h = 2.0 * SPAN / mu_intervals as f64;
        let weights = simpson_weights(mu_intervals, h * sd);
        let logs: Vec<f64> = weights
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let mu = self.mu_center + sd * (-SPAN + h * i as f64);
                w.ln() + self.log_at(mu, lambda)
            })
            .collect();
        log_sum_exp(&logs) + s
    }
}

/// Log marginal likelihood of a small group by two-dimensional quadrature
/// over `(μ, log λ)`, refined until successive estimates agree to `1e-8`
/// relative.
pub fn quadrature_log_marginal(prior: &NormalGammaParams, values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Ok(0.0);
    }
    if values.len() > 4 {
        return Err(Error::TooLarge {
            n: values.len(),
            max: 4,
        });
    }
    let f = MarginalIntegrand::new(prior, values);
    // locate the bulk of the log-precision integrand on a coarse scan
    let scan: Vec<(f64, f64)> = (-240..=240)
        .map(|i| {
            let s = i as f64 * 0.25;
            (s, f.log_inner(s, 64))
        })
        .collect();
    let peak = scan.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let inside: Vec<f64> = scan
        .iter()
        .filter(|p| p.1 > peak - 60.0)
        .map(|p| p.0)
        .collect();
    let (s_lo, s_hi) = (inside[0] - 0.5, inside[inside.len() - 1] + 0.5);

    let estimate = |s_intervals: usize, mu_intervals: usize| {
        let h = (s_hi - s_lo) / s_intervals as f64;
        let logs: Vec<f64> = simpson_weights(s_intervals, h)
            .iter()
            .enumerate()
            .map(|(i, w)| w.ln() + f.log_inner(s_lo + h * i as f64, mu_intervals))
            .collect();
        log_sum_exp(&logs)
    };
    let (mut s_intervals, mut mu_intervals) = (64, 32);
    let mut previous = estimate(s_intervals, mu_intervals);
    for _ in 0..QUADRATURE_MAX_REFINEMENTS {
        s_intervals *= 2;
        mu_intervals *= 2;
        let current = estimate(s_intervals, mu_intervals);
        // relative change of the marginal itself
        if (current - previous).abs() < QUADRATURE_TOLERANCE {
            return Ok(current);
        }
        previous = current;
    }
    Err(Error::NonConvergence(QUADRATURE_MAX_REFINEMENTS))
}

/// [`quadrature_log_marginal`] on the natural scale.
pub fn quadrature_marginal(prior: &NormalGammaParams, values: &[f64]) -> Result<f64> {
    quadrature_log_marginal(prior, values).map(f64::exp)
}

/// Exact posterior over all compositions for fixed latent values and fixed
/// total mass: restricted prior times the group marginal likelihoods,
/// normalized.
pub fn enumerate_partition_posterior<M: GroupModel>(
    y: &[f64],
    model: &M,
    alpha: f64,
) -> Result<Vec<(Partition, f64)>> {
    if y.len() > MAX_POSTERIOR_ENUMERATION {
        return Err(Error::TooLarge {
            n: y.len(),
            max: MAX_POSTERIOR_ENUMERATION,
        });
    }
    let parts = enumerate_compositions(y.len())?;
    let logs = parts
        .iter()
        .map(|p| {
            let lik: f64 = p
                .ranges()
                .map(|r| model.log_marginal(&SuffStats::from_slice(&y[r])))
                .sum();
            Ok(log_restricted_prior(p, alpha)? + lik)
        })
        .collect::<Result<Vec<f64>>>()?;
    let norm = log_sum_exp(&logs);
    Ok(parts
        .into_iter()
        .zip(logs)
        .map(|(p, l)| (p, (l - norm).exp()))
        .collect())
}

/// Draws a partition of `n` from the restricted prior by enumeration.
pub fn sample_restricted_prior<R: Rng + ?Sized>(
    n: usize,
    alpha: f64,
    rng: &mut R,
) -> Result<Partition> {
    let parts = enumerate_compositions(n)?;
    let probs = parts
        .iter()
        .map(|p| log_restricted_prior(p, alpha).map(f64::exp))
        .collect::<Result<Vec<_>>>()?;
    let u: f64 = rng.random::<f64>() * probs.iter().sum::<f64>();
    let mut acc = 0.0;
    for (p, w) in parts.iter().zip(&probs) {
        acc += w;
        if u < acc {
            return Ok(p.clone());
        }
    }
    Ok(parts[parts.len() - 1].clone())
}

/// Setup for [`geweke_test`]. The layout's outer bins must be open-ended so
/// that every kernel draw falls in some bin.
#[derive(Debug, Clone, PartialEq)]
pub struct GewekeConfig {
    pub layout: BinLayout,
    pub n: usize,
    pub hyper: Hyperparams,
    /// Draws from each simulator.
    pub samples: usize,
    /// Successive-conditional cycles per retained draw.
    pub thin: usize,
    /// Batches for the batch-means variance of the successive-conditional
    /// averages.
    pub batches: usize,
}

impl Default for GewekeConfig {
    fn default() -> Self {
        Self {
            layout: BinLayout::from_edges(vec![f64::NEG_INFINITY, -1.0, 1.0, f64::INFINITY])
                .expect("static layout"),
            n: 6,
            hyper: Hyperparams {
                omega: 0.0,
                c: 1.0,
                a: 4.0,
                b: 3.0,
                alpha_shape: 2.0,
                alpha_rate: 2.0,
            },
            samples: 2000,
            thin: 10,
            batches: 40,
        }
    }
}

pub const GEWEKE_STATISTICS: [&str; 5] = ["k", "alpha", "weighted_mu", "mean_y", "mean_y2"];

#[derive(Debug, Clone, PartialEq)]
pub struct GewekeReport {
    pub z_scores: [f64; 5],
    pub marginal_means: [f64; 5],
    pub successive_means: [f64; 5],
}

impl GewekeReport {
    pub fn max_abs_z(&self) -> f64 {
        self.z_scores.iter().map(|z| z.abs()).fold(0.0, f64::max)
    }
}

fn test_functions(state: &ChainState) -> [f64; 5] {
    let n = state.n() as f64;
    let weighted_mu: f64 = state
        .partition
        .sizes()
        .iter()
        .zip(&state.params)
        .map(|(&s, th)| th.mu * s as f64)
        .sum::<f64>()
        / n;
    [
        state.partition.num_groups() as f64,
        state.alpha,
        weighted_mu,
        state.y.iter().sum::<f64>() / n,
        state.y.iter().map(|y| y * y).sum::<f64>() / n,
    ]
}

/// Draws `(y, e)` given the partition and group parameters: untruncated
/// kernel draws, then their bins.
fn regenerate_data<R: Rng + ?Sized>(
    state: &mut ChainState,
    layout: &BinLayout,
    rng: &mut R,
) -> Result<()> {
    let ranges: Vec<_> = state.partition.ranges().collect();
    for (range, theta) in ranges.into_iter().zip(&state.params) {
        for i in range {
            let z: f64 = StandardNormal.sample(rng);
            let y = theta.mu + theta.sd() * z;
            state.y[i] = y;
            state.e[i] = layout.locate(y).ok_or(Error::ValueOutOfRange {
                value: y,
                lo: layout.lower(),
                hi: layout.upper(),
            })?;
        }
    }
    Ok(())
}

fn prior_draw<M: GroupModel, R: Rng + ?Sized>(
    config: &GewekeConfig,
    model: &M,
    rng: &mut R,
) -> Result<ChainState> {
    let hyper = &config.hyper;
    let alpha = sample_gamma(hyper.alpha_shape, hyper.alpha_rate, rng)?;
    let partition = sample_restricted_prior(config.n, alpha, rng)?;
    let params = (0..partition.num_groups())
        .map(|_| sample_group_params(model.prior(), rng))
        .collect::<Result<Vec<GroupParams>>>()?;
    let mut state = ChainState {
        y: vec![0.0; config.n],
        e: vec![0; config.n],
        partition,
        params,
        alpha,
    };
    regenerate_data(&mut state, &config.layout, rng)?;
    Ok(state)
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Geweke's comparison of the marginal-conditional simulator (independent
/// prior draws of everything) with the successive-conditional simulator (the
/// kernel under test alternated with fresh data given the parameters), using
/// the exact normal-gamma model.
pub fn geweke_test<R: Rng + ?Sized>(config: &GewekeConfig, rng: &mut R) -> Result<GewekeReport> {
    let model = config.hyper.normal_gamma();
    geweke_test_with_model(config, &model, rng)
}

/// [`geweke_test`] with the kernel built on `model`. The prior draws always
/// use `model.prior()`, so a model with a faulty posterior shows up as a
/// disagreement between the simulators.
pub fn geweke_test_with_model<M: GroupModel + Clone, R: Rng + ?Sized>(
    config: &GewekeConfig,
    model: &M,
    rng: &mut R,
) -> Result<GewekeReport> {
    if config.layout.lower() != f64::NEG_INFINITY || config.layout.upper() != f64::INFINITY {
        return Err(Error::InvalidConfig(
            "the Geweke layout must cover the whole real line".into(),
        ));
    }
    if config.samples < 2 || config.batches < 2 || !config.samples.is_multiple_of(config.batches) {
        return Err(Error::InvalidConfig(format!(
            "{} samples cannot be split into {} batches",
            config.samples, config.batches
        )));
    }
    let sampler_config = SamplerConfig {
        iterations: 1,
        burn_in: 0,
        thin: 1,
        seed: 0,
        move_mix: MoveMix::default(),
        updates: Updates::default(),
    };
    let sampler =
        Sampler::with_model(&config.layout, model.clone(), &config.hyper, sampler_config)?;

    let marginal: Vec<[f64; 5]> = (0..config.samples)
        .map(|_| prior_draw(config, model, rng).map(|s| test_functions(&s)))
        .collect::<Result<_>>()?;

    let mut state = prior_draw(config, model, rng)?;
    let mut counts = MoveCounts::default();
    let mut successive = Vec::with_capacity(config.samples);
    for _ in 0..config.samples {
        for _ in 0..config.thin {
            sampler.step(&mut state, &mut counts, rng)?;
            regenerate_data(&mut state, &config.layout, rng)?;
        }
        successive.push(test_functions(&state));
    }

    let batch_len = config.samples / config.batches;
    let mut report = GewekeReport {
        z_scores: [0.0; 5],
        marginal_means: [0.0; 5],
        successive_means: [0.0; 5],
    };
    for f in 0..5 {
        let mc: Vec<f64> = marginal.iter().map(|g| g[f]).collect();
        let sc: Vec<f64> = successive.iter().map(|g| g[f]).collect();
        let (mc_mean, mc_var) = mean_var(&mc);
        let sc_mean = sc.iter().sum::<f64>() / sc.len() as f64;
        let batch_means: Vec<f64> = sc
            .chunks(batch_len)
            .map(|b| b.iter().sum::<f64>() / b.len() as f64)
            .collect();
        let (_, batch_var) = mean_var(&batch_means);
        let se = (mc_var / mc.len() as f64 + batch_var / config.batches as f64).sqrt();
        report.z_scores[f] = (mc_mean - sc_mean) / se;
        report.marginal_means[f] = mc_mean;
        report.successive_means[f] = sc_mean;
    }
    Ok(report)
}
