#![allow(dead_code)]

use std::collections::HashMap;

use binclust::conjugate::{GroupModel, NormalGammaParams, SuffStats};
use binclust::distributions::{chain_rng, truncated_normal_cdf};
use binclust::oracle::enumerate_partition_posterior;
use binclust::sampler::{Sampler, SamplerConfig, Updates};
use binclust::{BinLayout, ChainState, Hyperparams, Partition};

/// Normal-gamma model whose posterior rate forgets the prior-mean term.
#[derive(Debug, Clone)]
pub struct DropMeanShrinkage(pub NormalGammaParams);

impl GroupModel for DropMeanShrinkage {
    fn prior(&self) -> &NormalGammaParams {
        &self.0
    }

    fn posterior(&self, stats: &SuffStats) -> NormalGammaParams {
        let exact = binclust::conjugate::posterior_from_stats(&self.0, stats);
        NormalGammaParams {
            b: self.0.b + 0.5 * stats.ssd,
            ..exact
        }
    }
}

pub fn exactness_hyper() -> Hyperparams {
    Hyperparams {
        omega: 1.0,
        c: 1.0,
        a: 2.0,
        b: 0.5,
        alpha_shape: 1.0,
        alpha_rate: 1.0,
    }
}

pub fn exactness_layout() -> BinLayout {
    BinLayout::from_edges(vec![0.0, 1.0, 2.0]).unwrap()
}

/// Four latent values in two bins.
pub const EXACTNESS_Y: [f64; 4] = [0.2, 0.9, 1.1, 1.7];

pub struct Exactness {
    pub total_variation: f64,
    pub exact: Vec<(Partition, f64)>,
    pub empirical: HashMap<Partition, f64>,
}

/// Runs the partition kernel with `y` and `alpha` held fixed and compares the
/// visit frequencies with the enumerated posterior.
pub fn fixed_y_exactness(alpha: f64, iterations: usize, seed: u64) -> Exactness {
    let layout = exactness_layout();
    let hyper = exactness_hyper();
    let config = SamplerConfig {
        iterations,
        burn_in: 0,
        thin: 1,
        seed,
        updates: Updates {
            partition: true,
            latent: false,
            params: true,
            alpha: false,
        },
        ..Default::default()
    };
    let sampler = Sampler::new(&layout, &hyper, config).unwrap();
    let model = hyper.normal_gamma();
    let mut rng = chain_rng(seed, 0);
    let state = ChainState::new(
        EXACTNESS_Y.to_vec(),
        vec![0, 0, 1, 1],
        Partition::single(4).unwrap(),
        vec![binclust::GroupParams {
            mu: 1.0,
            lambda: 1.0,
        }],
        alpha,
        &layout,
    )
    .unwrap();
    let (trace, _) = sampler.run(state, &mut rng).unwrap();
    let mut empirical: HashMap<Partition, f64> = HashMap::new();
    for p in &trace.partitions {
        *empirical.entry(p.clone()).or_default() += 1.0 / trace.len() as f64;
    }
    let exact = enumerate_partition_posterior(&EXACTNESS_Y, &model, alpha).unwrap();
    let total_variation = 0.5
        * exact
            .iter()
            .map(|(p, q)| (empirical.get(p).copied().unwrap_or(0.0) - q).abs())
            .sum::<f64>();
    Exactness {
        total_variation,
        exact,
        empirical,
    }
}

/// Kolmogorov-Smirnov statistic of `draws` against `cdf`.
pub fn ks_statistic(draws: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    draws.sort_by(f64::total_cmp);
    let n = draws.len() as f64;
    draws
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value at level 0.01.
pub fn ks_critical_01(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

/// Truncated normal parameter sets `(mu, sd, lo, hi)` covering the body,
/// both tails, one-sided and narrow intervals.
pub fn truncated_normal_cases(count: usize, seed: u64) -> Vec<(f64, f64, f64, f64)> {
    use rand::Rng;
    let mut rng = chain_rng(seed, 0);
    (0..count)
        .map(|i| {
            let mu = rng.random_range(-3.0..3.0);
            let sd = rng.random_range(0.2..3.0);
            let width = rng.random_range(0.05..4.0) * sd;
            let offset = match i % 4 {
                0 => rng.random_range(-1.0..1.0) * sd,
                1 => rng.random_range(4.0..9.0) * sd,
                2 => -rng.random_range(4.0..9.0) * sd - width,
                _ => rng.random_range(-2.0..2.0) * sd,
            };
            let lo = mu + offset;
            let hi = lo + width;
            match i % 10 {
                3 => (mu, sd, f64::NEG_INFINITY, hi),
                7 => (mu, sd, lo, f64::INFINITY),
                _ => (mu, sd, lo, hi),
            }
        })
        .collect()
}

pub fn truncated_cdf(mu: f64, sd: f64, lo: f64, hi: f64) -> impl Fn(f64) -> f64 {
    move |x| truncated_normal_cdf(x, mu, sd, lo, hi)
}
