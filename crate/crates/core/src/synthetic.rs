//! Synthetic data: the four-component benchmark mixture and binning of raw
//! values.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::binning::edges_from_midpoints;
use crate::distributions::chain_rng;
use crate::error::{Error, Result};
use crate::types::{BinLayout, BinnedDataset};

/// One normal component: weight, mean and variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Component {
    pub weight: f64,
    pub mean: f64,
    pub variance: f64,
}

/// `0.3 N(8, 1) + 0.2 N(16, 6) + 0.2 N(24, 1) + 0.3 N(30, 4)`, variances as
/// second parameters.
pub const BENCHMARK_MIXTURE: [Component; 4] = [
    Component {
        weight: 0.3,
        mean: 8.0,
        variance: 1.0,
    },
    Component {
        weight: 0.2,
        mean: 16.0,
        variance: 6.0,
    },
    Component {
        weight: 0.2,
        mean: 24.0,
        variance: 1.0,
    },
    Component {
        weight: 0.3,
        mean: 30.0,
        variance: 4.0,
    },
];

/// Range and bin count used to bin the benchmark sample: unit bins on (5, 35].
pub const BENCHMARK_RANGE: (f64, f64) = (5.0, 35.0);
pub const BENCHMARK_BINS: usize = 30;

/// Draws `(component index, value)` pairs from a mixture.
pub fn sample_mixture_labeled<R: Rng + ?Sized>(
    components: &[Component],
    n: usize,
    rng: &mut R,
) -> Result<Vec<(usize, f64)>> {
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let total: f64 = components.iter().map(|c| c.weight).sum();
    Ok((0..n)
        .map(|_| {
            let u: f64 = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let label = components
                .iter()
                .position(|c| {
                    acc += c.weight;
                    u < acc
                })
                .unwrap_or(components.len() - 1);
            let c = &components[label];
            let z: f64 = StandardNormal.sample(rng);
            (label, c.mean + c.variance.sqrt() * z)
        })
        .collect())
}

/// `n` i.i.d. draws from [`BENCHMARK_MIXTURE`].
pub fn sample_benchmark_mixture<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Vec<f64>> {
    Ok(sample_mixture_labeled(&BENCHMARK_MIXTURE, n, rng)?
        .into_iter()
        .map(|(_, y)| y)
        .collect())
}

/// Counts values per bin with right-closed bins `(t_{l-1}, t_l]`.
pub fn bin_data(values: &[f64], layout: &BinLayout) -> Result<BinnedDataset> {
    let mut freqs = vec![0u64; layout.num_bins()];
    for &v in values {
        let bin = layout.locate(v).ok_or(Error::ValueOutOfRange {
            value: v,
            lo: layout.lower(),
            hi: layout.upper(),
        })?;
        freqs[bin] += 1;
    }
    BinnedDataset::new(layout.clone(), freqs)
}

/// The benchmark layout: unit bins over (5, 35], described by their centers
/// 5.5, 6.5, ..., 34.5.
pub fn benchmark_layout() -> Result<BinLayout> {
    let (lo, _) = BENCHMARK_RANGE;
    let centers: Vec<f64> = (0..BENCHMARK_BINS).map(|l| lo + 0.5 + l as f64).collect();
    edges_from_midpoints(&centers)
}

/// Simulates `n` benchmark values inside the binning range and bins them.
///
/// Draws falling outside (5, 35] are discarded and replaced, so the dataset
/// always has exactly `n` observations.
pub fn simulate_benchmark(n: usize, seed: u64) -> Result<BinnedDataset> {
    let layout = benchmark_layout()?;
    let mut rng = chain_rng(seed, 0);
    let mut values = Vec::with_capacity(n);
    while values.len() < n {
        let batch = sample_benchmark_mixture(n - values.len(), &mut rng)?;
        values.extend(batch.into_iter().filter(|&v| layout.locate(v).is_some()));
    }
    bin_data(&values, &layout)
}
