//! Shared domain records and their validity rules.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::conjugate::NormalGammaParams;
use crate::error::{Error, Result};

/// Bin edges `t_0 < t_1 < ... < t_m`, with bin `l` covering `(t_{l-1}, t_l]`.
///
/// The outer edges may be infinite, which gives open-ended first or last
/// bins. Centers are optional; they are kept when the layout was derived from
/// representative values and otherwise reported as midpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinLayout {
    pub edges: Vec<f64>,
    pub centers: Option<Vec<f64>>,
}

impl BinLayout {
    pub fn from_edges(edges: Vec<f64>) -> Result<Self> {
        let layout = Self {
            edges,
            centers: None,
        };
        layout.validate()?;
        Ok(layout)
    }

    pub fn with_centers(edges: Vec<f64>, centers: Vec<f64>) -> Result<Self> {
        let layout = Self {
            edges,
            centers: Some(centers),
        };
        layout.validate()?;
        Ok(layout)
    }

    /// Unit-width (or any constant-width) bins covering `(lo, hi]`.
    pub fn uniform(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::LengthMismatch {
                expected: 1,
                found: 0,
            });
        }
        let width = (hi - lo) / bins as f64;
        let edges = (0..=bins).map(|l| lo + width * l as f64).collect();
        Self::from_edges(edges)
    }

    pub fn validate(&self) -> Result<()> {
        let edges = &self.edges;
        if edges.len() < 2 {
            return Err(Error::LengthMismatch {
                expected: 2,
                found: edges.len(),
            });
        }
        for (i, e) in edges.iter().enumerate() {
            let interior = i > 0 && i + 1 < edges.len();
            if e.is_nan() || (interior && e.is_infinite()) {
                return Err(Error::NonIncreasingEdges { index: i });
            }
        }
        if edges[0] == f64::INFINITY || edges[edges.len() - 1] == f64::NEG_INFINITY {
            return Err(Error::NonIncreasingEdges { index: 0 });
        }
        if let Some(i) = edges.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::NonIncreasingEdges { index: i + 1 });
        }
        if let Some(centers) = &self.centers {
            if centers.len() != self.num_bins() {
                return Err(Error::LengthMismatch {
                    expected: self.num_bins(),
                    found: centers.len(),
                });
            }
            for (l, &c) in centers.iter().enumerate() {
                if !(c > edges[l] && c <= edges[l + 1]) {
                    return Err(Error::CenterOutsideBin { bin: l + 1 });
                }
            }
        }
        Ok(())
    }

    pub fn num_bins(&self) -> usize {
        self.edges.len() - 1
    }

    /// `(t_{l-1}, t_l)` for the 0-based bin index `bin`.
    pub fn bounds(&self, bin: usize) -> (f64, f64) {
        (self.edges[bin], self.edges[bin + 1])
    }

    pub fn lower(&self) -> f64 {
        self.edges[0]
    }

    pub fn upper(&self) -> f64 {
        self.edges[self.edges.len() - 1]
    }

    /// Representative value of a bin: the supplied center, else the midpoint.
    /// Open-ended bins fall back to their finite edge.
    pub fn center(&self, bin: usize) -> f64 {
        if let Some(centers) = &self.centers {
            return centers[bin];
        }
        let (lo, hi) = self.bounds(bin);
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) => 0.5 * (lo + hi),
            (true, false) => lo,
            (false, true) => hi,
            (false, false) => 0.0,
        }
    }

    /// 0-based index of the bin containing `x`, if any.
    pub fn locate(&self, x: f64) -> Option<usize> {
        if x.is_nan() || x <= self.lower() || x > self.upper() {
            return None;
        }
        // first edge >= x is the right edge of x's bin
        let right = self.edges.partition_point(|&t| t < x);
        Some(right - 1)
    }

    pub fn contains(&self, bin: usize, x: f64) -> bool {
        let (lo, hi) = self.bounds(bin);
        x > lo && x <= hi
    }
}

/// Frequencies over a [`BinLayout`]; the only observed data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedDataset {
    pub layout: BinLayout,
    pub freqs: Vec<u64>,
    pub n: usize,
}

impl BinnedDataset {
    pub fn new(layout: BinLayout, freqs: Vec<u64>) -> Result<Self> {
        let n = freqs.iter().sum::<u64>() as usize;
        let dataset = Self { layout, freqs, n };
        validate_dataset(&dataset)?;
        Ok(dataset)
    }

    pub fn num_bins(&self) -> usize {
        self.layout.num_bins()
    }
}

/// Checks every layout and frequency invariant of a dataset.
pub fn validate_dataset(dataset: &BinnedDataset) -> Result<()> {
    dataset.layout.validate()?;
    if dataset.freqs.len() != dataset.layout.num_bins() {
        return Err(Error::LengthMismatch {
            expected: dataset.layout.num_bins(),
            found: dataset.freqs.len(),
        });
    }
    let total: u64 = dataset.freqs.iter().sum();
    if total == 0 {
        return Err(Error::EmptyDataset);
    }
    if total as usize != dataset.n {
        return Err(Error::LengthMismatch {
            expected: total as usize,
            found: dataset.n,
        });
    }
    Ok(())
}

/// A gap-free partition of the indices `1..=n`, stored as the composition of
/// its group sizes `(n_1, ..., n_k)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Partition(Vec<usize>);

impl Partition {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidPartition("no groups".into()));
        }
        if sizes.contains(&0) {
            return Err(Error::InvalidPartition(format!(
                "empty group in {}",
                Partition(sizes)
            )));
        }
        Ok(Self(sizes))
    }

    /// The one-group partition `(n)`.
    pub fn single(n: usize) -> Result<Self> {
        Self::new(vec![n])
    }

    pub fn sizes(&self) -> &[usize] {
        &self.0
    }

    pub fn into_sizes(self) -> Vec<usize> {
        self.0
    }

    pub fn num_groups(&self) -> usize {
        self.0.len()
    }

    pub fn n(&self) -> usize {
        self.0.iter().sum()
    }

    /// Index ranges of the groups, in order.
    pub fn ranges(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        self.0.iter().scan(0, |start, &size| {
            let r = *start..*start + size;
            *start += size;
            Some(r)
        })
    }

    pub fn range(&self, group: usize) -> Range<usize> {
        let start: usize = self.0[..group].iter().sum();
        start..start + self.0[group]
    }

    /// Group label of every index.
    pub fn labels(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(j, &size)| std::iter::repeat_n(j, size))
            .collect()
    }

    pub fn num_splittable(&self) -> usize {
        self.0.iter().filter(|&&s| s >= 2).count()
    }

    /// Splits `group` after its first `cut` elements (`1 <= cut < n_j`).
    pub fn split(&self, group: usize, cut: usize) -> Result<Self> {
        let size = *self
            .0
            .get(group)
            .ok_or_else(|| Error::InvalidPartition(format!("no group {}", group + 1)))?;
        if cut == 0 || cut >= size {
            return Err(Error::InvalidPartition(format!(
                "cut {cut} outside 1..{size} for group {}",
                group + 1
            )));
        }
        let mut sizes = self.0.clone();
        sizes[group] = cut;
        sizes.insert(group + 1, size - cut);
        Ok(Self(sizes))
    }

    /// Merges groups `pair` and `pair + 1`.
    pub fn merge(&self, pair: usize) -> Result<Self> {
        if pair + 1 >= self.0.len() {
            return Err(Error::InvalidPartition(format!(
                "no adjacent pair {} in {} groups",
                pair + 1,
                self.0.len()
            )));
        }
        let mut sizes = self.0.clone();
        let right = sizes.remove(pair + 1);
        sizes[pair] += right;
        Ok(Self(sizes))
    }

    /// Moves the boundary between groups `pair` and `pair + 1` so that the
    /// left group has `left` elements.
    pub fn reshuffle(&self, pair: usize, left: usize) -> Result<Self> {
        if pair + 1 >= self.0.len() {
            return Err(Error::InvalidPartition(format!(
                "no adjacent pair {} in {} groups",
                pair + 1,
                self.0.len()
            )));
        }
        let total = self.0[pair] + self.0[pair + 1];
        if left == 0 || left >= total {
            return Err(Error::InvalidPartition(format!(
                "boundary {left} outside 1..{total}"
            )));
        }
        let mut sizes = self.0.clone();
        sizes[pair] = left;
        sizes[pair + 1] = total - left;
        Ok(Self(sizes))
    }
}

impl fmt::Display for Partition {
    /// Dash-joined sizes, e.g. `150-92-117-141`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (j, s) in self.0.iter().enumerate() {
            if j > 0 {
                f.write_str("-")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let sizes = s
            .split('-')
            .map(|tok| {
                tok.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidPartition(format!("bad size token {tok:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(sizes)
    }
}

/// Kernel parameters of one group: mean and precision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupParams {
    pub mu: f64,
    pub lambda: f64,
}

impl GroupParams {
    pub fn sd(&self) -> f64 {
        self.lambda.sqrt().recip()
    }
}

/// Normal-gamma base measure `(omega, c, a, b)` plus the gamma hyperprior
/// (shape, rate) of the total mass parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub omega: f64,
    pub c: f64,
    pub a: f64,
    pub b: f64,
    pub alpha_shape: f64,
    pub alpha_rate: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            omega: 0.0,
            c: 1.0,
            a: 1.1,
            b: 1.0,
            alpha_shape: 1.0,
            alpha_rate: 1.1,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("c", self.c),
            ("a", self.a),
            ("b", self.b),
            ("alpha_shape", self.alpha_shape),
            ("alpha_rate", self.alpha_rate),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !self.omega.is_finite() {
            return Err(Error::InvalidParams(format!(
                "omega must be finite, got {}",
                self.omega
            )));
        }
        Ok(())
    }

    pub fn normal_gamma(&self) -> NormalGammaParams {
        NormalGammaParams {
            omega: self.omega,
            c: self.c,
            a: self.a,
            b: self.b,
        }
    }
}

/// One state of the Markov chain.
///
/// `e` holds 0-based bin indices. Indices are ordered so that each group of
/// `partition` is a contiguous block of `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub y: Vec<f64>,
    pub e: Vec<usize>,
    pub partition: Partition,
    pub params: Vec<GroupParams>,
    pub alpha: f64,
}

impl ChainState {
    pub fn new(
        y: Vec<f64>,
        e: Vec<usize>,
        partition: Partition,
        params: Vec<GroupParams>,
        alpha: f64,
        layout: &BinLayout,
    ) -> Result<Self> {
        let state = Self {
            y,
            e,
            partition,
            params,
            alpha,
        };
        state.check(layout)?;
        Ok(state)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    /// Verifies that every latent value sits in its bin, the partition covers
    /// all indices and there is one parameter pair per group.
    pub fn check(&self, layout: &BinLayout) -> Result<()> {
        if self.e.len() != self.y.len() {
            return Err(Error::InvalidState(format!(
                "{} latent values but {} bin indices",
                self.y.len(),
                self.e.len()
            )));
        }
        if self.partition.n() != self.y.len() {
            return Err(Error::InvalidState(format!(
                "partition {} does not cover {} observations",
                self.partition,
                self.y.len()
            )));
        }
        if self.params.len() != self.partition.num_groups() {
            return Err(Error::InvalidState(format!(
                "{} parameter pairs for {} groups",
                self.params.len(),
                self.partition.num_groups()
            )));
        }
        for (i, (&y, &bin)) in self.y.iter().zip(&self.e).enumerate() {
            if bin >= layout.num_bins() || !layout.contains(bin, y) {
                return Err(Error::InvalidState(format!(
                    "y[{}] = {y} is outside bin {}",
                    i + 1,
                    bin + 1
                )));
            }
        }
        if let Some(p) = self
            .params
            .iter()
            .find(|p| p.lambda.is_nan() || p.lambda <= 0.0)
        {
            return Err(Error::InvalidState(format!(
                "non-positive precision {}",
                p.lambda
            )));
        }
        if self.alpha.is_nan() || self.alpha <= 0.0 {
            return Err(Error::InvalidAlpha(self.alpha));
        }
        Ok(())
    }
}

/// Acceptance bookkeeping for the partition moves.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveCounts {
    pub split_proposed: u64,
    pub split_accepted: u64,
    pub merge_proposed: u64,
    pub merge_accepted: u64,
    pub shuffle_proposed: u64,
    pub shuffle_accepted: u64,
}

/// Retained draws of a chain.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    /// 0-based iteration index of every retained draw.
    pub iterations: Vec<usize>,
    pub partitions: Vec<Partition>,
    pub params_draws: Vec<Vec<GroupParams>>,
    pub alpha_draws: Vec<f64>,
    pub moves: MoveCounts,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.partitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partitions.is_empty()
    }

    pub fn push(&mut self, iteration: usize, state: &ChainState) {
        self.iterations.push(iteration);
        self.partitions.push(state.partition.clone());
        self.params_draws.push(state.params.clone());
        self.alpha_draws.push(state.alpha);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dataset(edges: Vec<f64>, freqs: Vec<u64>) -> Result<BinnedDataset> {
        BinnedDataset::new(BinLayout::from_edges(edges)?, freqs)
    }

    #[test]
    fn well_formed_dataset_validates() {
        let d = dataset(vec![0.0, 1.0, 2.0], vec![3, 4]).unwrap();
        assert_eq!(d.n, 7);
        assert!(validate_dataset(&d).is_ok());
    }

    #[test]
    fn repeated_edge_is_rejected() {
        assert_eq!(
            dataset(vec![0.0, 1.0, 1.0], vec![1, 1]),
            Err(Error::NonIncreasingEdges { index: 2 })
        );
    }

    #[test]
    fn zero_total_is_rejected() {
        assert_eq!(dataset(vec![0.0, 1.0], vec![0]), Err(Error::EmptyDataset));
    }

    #[test]
    fn center_outside_bin_is_rejected() {
        let err = BinLayout::with_centers(vec![0.0, 1.0, 2.0], vec![0.5, 2.5]).unwrap_err();
        assert_eq!(err, Error::CenterOutsideBin { bin: 2 });
        // left edge is exclusive
        let err = BinLayout::with_centers(vec![0.0, 1.0], vec![0.0]).unwrap_err();
        assert_eq!(err, Error::CenterOutsideBin { bin: 1 });
        assert!(BinLayout::with_centers(vec![0.0, 1.0], vec![1.0]).is_ok());
    }

    #[test]
    fn tampered_total_is_rejected() {
        let mut d = dataset(vec![0.0, 1.0, 2.0], vec![3, 4]).unwrap();
        d.n = 6;
        assert!(validate_dataset(&d).is_err());
    }

    #[test]
    fn open_ended_outer_bins() {
        let layout =
            BinLayout::from_edges(vec![f64::NEG_INFINITY, 0.0, 1.0, f64::INFINITY]).unwrap();
        assert_eq!(layout.locate(-1e300), Some(0));
        assert_eq!(layout.locate(0.0), Some(0));
        assert_eq!(layout.locate(0.5), Some(1));
        assert_eq!(layout.locate(1e300), Some(2));
        assert!(BinLayout::from_edges(vec![0.0, f64::INFINITY, 2.0]).is_err());
        assert!(BinLayout::from_edges(vec![0.0, f64::NAN]).is_err());
    }

    #[test]
    fn locate_uses_right_closed_bins() {
        let layout = BinLayout::from_edges(vec![0.0, 1.0, 2.0]).unwrap();
        assert_eq!(layout.locate(0.0), None);
        assert_eq!(layout.locate(1.0), Some(0));
        assert_eq!(layout.locate(1.0 + 1e-15), Some(1));
        assert_eq!(layout.locate(2.0), Some(1));
        assert_eq!(layout.locate(2.5), None);
    }

    #[test]
    fn partition_structure() {
        let p = Partition::new(vec![3, 2, 4]).unwrap();
        assert_eq!(p.n(), 9);
        assert_eq!(p.ranges().collect::<Vec<_>>(), vec![0..3, 3..5, 5..9]);
        assert_eq!(p.range(2), 5..9);
        assert_eq!(p.labels(), vec![0, 0, 0, 1, 1, 2, 2, 2, 2]);
        assert_eq!(p.to_string(), "3-2-4");
        assert_eq!("3-2-4".parse::<Partition>().unwrap(), p);
        assert!(Partition::new(vec![2, 0]).is_err());
        assert!(Partition::new(vec![]).is_err());
    }

    #[test]
    fn partition_edits() {
        let p = Partition::new(vec![5]).unwrap();
        assert_eq!(p.split(0, 2).unwrap().sizes(), &[2, 3]);
        assert!(p.split(0, 5).is_err());
        let q = Partition::new(vec![2, 3]).unwrap();
        assert_eq!(q.merge(0).unwrap().sizes(), &[5]);
        assert_eq!(q.reshuffle(0, 4).unwrap().sizes(), &[4, 1]);
        assert!(q.reshuffle(0, 5).is_err());
        assert!(q.merge(1).is_err());
    }

    #[test]
    fn chain_state_checks_bins() {
        let layout = BinLayout::from_edges(vec![0.0, 1.0, 2.0]).unwrap();
        let params = vec![GroupParams {
            mu: 0.0,
            lambda: 1.0,
        }];
        let p = Partition::single(2).unwrap();
        assert!(ChainState::new(
            vec![0.5, 1.5],
            vec![0, 1],
            p.clone(),
            params.clone(),
            1.0,
            &layout
        )
        .is_ok());
        assert!(ChainState::new(
            vec![0.5, 0.5],
            vec![0, 1],
            p.clone(),
            params.clone(),
            1.0,
            &layout
        )
        .is_err());
        assert!(ChainState::new(vec![0.0, 1.5], vec![0, 1], p, params, 1.0, &layout).is_err());
    }
}
