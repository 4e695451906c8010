//! Point estimates from a trace, conditioned on the modal partition.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::distributions::std_normal_pdf;
use crate::error::{Error, Result};
use crate::types::{BinLayout, Partition, Trace};

/// Most frequent partition in the trace together with its visit count.
///
/// Ties go to the partition with fewer groups, then to the lexicographically
/// smallest sizes.
pub fn modal_partition_with_count(trace: &Trace) -> Result<(Partition, usize)> {
    let mut counts: HashMap<&Partition, usize> = HashMap::new();
    for p in &trace.partitions {
        *counts.entry(p).or_default() += 1;
    }
    counts
        .into_iter()
        .min_by(|(pa, ca), (pb, cb)| {
            cb.cmp(ca)
                .then(pa.num_groups().cmp(&pb.num_groups()))
                .then(pa.sizes().cmp(pb.sizes()))
        })
        .map(|(p, c)| (p.clone(), c))
        .ok_or(Error::EmptyTrace)
}

pub fn modal_partition(trace: &Trace) -> Result<Partition> {
    modal_partition_with_count(trace).map(|(p, _)| p)
}

/// Posterior mean and standard deviation of one group's kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupEstimate {
    pub mean: f64,
    pub sd: f64,
}

fn matching_draws<'a>(
    trace: &'a Trace,
    pi_hat: &'a Partition,
) -> Result<impl Iterator<Item = usize> + 'a> {
    if !trace.partitions.iter().any(|p| p == pi_hat) {
        return Err(Error::PartitionNeverVisited(pi_hat.to_string()));
    }
    Ok(trace
        .partitions
        .iter()
        .enumerate()
        .filter(move |(_, p)| *p == pi_hat)
        .map(|(t, _)| t))
}

/// Averages group means over the draws whose partition equals `pi_hat`; the
/// reported sd is the average of `λ^{-1/2}` over the same draws.
pub fn conditional_param_estimates(
    trace: &Trace,
    pi_hat: &Partition,
) -> Result<Vec<GroupEstimate>> {
    let k = pi_hat.num_groups();
    let mut mean = vec![0.0; k];
    let mut sd = vec![0.0; k];
    let mut count = 0usize;
    for t in matching_draws(trace, pi_hat)? {
        for (j, theta) in trace.params_draws[t].iter().enumerate() {
            mean[j] += theta.mu;
            sd[j] += theta.sd();
        }
        count += 1;
    }
    let count = count as f64;
    Ok(mean
        .into_iter()
        .zip(sd)
        .map(|(m, s)| GroupEstimate {
            mean: m / count,
            sd: s / count,
        })
        .collect())
}

/// Mixture density averaged over the draws whose partition equals `pi_hat`,
/// each draw weighting group `j` by `n_j / n`.
pub fn conditional_density(trace: &Trace, pi_hat: &Partition, grid: &[f64]) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return Err(Error::InvalidParams("density grid is empty".into()));
    }
    let weights = mixing_weights(pi_hat, pi_hat.n());
    let mut density = vec![0.0; grid.len()];
    let mut count = 0usize;
    for t in matching_draws(trace, pi_hat)? {
        for (theta, w) in trace.params_draws[t].iter().zip(&weights) {
            let sd = theta.sd();
            for (f, &x) in density.iter_mut().zip(grid) {
                *f += w * std_normal_pdf((x - theta.mu) / sd) / sd;
            }
        }
        count += 1;
    }
    let count = count as f64;
    density.iter_mut().for_each(|f| *f /= count);
    Ok(density)
}

/// Group sizes divided by the sample size.
pub fn mixing_weights(pi_hat: &Partition, n: usize) -> Vec<f64> {
    pi_hat
        .sizes()
        .iter()
        .map(|&s| s as f64 / n as f64)
        .collect()
}

/// Indices `j` (0-based) where the estimated mean of group `j + 1` does not
/// exceed that of group `j`. Index-ordered groups are expected to have
/// increasing means, but this is not guaranteed.
pub fn mean_order_violations(estimates: &[GroupEstimate]) -> Vec<usize> {
    estimates
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1].mean <= w[0].mean)
        .map(|(j, _)| j)
        .collect()
}

/// Default evaluation grid: `points` equally spaced values over the binned
/// range widened by 5% on each side. Open-ended outer bins are replaced by
/// their finite edge.
pub fn default_grid(layout: &BinLayout, points: usize) -> Result<Vec<f64>> {
    let finite: Vec<f64> = layout
        .edges
        .iter()
        .copied()
        .filter(|e| e.is_finite())
        .collect();
    if finite.len() < 2 || points < 2 {
        return Err(Error::InvalidParams(
            "density grid needs two finite edges and at least two points".into(),
        ));
    }
    let (lo, hi) = (finite[0], finite[finite.len() - 1]);
    let pad = 0.05 * (hi - lo);
    let (start, end) = (lo - pad, hi + pad);
    let step = (end - start) / (points - 1) as f64;
    Ok((0..points)
        .map(|i| {
            if i + 1 == points {
                end
            } else {
                start + step * i as f64
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::GroupParams;

    fn part(sizes: &[usize]) -> Partition {
        Partition::new(sizes.to_vec()).unwrap()
    }

    type Draw = (Vec<usize>, Vec<(f64, f64)>);

    fn trace_of(draws: Vec<Draw>) -> Trace {
        let mut trace = Trace::default();
        for (t, (sizes, params)) in draws.into_iter().enumerate() {
            trace.iterations.push(t);
            trace.partitions.push(part(&sizes));
            trace.params_draws.push(
                params
                    .into_iter()
                    .map(|(mu, lambda)| GroupParams { mu, lambda })
                    .collect(),
            );
            trace.alpha_draws.push(1.0);
        }
        trace
    }

    fn sizes_only(parts: &[&[usize]]) -> Trace {
        trace_of(
            parts
                .iter()
                .map(|s| (s.to_vec(), vec![(0.0, 1.0); s.len()]))
                .collect(),
        )
    }

    #[test]
    fn mode_counts() {
        assert_eq!(
            modal_partition(&sizes_only(&[&[2, 1], &[2, 1], &[3]])).unwrap(),
            part(&[2, 1])
        );
        assert_eq!(
            modal_partition(&sizes_only(&[&[3], &[2, 1]])).unwrap(),
            part(&[3])
        );
        assert_eq!(
            modal_partition(&sizes_only(&[&[2, 1], &[1, 2]])).unwrap(),
            part(&[1, 2])
        );
        assert_eq!(
            modal_partition(&sizes_only(&[&[1, 1, 1]])).unwrap(),
            part(&[1, 1, 1])
        );
        assert_eq!(modal_partition(&Trace::default()), Err(Error::EmptyTrace));
        let (p, c) = modal_partition_with_count(&sizes_only(&[&[3], &[2, 1], &[3]])).unwrap();
        assert_eq!((p, c), (part(&[3]), 2));
    }

    #[test]
    fn parameter_averages() {
        let trace = trace_of(vec![
            (vec![2, 2], vec![(1.0, 4.0), (10.0, 1.0)]),
            (vec![4], vec![(50.0, 1.0)]),
            (vec![2, 2], vec![(3.0, 1.0), (12.0, 1.0)]),
        ]);
        let est = conditional_param_estimates(&trace, &part(&[2, 2])).unwrap();
        assert_eq!(est[0].mean, 2.0);
        assert_eq!(est[1].mean, 11.0);
        // average of 1/sqrt(4) and 1/sqrt(1)
        assert_eq!(est[0].sd, 0.75);
        assert_eq!(
            conditional_param_estimates(&trace, &part(&[1, 3])),
            Err(Error::PartitionNeverVisited("1-3".into()))
        );
    }

    #[test]
    fn single_component_density() {
        let trace = trace_of(vec![(vec![3], vec![(0.0, 1.0)])]);
        let grid = [-2.0, -0.5, 0.0, 1.3];
        let f = conditional_density(&trace, &part(&[3]), &grid).unwrap();
        for (x, v) in grid.iter().zip(f) {
            assert!((v - std_normal_pdf(*x)).abs() < 1e-15);
        }
    }

    #[test]
    fn density_integrates_to_one() {
        let trace = trace_of(vec![
            (vec![3, 5], vec![(0.0, 1.0), (4.0, 0.25)]),
            (vec![3, 5], vec![(0.5, 2.0), (3.5, 0.5)]),
        ]);
        // widest component has sd 2; cover ±8 sd around the extreme means
        let (lo, hi) = (0.0 - 16.0, 4.0 + 16.0);
        let grid: Vec<f64> = (0..=20_000)
            .map(|i| lo + (hi - lo) * i as f64 / 20_000.0)
            .collect();
        let f = conditional_density(&trace, &part(&[3, 5]), &grid).unwrap();
        assert!(f.iter().all(|&v| v >= 0.0));
        let h = grid[1] - grid[0];
        let integral: f64 = f.windows(2).map(|w| 0.5 * h * (w[0] + w[1])).sum();
        assert!((integral - 1.0).abs() < 1e-3, "{integral}");
    }

    #[test]
    fn weights() {
        let w = mixing_weights(&part(&[150, 92, 117, 141]), 500);
        let expected = [0.300, 0.184, 0.234, 0.282];
        for (a, b) in w.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(mixing_weights(&part(&[7]), 7), vec![1.0]);
        assert_eq!(mixing_weights(&part(&[1, 1]), 2), vec![0.5, 0.5]);
    }

    #[test]
    fn order_violations() {
        let est = |m: &[f64]| {
            m.iter()
                .map(|&mean| GroupEstimate { mean, sd: 1.0 })
                .collect::<Vec<_>>()
        };
        assert!(mean_order_violations(&est(&[1.0, 2.0, 3.0])).is_empty());
        assert_eq!(mean_order_violations(&est(&[1.0, 3.0, 2.0])), vec![1]);
    }

    #[test]
    fn grid_spans_padded_range() {
        let layout = BinLayout::uniform(5.0, 35.0, 30).unwrap();
        let g = default_grid(&layout, 512).unwrap();
        assert_eq!(g.len(), 512);
        assert!((g[0] - 3.5).abs() < 1e-12);
        assert_eq!(g[511], 36.5);
    }
}
