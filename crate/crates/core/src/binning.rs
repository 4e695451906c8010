//! Bin construction from representative values and expansion of frequencies
//! into per-observation bin memberships.

use crate::error::{Error, Result};
use crate::types::BinLayout;

/// Derives bin edges from increasing bin centers.
///
/// Interior edges sit halfway between neighbouring centers; the outer edges
/// mirror the first and last gaps, so `t_0 = τ_1 - (τ_2 - τ_1)/2` and
/// `t_m = τ_m + (τ_m - τ_{m-1})/2`.
pub fn edges_from_midpoints(centers: &[f64]) -> Result<BinLayout> {
    let m = centers.len();
    if m < 2 {
        return Err(Error::TooFewCenters(m));
    }
    if let Some(i) = centers.iter().position(|c| !c.is_finite()) {
        return Err(Error::NonIncreasingCenters { index: i + 1 });
    }
    if let Some(i) = centers.windows(2).position(|w| w[0] >= w[1]) {
        return Err(Error::NonIncreasingCenters { index: i + 2 });
    }
    let mut edges = Vec::with_capacity(m + 1);
    edges.push(centers[0] - (centers[1] - centers[0]) / 2.0);
    for w in centers.windows(2) {
        edges.push(w[0] + (w[1] - w[0]) / 2.0);
    }
    edges.push(centers[m - 1] + (centers[m - 1] - centers[m - 2]) / 2.0);
    BinLayout::with_centers(edges, centers.to_vec())
}

/// Expands frequencies into the nondecreasing bin index of every observation
/// (0-based): bin `l` is repeated `f_l` times.
pub fn expand_memberships(freqs: &[u64]) -> Result<Vec<usize>> {
    let n: u64 = freqs.iter().sum();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let mut e = Vec::with_capacity(n as usize);
    for (bin, &f) in freqs.iter().enumerate() {
        e.extend(std::iter::repeat_n(bin, f as usize));
    }
    Ok(e)
}

/// Counts memberships per bin; the inverse of [`expand_memberships`].
pub fn histogram(memberships: &[usize], num_bins: usize) -> Vec<u64> {
    let mut freqs = vec![0; num_bins];
    for &bin in memberships {
        freqs[bin] += 1;
    }
    freqs
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn unit_centers_give_integer_edges() {
        let centers: Vec<f64> = (0..30).map(|l| 5.5 + l as f64).collect();
        let layout = edges_from_midpoints(&centers).unwrap();
        let expected: Vec<f64> = (5..=35).map(f64::from).collect();
        assert_eq!(layout.edges, expected);
        assert_eq!(layout.centers.as_deref(), Some(centers.as_slice()));
    }

    #[test]
    fn unequal_gaps() {
        let layout = edges_from_midpoints(&[1.0, 2.0, 4.0]).unwrap();
        assert_eq!(layout.edges, vec![0.5, 1.5, 3.0, 5.0]);
    }

    #[test]
    fn two_bins() {
        let layout = edges_from_midpoints(&[0.0, 2.0]).unwrap();
        assert_eq!(layout.edges, vec![-1.0, 1.0, 3.0]);
    }

    #[test]
    fn bad_centers() {
        assert_eq!(edges_from_midpoints(&[1.0]), Err(Error::TooFewCenters(1)));
        assert_eq!(
            edges_from_midpoints(&[1.0, 3.0, 2.0]),
            Err(Error::NonIncreasingCenters { index: 3 })
        );
        assert!(edges_from_midpoints(&[1.0, 1.0]).is_err());
    }

    #[test]
    fn expansion_examples() {
        // 1-based (1,1,2,3,3,3)
        assert_eq!(
            expand_memberships(&[2, 1, 3]).unwrap(),
            vec![0, 0, 1, 2, 2, 2]
        );
        assert_eq!(expand_memberships(&[0, 2]).unwrap(), vec![1, 1]);
        assert_eq!(expand_memberships(&[1]).unwrap(), vec![0]);
        assert_eq!(expand_memberships(&[0, 0]), Err(Error::EmptyDataset));
    }

    proptest! {
        #[test]
        fn equal_spacing_is_preserved(start in -100.0f64..100.0, width in 0.01f64..10.0, m in 2usize..40) {
            let centers: Vec<f64> = (0..m).map(|l| start + width * l as f64).collect();
            let layout = edges_from_midpoints(&centers).unwrap();
            for w in layout.edges.windows(2) {
                let gap = w[1] - w[0];
                prop_assert!(((gap - width) / width).abs() < 1e-9, "gap {} vs {}", gap, width);
            }
        }

        #[test]
        fn centers_lie_in_their_bins(mut gaps in proptest::collection::vec(0.01f64..5.0, 1..30), start in -50.0f64..50.0) {
            gaps.insert(0, 0.0);
            let centers: Vec<f64> = gaps.iter().scan(start, |acc, g| { *acc += g; Some(*acc) }).collect();
            let layout = edges_from_midpoints(&centers).unwrap();
            for (l, &c) in centers.iter().enumerate() {
                prop_assert!(layout.contains(l, c));
            }
        }

        #[test]
        fn expansion_inverts_histogram(freqs in proptest::collection::vec(0u64..20, 1..15)) {
            prop_assume!(freqs.iter().sum::<u64>() > 0);
            let e = expand_memberships(&freqs).unwrap();
            prop_assert_eq!(e.len() as u64, freqs.iter().sum::<u64>());
            prop_assert!(e.windows(2).all(|w| w[0] <= w[1]));
            prop_assert_eq!(histogram(&e, freqs.len()), freqs);
        }
    }
}
