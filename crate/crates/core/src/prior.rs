//! The Dirichlet-process partition prior and its restriction to gap-free
//! partitions, evaluated in log space.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::types::Partition;

/// Largest `n` accepted by [`enumerate_compositions`].
pub const MAX_ENUMERATION: usize = 20;

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

/// `log (alpha)_n = log Γ(alpha + n) - log Γ(alpha)`.
pub fn ln_pochhammer(alpha: f64, n: usize) -> f64 {
    ln_gamma(alpha + n as f64) - ln_gamma(alpha)
}

/// Log of the Dirichlet-process EPPF, `alpha^k / (alpha)_n * prod Γ(n_j)`.
pub fn log_eppf(partition: &Partition, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let k = partition.num_groups() as f64;
    let n = partition.n();
    let groups: f64 = partition.sizes().iter().map(|&s| ln_gamma(s as f64)).sum();
    Ok(k * alpha.ln() - ln_pochhammer(alpha, n) + groups)
}

/// Log of the EPPF restricted to gap-free partitions,
/// `n!/k! * alpha^k / (alpha)_n * prod 1/n_j`.
///
/// Only the sizes enter, so a composition and any reordering of it share the
/// same value even though they are different partitions.
pub fn log_restricted_prior(partition: &Partition, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let k = partition.num_groups();
    let n = partition.n();
    let inv_sizes: f64 = partition.sizes().iter().map(|&s| (s as f64).ln()).sum();
    Ok(
        ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) + k as f64 * alpha.ln()
            - ln_pochhammer(alpha, n)
            - inv_sizes,
    )
}

/// Every composition of `n`, each exactly once (`2^(n-1)` of them).
///
/// Bit `i` of the enumeration counter places a cut before the last `i + 1`
/// elements, so `n = 3` yields `(3), (2,1), (1,2), (1,1,1)`.
pub fn enumerate_compositions(n: usize) -> Result<Vec<Partition>> {
    if n == 0 {
        return Err(Error::InvalidPartition("n must be positive".into()));
    }
    if n > MAX_ENUMERATION {
        return Err(Error::TooLarge {
            n,
            max: MAX_ENUMERATION,
        });
    }
    let cuts = n - 1;
    let mut out = Vec::with_capacity(1 << cuts);
    for mask in 0u32..(1 << cuts) {
        let mut sizes = Vec::new();
        let mut run = 0;
        for pos in 1..=n {
            run += 1;
            // cut after element `pos` when its bit is set
            if pos < n && mask & (1 << (n - 1 - pos)) != 0 {
                sizes.push(run);
                run = 0;
            }
        }
        sizes.push(run);
        out.push(Partition::new(sizes)?);
    }
    Ok(out)
}
