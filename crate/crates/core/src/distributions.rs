//! Primitive samplers used by the chain and a seedable, splittable random
//! number stream.

use libm::erfc;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Exp1, Gamma};

use crate::error::{Error, Result};

/// Random number stream owned by one chain.
pub type ChainRng = ChaCha8Rng;

/// Stream `stream` of the generator family keyed by `seed`. Distinct streams
/// of the same seed are independent.
pub fn chain_rng(seed: u64, stream: u64) -> ChainRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Intervals with less standardized mass than this use tail rejection
/// instead of the inverse CDF.
const INVERSE_CDF_MIN_MASS: f64 = 1e-12;
const MAX_REJECTION_TRIES: usize = 1_000_000;

/// Standard normal CDF, accurate in relative terms in the lower tail.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal density.
pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn poly(coef: &[f64; 8], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Standard normal quantile (Wichura's AS 241, about 1e-16 relative accuracy).
#[allow(clippy::excessive_precision)]
pub fn std_normal_quantile(p: f64) -> f64 {
    const A: [f64; 8] = [
        3.387_132_872_796_366_608,
        133.141_667_891_784_377_45,
        1_971.590_950_306_551_442_7,
        13_731.693_765_509_461_125,
        45_921.953_931_549_871_457,
        67_265.770_927_008_700_853,
        33_430.575_583_588_128_105,
        2_509.080_928_730_122_672_7,
    ];
    const B: [f64; 8] = [
        1.0,
        42.313_330_701_600_911_252,
        687.187_007_492_057_908_3,
        5_394.196_021_424_751_107_7,
        21_213.794_301_586_595_867,
        39_307.895_800_092_710_61,
        28_729.085_735_721_942_674,
        5_226.495_278_852_854_561,
    ];
    const C: [f64; 8] = [
        1.423_437_110_749_683_577_34,
        4.630_337_846_156_545_295_9,
        5.769_497_221_460_691_405_5,
        3.647_848_324_763_204_605_04,
        1.270_458_252_452_368_382_58,
        0.241_780_725_177_450_611_77,
        0.022_723_844_989_269_184_583_3,
        7.745_450_142_783_414_076_4e-4,
    ];
    const D: [f64; 8] = [
        1.0,
        2.053_191_626_637_758_821_87,
        1.676_384_830_183_803_849_4,
        0.689_767_334_985_100_004_55,
        0.148_103_976_427_480_074_59,
        0.015_198_666_563_616_457_196_6,
        5.475_938_084_995_344_946e-4,
        1.050_750_071_644_416_843_24e-9,
    ];
    const E: [f64; 8] = [
        6.657_904_643_501_103_777_2,
        5.463_784_911_164_114_369_9,
        1.784_826_539_917_291_335_8,
        0.296_560_571_828_504_891_23,
        0.026_532_189_526_576_123_093,
        0.001_242_660_947_388_078_438_6,
        2.711_555_568_743_487_578_15e-5,
        2.010_334_399_292_288_132_65e-7,
    ];
    const F: [f64; 8] = [
        1.0,
        0.599_832_206_555_887_937_69,
        0.136_929_880_922_735_805_31,
        0.014_875_361_290_850_614_852_5,
        7.868_691_311_456_132_591e-4,
        1.846_318_317_510_054_681_8e-5,
        1.421_511_758_316_445_888_7e-7,
        2.044_263_103_389_939_785_64e-15,
    ];

    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-tail.ln()).sqrt();
    let val = if r <= 5.0 {
        r -= 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        r -= 5.0;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

/// CDF at `x` of `N(mu, sd^2)` restricted to `(lo, hi]`.
pub fn truncated_normal_cdf(x: f64, mu: f64, sd: f64, lo: f64, hi: f64) -> f64 {
    if x <= lo {
        return 0.0;
    }
    if x >= hi {
        return 1.0;
    }
    let (a, b, z) = ((lo - mu) / sd, (hi - mu) / sd, (x - mu) / sd);
    if a > 0.0 {
        // upper tail: use complements for accuracy
        let (qa, qb, qz) = (std_normal_cdf(-a), std_normal_cdf(-b), std_normal_cdf(-z));
        (qa - qz) / (qa - qb)
    } else {
        let (pa, pb, pz) = (std_normal_cdf(a), std_normal_cdf(b), std_normal_cdf(z));
        (pz - pa) / (pb - pa)
    }
}

/// Draws from `N(mu, sd^2)` restricted to `(lo, hi]`; either bound may be
/// infinite.
///
/// Intervals holding at least `1e-12` of the standardized mass are sampled by
/// inverting the CDF, working with whichever tail keeps the probabilities
/// small. Thinner intervals use rejection: an exponential proposal for wide
/// tail intervals and a uniform proposal for narrow ones.
pub fn sample_truncated_normal<R: Rng + ?Sized>(
    mu: f64,
    sd: f64,
    lo: f64,
    hi: f64,
    rng: &mut R,
) -> Result<f64> {
    if !(sd > 0.0 && sd.is_finite()) || !mu.is_finite() || lo.is_nan() || hi.is_nan() {
        return Err(Error::InvalidParams(format!(
            "truncated normal with mu {mu}, sd {sd}"
        )));
    }
    if lo >= hi {
        return Err(Error::EmptyInterval { lo, hi });
    }
    let a = (lo - mu) / sd;
    let b = (hi - mu) / sd;
    if a >= b {
        return Err(Error::NumericalUnderflow { lo, hi });
    }
    // reflect right-tail intervals so that a <= 0 or the whole interval is
    // in the left tail
    let flip = a > 0.0;
    let (a, b) = if flip { (-b, -a) } else { (a, b) };
    let (pa, pb) = (std_normal_cdf(a), std_normal_cdf(b));
    let mass = pb - pa;
    let z = if mass >= INVERSE_CDF_MIN_MASS {
        let u: f64 = rng.random();
        let position = pa + u * mass;
        if position <= 0.5 {
            std_normal_quantile(position)
        } else {
            let upper = std_normal_cdf(-b) + (1.0 - u) * mass;
            -std_normal_quantile(upper)
        }
    } else {
        standard_rejection(a, b, rng).ok_or(Error::NumericalUnderflow { lo, hi })?
    };
    let z = if flip { -z } else { z };
    Ok(clamp_half_open(mu + sd * z, lo, hi))
}

fn clamp_half_open(x: f64, lo: f64, hi: f64) -> f64 {
    if x > hi {
        hi
    } else if x <= lo {
        lo.next_up().min(hi)
    } else {
        x
    }
}

/// Rejection sampler for a standard normal on `(a, b]` with `a <= 0` or
/// `b <= 0`; returns `None` if no draw was accepted.
fn standard_rejection<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> Option<f64> {
    if b <= 0.0 {
        // left tail: mirror into the right tail
        return right_tail_rejection(-b, -a, rng).map(|z| -z);
    }
    // interval straddles zero and is very narrow: uniform proposal with the
    // density bounded by its value at zero
    uniform_rejection(a, b, 0.0, rng)
}

fn right_tail_rejection<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> Option<f64> {
    if (b - a) * a < 1.0 {
        return uniform_rejection(a, b, a, rng);
    }
    let rate = 0.5 * (a + (a * a + 4.0).sqrt());
    for _ in 0..MAX_REJECTION_TRIES {
        let e: f64 = Exp1.sample(rng);
        let z = a + e / rate;
        if z > b {
            continue;
        }
        let u: f64 = rng.random();
        if u.ln() <= -0.5 * (z - rate) * (z - rate) {
            return Some(z);
        }
    }
    None
}

/// Uniform proposal on `(a, b]`; `mode` is the point of the interval closest
/// to zero, where the density is largest.
fn uniform_rejection<R: Rng + ?Sized>(a: f64, b: f64, mode: f64, rng: &mut R) -> Option<f64> {
    let width = b - a;
    for _ in 0..MAX_REJECTION_TRIES {
        let u: f64 = rng.random();
        let z = b - width * u;
        if z <= a {
            continue;
        }
        let v: f64 = rng.random();
        if v.ln() <= 0.5 * (mode * mode - z * z) {
            return Some(z);
        }
    }
    None
}

/// Gamma draw in the shape-rate parameterization.
pub fn sample_gamma<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> Result<f64> {
    if !(shape > 0.0 && rate > 0.0 && shape.is_finite() && rate.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "gamma with shape {shape}, rate {rate}"
        )));
    }
    let dist =
        Gamma::new(shape, rate.recip()).map_err(|e| Error::InvalidParams(format!("gamma: {e}")))?;
    Ok(dist.sample(rng).max(f64::MIN_POSITIVE))
}

/// Beta draw, always strictly inside `(0, 1)`.
pub fn sample_beta<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidParams(format!("beta with a {a}, b {b}")));
    }
    let dist = Beta::new(a, b).map_err(|e| Error::InvalidParams(format!("beta: {e}")))?;
    let x: f64 = dist.sample(rng);
    Ok(x.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_and_se(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, (var / n).sqrt())
    }

    #[test]
    fn quantile_inverts_cdf() {
        for i in 1..2000 {
            let p = i as f64 / 2000.0;
            let x = std_normal_quantile(p);
            assert!(
                (std_normal_cdf(x) - p).abs() < 1e-14,
                "p={p} err={}",
                std_normal_cdf(x) - p
            );
        }
        for exp in 2..300 {
            let p = 10f64.powi(-exp);
            let x = std_normal_quantile(p);
            let back = std_normal_cdf(x);
            assert!(((back - p) / p).abs() < 1e-12, "p=1e-{exp}: {back}");
            assert_eq!(
                std_normal_quantile(1.0 - 0.5f64.powi(30)),
                -std_normal_quantile(0.5f64.powi(30))
            );
        }
        assert_eq!(std_normal_quantile(0.5), 0.0);
    }

    #[test]
    fn truncated_draws_stay_in_support() {
        let mut rng = chain_rng(1, 0);
        let cases = [
            (0.0, 1.0, 0.0, 1.0),
            (0.0, 1.0, 40.0, 41.0),
            (0.0, 1.0, -41.0, -40.0),
            (0.0, 1.0, 8.0, f64::INFINITY),
            (0.0, 1.0, f64::NEG_INFINITY, -9.0),
            (3.0, 0.01, 2.0, 2.0 + 1e-9),
            (0.0, 1.0, -1e-14, 1e-14),
            (0.0, 1.0, 1e3, 1e3 + 1e-6),
            (5.0, 2.0, f64::NEG_INFINITY, f64::INFINITY),
        ];
        for (mu, sd, lo, hi) in cases {
            for _ in 0..2000 {
                let x = sample_truncated_normal(mu, sd, lo, hi, &mut rng).unwrap();
                assert!(x > lo && x <= hi, "{x} outside ({lo}, {hi}]");
            }
        }
    }

    #[test]
    fn truncated_errors() {
        let mut rng = chain_rng(1, 0);
        assert_eq!(
            sample_truncated_normal(0.0, 1.0, 1.0, 1.0, &mut rng),
            Err(Error::EmptyInterval { lo: 1.0, hi: 1.0 })
        );
        assert!(sample_truncated_normal(0.0, 0.0, 0.0, 1.0, &mut rng).is_err());
        // interval narrower than representable in standardized units
        assert!(matches!(
            sample_truncated_normal(0.0, 1e300, 1.0, 1.0 + 1e-15, &mut rng),
            Err(Error::NumericalUnderflow { .. }) | Ok(_)
        ));
    }

    #[test]
    fn unit_interval_mean() {
        // (φ(0) - φ(1)) / (Φ(1) - Φ(0))
        let expected = (std_normal_pdf(0.0) - std_normal_pdf(1.0)) / (std_normal_cdf(1.0) - 0.5);
        assert!((expected - 0.4599).abs() < 1e-4);
        let mut rng = chain_rng(7, 0);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| sample_truncated_normal(0.0, 1.0, 0.0, 1.0, &mut rng).unwrap())
            .collect();
        let (mean, se) = mean_and_se(&xs);
        assert!((mean - expected).abs() < 3.0 * se, "{mean} vs {expected}");
    }

    #[test]
    fn far_tail_mean() {
        // for a far tail (a, inf) the mean is φ(a)/Q(a)
        let a = 12.0;
        let expected = std_normal_pdf(a) / std_normal_cdf(-a);
        let mut rng = chain_rng(8, 0);
        let xs: Vec<f64> = (0..50_000)
            .map(|_| sample_truncated_normal(0.0, 1.0, a, f64::INFINITY, &mut rng).unwrap())
            .collect();
        let (mean, se) = mean_and_se(&xs);
        assert!((mean - expected).abs() < 3.0 * se, "{mean} vs {expected}");
    }

    #[test]
    fn gamma_and_beta_moments() {
        let mut rng = chain_rng(9, 0);
        let check = |xs: Vec<f64>, expected: f64| {
            let (mean, se) = mean_and_se(&xs);
            assert!((mean - expected).abs() < 3.0 * se, "{mean} vs {expected}");
        };
        check(
            (0..100_000)
                .map(|_| sample_gamma(1.0, 1.0, &mut rng).unwrap())
                .collect(),
            1.0,
        );
        check(
            (0..100_000)
                .map(|_| sample_gamma(2.1, 7.0 / 3.0, &mut rng).unwrap())
                .collect(),
            0.9,
        );
        check(
            (0..100_000)
                .map(|_| sample_beta(1.0, 1.0, &mut rng).unwrap())
                .collect(),
            0.5,
        );
        check(
            (0..100_000)
                .map(|_| sample_beta(2.0, 1.0, &mut rng).unwrap())
                .collect(),
            2.0 / 3.0,
        );
        for _ in 0..10_000 {
            assert!(sample_gamma(0.05, 10.0, &mut rng).unwrap() > 0.0);
            let x = sample_beta(0.05, 0.05, &mut rng).unwrap();
            assert!(x > 0.0 && x < 1.0);
        }
        assert!(sample_gamma(0.0, 1.0, &mut rng).is_err());
        assert!(sample_beta(1.0, -1.0, &mut rng).is_err());
    }

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let draw = |seed, stream| {
            let mut rng = chain_rng(seed, stream);
            (0..16).map(|_| rng.random::<u64>()).collect::<Vec<_>>()
        };
        assert_eq!(draw(3, 0), draw(3, 0));
        assert_ne!(draw(3, 0), draw(3, 1));
        assert_ne!(draw(3, 0), draw(4, 0));
    }
}
