//! Truncated normal draws on bounded, one-sided and far-tail intervals,
//! compared with their exact means.

use binclust::distributions::{
    chain_rng, sample_truncated_normal, std_normal_cdf, std_normal_pdf, truncated_normal_cdf,
};

fn exact_mean(mu: f64, sd: f64, lo: f64, hi: f64) -> f64 {
    let (a, b) = ((lo - mu) / sd, (hi - mu) / sd);
    let pdf = |z: f64| {
        if z.is_finite() {
            std_normal_pdf(z)
        } else {
            0.0
        }
    };
    // upper-tail form keeps precision when both ends are far right
    let mass = if a > 0.0 {
        std_normal_cdf(-a) - std_normal_cdf(-b)
    } else {
        std_normal_cdf(b) - std_normal_cdf(a)
    };
    mu + sd * (pdf(a) - pdf(b)) / mass
}

fn main() -> binclust::Result<()> {
    let mut rng = chain_rng(42, 0);
    let cases = [
        (0.0, 1.0, 0.0, 1.0),
        (8.0, 1.0, 5.0, 6.0),
        (0.0, 1.0, 10.0, f64::INFINITY),
        (3.0, 2.0, f64::NEG_INFINITY, -20.0),
        (0.0, 1.0, 0.7, 0.7001),
    ];
    for (mu, sd, lo, hi) in cases {
        let draws = 50_000;
        let xs = (0..draws)
            .map(|_| sample_truncated_normal(mu, sd, lo, hi, &mut rng))
            .collect::<binclust::Result<Vec<f64>>>()?;
        let mean = xs.iter().sum::<f64>() / draws as f64;
        let median_cdf = {
            let mut s = xs.clone();
            s.sort_by(f64::total_cmp);
            truncated_normal_cdf(s[draws / 2], mu, sd, lo, hi)
        };
        println!(
            "N({mu}, {sd}^2) on ({lo}, {hi}]: mean {mean:.5} exact {:.5}, F(sample median) = {median_cdf:.3}",
            exact_mean(mu, sd, lo, hi)
        );
    }
    Ok(())
}
