//! Joint-distribution check of the full kernel: prior draws versus a chain
//! that alternates the kernel with fresh data. A sampler whose precision
//! update ignores the prior mean is caught by the same test.

use binclust::conjugate::{posterior_from_stats, GroupModel, NormalGammaParams, SuffStats};
use binclust::distributions::chain_rng;
use binclust::oracle::{
    geweke_test, geweke_test_with_model, GewekeConfig, GewekeReport, GEWEKE_STATISTICS,
};

#[derive(Clone)]
struct ForgetfulRate(NormalGammaParams);

impl GroupModel for ForgetfulRate {
    fn prior(&self) -> &NormalGammaParams {
        &self.0
    }

    fn posterior(&self, stats: &SuffStats) -> NormalGammaParams {
        NormalGammaParams {
            b: self.0.b + 0.5 * stats.ssd,
            ..posterior_from_stats(&self.0, stats)
        }
    }
}

fn show(label: &str, report: &GewekeReport) {
    println!("{label}");
    for (i, name) in GEWEKE_STATISTICS.iter().enumerate() {
        println!(
            "  {name:<12} prior {:>8.4}  chain {:>8.4}  z {:>7.2}",
            report.marginal_means[i], report.successive_means[i], report.z_scores[i]
        );
    }
}

fn main() -> binclust::Result<()> {
    let config = GewekeConfig::default();
    show("exact kernel", &geweke_test(&config, &mut chain_rng(1, 0))?);
    let broken = ForgetfulRate(config.hyper.normal_gamma());
    show(
        "broken rate update",
        &geweke_test_with_model(&config, &broken, &mut chain_rng(1, 0))?,
    );
    Ok(())
}
