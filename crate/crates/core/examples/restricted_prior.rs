//! The prior over gap-free partitions: probabilities of every composition of
//! a small sample and the prior mean number of groups for several `alpha`.

use binclust::oracle::enumerate_compositions;
use binclust::prior::{log_eppf, log_restricted_prior};

fn main() -> binclust::Result<()> {
    let n = 5;
    let alpha = 1.0;
    println!("compositions of {n}, alpha = {alpha}");
    for p in enumerate_compositions(n)? {
        println!(
            "  {:<10} restricted {:.5}  unrestricted EPPF {:.5}",
            p.to_string(),
            log_restricted_prior(&p, alpha)?.exp(),
            log_eppf(&p, alpha)?.exp()
        );
    }

    let n = 12;
    let parts = enumerate_compositions(n)?;
    for alpha in [0.1, 0.5, 1.0, 3.0, 10.0] {
        let mut total = 0.0;
        let mut mean_k = 0.0;
        for p in &parts {
            let w = log_restricted_prior(p, alpha)?.exp();
            total += w;
            mean_k += w * p.num_groups() as f64;
        }
        println!("n = {n}, alpha = {alpha:>4}: E[k] = {mean_k:.3} (mass {total:.12})");
    }
    Ok(())
}
