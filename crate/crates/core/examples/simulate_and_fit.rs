//! Simulates the four-component benchmark, fits it with the default
//! hyperparameters and prints the modal partition with its group estimates.
//!
//! `cargo run --release --example simulate_and_fit -- [seed] [c]`

use binclust::estimators::{
    conditional_param_estimates, mixing_weights, modal_partition_with_count,
};
use binclust::sampler::{run_chain, SamplerConfig};
use binclust::synthetic::simulate_benchmark;
use binclust::Hyperparams;

fn main() -> binclust::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed"));
    let c: f64 = args.next().map_or(1.0, |s| s.parse().expect("c"));

    let dataset = simulate_benchmark(500, seed)?;
    let hyper = Hyperparams {
        c,
        ..Hyperparams::default()
    };
    let config = SamplerConfig {
        seed,
        ..SamplerConfig::default()
    };
    let trace = run_chain(&dataset, &hyper, &config)?;

    let (pi_hat, visits) = modal_partition_with_count(&trace)?;
    println!(
        "modal partition {pi_hat} ({visits} of {} draws)",
        trace.len()
    );
    let estimates = conditional_param_estimates(&trace, &pi_hat)?;
    for ((size, w), est) in pi_hat
        .sizes()
        .iter()
        .zip(mixing_weights(&pi_hat, dataset.n))
        .zip(estimates)
    {
        println!(
            "  n = {size:>3}  weight {w:.3}  mean {:>6.2}  sd {:.2}",
            est.mean, est.sd
        );
    }
    let m = &trace.moves;
    println!(
        "accepted: split {}/{}, merge {}/{}, shuffle {}/{}",
        m.split_accepted,
        m.split_proposed,
        m.merge_accepted,
        m.merge_proposed,
        m.shuffle_accepted,
        m.shuffle_proposed
    );
    Ok(())
}
