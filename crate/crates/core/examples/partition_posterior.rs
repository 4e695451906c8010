//! With the latent values and `alpha` held fixed, the partition chain should
//! visit each composition as often as the enumerated posterior says.

use std::collections::HashMap;

use binclust::distributions::chain_rng;
use binclust::oracle::enumerate_partition_posterior;
use binclust::sampler::{Sampler, SamplerConfig, Updates};
use binclust::{BinLayout, ChainState, GroupParams, Hyperparams, Partition};

fn main() -> binclust::Result<()> {
    let layout = BinLayout::from_edges(vec![0.0, 1.0, 2.0])?;
    let hyper = Hyperparams {
        omega: 1.0,
        c: 1.0,
        a: 2.0,
        b: 0.5,
        ..Hyperparams::default()
    };
    let y = vec![0.2, 0.9, 1.1, 1.7];
    let alpha = 1.0;

    let config = SamplerConfig {
        iterations: 200_000,
        burn_in: 0,
        updates: Updates {
            latent: false,
            alpha: false,
            ..Updates::default()
        },
        ..SamplerConfig::default()
    };
    let sampler = Sampler::new(&layout, &hyper, config)?;
    let start = ChainState::new(
        y.clone(),
        vec![0, 0, 1, 1],
        Partition::single(4)?,
        vec![GroupParams {
            mu: 1.0,
            lambda: 1.0,
        }],
        alpha,
        &layout,
    )?;
    let (trace, _) = sampler.run(start, &mut chain_rng(0, 0))?;

    let mut visits: HashMap<&Partition, usize> = HashMap::new();
    for p in &trace.partitions {
        *visits.entry(p).or_default() += 1;
    }
    let mut tv = 0.0;
    println!("{:<10} {:>9} {:>9}", "partition", "exact", "chain");
    for (p, prob) in enumerate_partition_posterior(&y, &hyper.normal_gamma(), alpha)? {
        let freq = visits.get(&p).copied().unwrap_or(0) as f64 / trace.len() as f64;
        tv += 0.5 * (freq - prob).abs();
        println!("{:<10} {prob:>9.5} {freq:>9.5}", p.to_string());
    }
    println!("total variation {tv:.4}");
    Ok(())
}
