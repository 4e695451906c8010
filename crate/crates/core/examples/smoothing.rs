//! The prior variance scale `c` acts as a smoothing parameter: small values
//! give few broad groups, large values many narrow ones. Writes one density
//! CSV per value of `c` into the directory given as the first argument.

use std::path::PathBuf;

use binclust::cli::{density_csv, fit_dataset, FitConfig, InputFormat};
use binclust::sampler::SamplerConfig;
use binclust::synthetic::simulate_benchmark;
use binclust::Hyperparams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).map(PathBuf::from);
    let dataset = simulate_benchmark(500, 1)?;
    for c in [0.1, 1.0, 10.0] {
        let config = FitConfig {
            input: PathBuf::new(),
            format: InputFormat::default(),
            hyper: Hyperparams {
                c,
                ..Hyperparams::default()
            },
            sampler: SamplerConfig::default(),
            chains: 1,
            grid_points: 200,
        };
        let fit = fit_dataset(&dataset, &config)?.remove(0);
        let s = &fit.summary;
        let means: Vec<String> = s.groups.iter().map(|g| format!("{:.1}", g.mean)).collect();
        println!(
            "c = {c:>4}: {} groups, means [{}]",
            s.groups.len(),
            means.join(", ")
        );
        if let Some(dir) = &out {
            std::fs::create_dir_all(dir)?;
            std::fs::write(
                dir.join(format!("density_c{c}.csv")),
                density_csv(&fit.grid, &fit.density),
            )?;
        }
    }
    Ok(())
}
