//! Bin edges from bin centers, right-closed bin lookup and the expansion of
//! frequencies into ordered bin memberships.

use binclust::binning::{edges_from_midpoints, expand_memberships};
use binclust::synthetic::bin_data;

fn main() -> binclust::Result<()> {
    let layout = edges_from_midpoints(&[1.0, 2.0, 4.0])?;
    println!("centers (1, 2, 4) -> edges {:?}", layout.edges);
    for x in [0.5, 0.50001, 1.5, 3.0, 4.9] {
        println!("  {x} falls in bin {:?}", layout.locate(x));
    }

    let dataset = bin_data(&[0.9, 1.2, 1.4, 2.5, 3.0, 4.8], &layout)?;
    println!("frequencies {:?}", dataset.freqs);
    println!("memberships {:?}", expand_memberships(&dataset.freqs)?);
    Ok(())
}
