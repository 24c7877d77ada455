//! Compares the normalized entropy at a fine level with the average of
//! short conditional steps, on a sample of the Cantor measure.

use safd::fixtures::model;
use safd::measure::{sample_mu, telescope_check, DyadicFamily};

fn main() -> safd::Result<()> {
    let cantor = model("cantor")?;
    let cloud = sample_mu(&cantor, 20_000, 50, 20, 0)?;
    for (m, n) in [(2, 20), (6, 60), (10, 60)] {
        let t = telescope_check(&cloud, &DyadicFamily { dim: 1 }, m, n, 1.0)?;
        println!(
            "m = {m:2}, n = {n}: (1/n)H = {:.4}, step average = {:.4}, residual = {:.4}, residual/scale = {:.3}",
            t.lhs,
            t.rhs,
            t.residual,
            t.residual / t.scale
        );
    }
    Ok(())
}
