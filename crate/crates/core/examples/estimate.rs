//! Samples a self-affine measure and estimates its dimension from dyadic
//! entropies and from local mass growth.
//!
//! cargo run --release --example estimate -- mcmullen 200000

use safd::dims::lyapunov_dimension;
use safd::experiments::{entropy_dimension, sample_for_band};
use safd::fixtures::model;
use safd::measure::local_dimension_summary;

fn main() -> safd::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "mcmullen".into());
    let samples: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(200_000);
    let m = model(&name)?;

    let (cloud, band, depth) = sample_for_band(&m, samples, None, None, 1)?;
    println!("sampled {samples} codings of length {depth}; fitting levels {band:?}");
    let est = entropy_dimension(&cloud, band);
    for (t, h, occupied) in &est.levels {
        println!("t = {t:2}  H = {h:8.4}  H/t = {:.4}  cells = {occupied}", h / *t as f64);
    }
    println!("slope {:.4} ± {:.4}", est.slope, est.stderr);
    println!("prediction min(d, dim_L) = {:.4}", lyapunov_dimension(&m).min(m.dim() as f64));

    let radii: Vec<f64> = (3..9).map(|k| (-(k as f64)).exp2()).collect();
    let local = local_dimension_summary(&cloud, &radii, 50, 2)?;
    println!("local dimension over 50 base points: {:.3} (sd {:.3})", local.mean, local.std_dev);
    Ok(())
}
