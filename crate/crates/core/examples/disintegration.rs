//! Groups level-N words by their linear part, then reports the class
//! entropy, the finite-level h_rw sequence and the κ prediction.
//!
//! cargo run --example disintegration -- example_ab 2

use safd::disintegration::{h_rw_finite, kappa_estimate, GammaPartition, Granularity};
use safd::fixtures::model;
use safd::separation::DEFAULT_BUDGET;

fn main() -> safd::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "example_ab".into());
    let big_n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(2);
    let m = model(&name)?;
    let gamma = GammaPartition::build(&m, big_n, Granularity::Linear, DEFAULT_BUDGET)?;

    println!("{} classes at N = {big_n}, H(beta, Gamma) = {:.6}", gamma.len(), gamma.entropy());
    for (k, c) in gamma.classes().iter().enumerate() {
        println!("  class {k}: first word {}, linear part {:?}, mass {:.6}", c.first_word, c.linear_f64(), c.mass);
    }
    let mut last = None;
    for n in 1..=3 {
        let h = h_rw_finite(&m, &gamma, n, DEFAULT_BUDGET, false)?;
        println!("h_rw at n = {n}: {:.6} ({:?}, injective {:?})", h.value, h.method, h.injective);
        last = Some(h.value);
    }
    let k = kappa_estimate(&m, m.dim() as f64, last)?;
    println!("kappa at full dimension {:.4}; predicted dimension {:?}", k.kappa, k.predicted_dim);
    Ok(())
}
