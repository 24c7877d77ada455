//! Separation diagnostics Δ_n and S_n for each coordinate of a model, plus
//! the check that every coordinate projection determines the full map.
//!
//! cargo run --example separation -- overlapping 6

use safd::fixtures::model;
use safd::separation::{coordinate_kernel_check, separation_report, DEFAULT_BUDGET};

fn main() -> safd::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "overlapping".into());
    let n_max: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(6);
    let ifs = model(&name)?.user_ifs();

    for j in 0..ifs.dim() {
        let coord = ifs.induce_on_coords(&[j])?;
        let r = separation_report(&coord, n_max, DEFAULT_BUDGET)?;
        println!("coordinate {}:", j + 1);
        for l in &r.levels {
            println!("  n = {:2}  delta = {:<14} S = {:<14} {:?}", l.n, l.delta.to_string(), l.s.to_string(), l.overlap);
        }
        println!("  rate estimates: min {:?}, fit {:?}, diophantine {:?}", r.c_hat_min, r.c_hat_fit, r.c_hat_diophantine);
    }
    if ifs.dim() > 1 {
        let k = coordinate_kernel_check(&ifs, n_max.min(4), DEFAULT_BUDGET)?;
        println!("coordinate projections determine maps: {}", k.holds);
    }
    Ok(())
}
