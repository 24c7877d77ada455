//! Checks that direct samples of a random measure match samples of its
//! scale-n convolution decomposition, level by level.
//!
//! cargo run --release --example convolution -- mcmullen 2 3

use safd::disintegration::{convolution_check, ConvolutionConfig, GammaPartition, Granularity};
use safd::fixtures::model;
use safd::separation::DEFAULT_BUDGET;

fn main() -> safd::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "mcmullen".into());
    let big_n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(2);
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(3);
    let gamma = GammaPartition::build(&model(&name)?, big_n, Granularity::Linear, DEFAULT_BUDGET)?;
    let r = convolution_check(&gamma, &ConvolutionConfig { n, samples: 50_000, ..Default::default() })?;

    println!("omega = {:?}, nu has {} atoms (exact: {})", r.omega.0, r.nu_atoms, r.nu_exact);
    for l in &r.levels {
        println!("level {:2}: direct {:.4}  convolved {:.4}  gap {:.4}", l.level, l.direct, l.convolved, l.gap);
    }
    println!("sliced W1 = {:.5}; {}", r.sliced_w1, if r.pass { "PASS" } else { "FAIL" });
    Ok(())
}
