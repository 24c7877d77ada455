//! Builds the equal-exponent model whose coordinates both equal the n-th
//! iterate of a one-dimensional system and estimates its dimension.
//!
//! cargo run --release --example counterexample

use safd::experiments::{run_counterexample, CounterexampleConfig};

fn main() -> safd::Result<()> {
    let cfg = CounterexampleConfig { samples: 200_000, seed: 3, ..Default::default() };
    let report = run_counterexample(&cfg)?;
    print!("{}", report.to_text()?);
    Ok(())
}
