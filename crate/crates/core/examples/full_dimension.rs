//! Bernoulli weights whose Lyapunov dimension reaches the affinity
//! dimension, for each planar bundled model where they exist.

use safd::experiments::run_full_dim_measures;
use safd::fixtures::{model, ALL};

fn main() -> safd::Result<()> {
    for (name, _) in ALL {
        let m = model(name)?;
        match run_full_dim_measures(&m) {
            Ok(r) => {
                println!("{name}: {}", if r.passed() { "all weights reproduce dim_A" } else { "mismatch" });
                for v in &r.verdicts {
                    println!("  {v}");
                }
            }
            Err(e) => println!("{name}: skipped ({e})"),
        }
    }
    Ok(())
}
