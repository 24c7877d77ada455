//! Entropy gain from convolving a random measure with a smooth one, and the
//! concentration of the scale-n pieces across a larger scale ratio.

use safd::experiments::{run_entropy_increase, run_superexp_concentration, EntropyIncreaseConfig, SuperexpConfig};
use safd::fixtures::model;

fn main() -> safd::Result<()> {
    let inc = run_entropy_increase(
        &model("mcmullen")?,
        &EntropyIncreaseConfig { n: 5, omegas: 4, samples: 30_000, ..Default::default() },
    )?;
    print!("{}", inc.to_text()?);
    let conc = run_superexp_concentration(&model("overlapping")?, &SuperexpConfig { n_max: 5, ..Default::default() })?;
    print!("{}", conc.to_text()?);
    Ok(())
}
