//! Runs the main-theorem check on a user-supplied model and writes the
//! report as JSON, per-table CSV and an SVG scatter.
//!
//! cargo run --release --example reports -- /tmp/safd-report

use std::path::PathBuf;

use safd::experiments::{run_main_theorem_check, svg_scatter, MainTheoremConfig};
use safd::ifs::WeightedModel;

const MODEL: &str = r#"{
  "d": 2,
  "maps": [
    {"r": ["1/2", "-2/5"], "t": ["0", "13/17"]},
    {"r": ["1/3", "1/4"], "t": ["1/7", "0"]},
    {"r": ["1/5", "1/3"], "t": ["5/11", "1/9"]}
  ],
  "p": ["1/2", "1/3", "1/6"]
}"#;

fn main() -> safd::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "safd-report".into()));
    let m = WeightedModel::from_json(MODEL, None)?;
    let report = run_main_theorem_check(&m, &MainTheoremConfig { samples: 200_000, seed: 5, ..Default::default() })?;

    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("report.json"), report.to_json()?)?;
    report.write_csv(&dir)?;
    if let Some(cloud) = &report.cloud {
        std::fs::write(dir.join("points.svg"), svg_scatter(cloud))?;
    }
    for v in &report.verdicts {
        println!("{v}");
    }
    println!("wrote {}", dir.display());
    Ok(())
}
