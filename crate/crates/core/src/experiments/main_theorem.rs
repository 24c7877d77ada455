//! Empirical entropy dimension against `min{d, dim_L}`, for one model or for
//! a random sweep of rate matrices.

use rand::Rng;
use serde::Serialize;
use serde_json::json;

use super::{
    coordinate_separation, entropy_dimension, require_distinct_exponents, require_no_overlaps, sample_for_band,
    separation_table, slope_table, Report, Table, Verdict, EVIDENCE_BUDGET,
};
use crate::dims::lyapunov_dimension;
use crate::error::{Error, Result};
use crate::ifs::{AffineMap, DiagonalAffineIfs, WeightedModel};
use crate::rng::{chunk_rng, derive_seed};
use crate::scalar::Scalar;

#[derive(Clone, Debug, Serialize)]
pub struct MainTheoremConfig {
    pub samples: usize,
    pub tolerance: f64,
    pub band: Option<(usize, usize)>,
    pub separation_depth: usize,
    pub seed: u64,
}

impl Default for MainTheoremConfig {
    fn default() -> Self {
        MainTheoremConfig { samples: 1_000_000, tolerance: 0.1, band: None, separation_depth: 8, seed: 0 }
    }
}

/// Estimate and prediction for one model; `HypothesisViolated` when the
/// exponents coincide or a coordinate has an exact overlap.
pub fn run_main_theorem_check(model: &WeightedModel, cfg: &MainTheoremConfig) -> Result<Report> {
    require_distinct_exponents(model)?;
    let separation = coordinate_separation(model, cfg.separation_depth, EVIDENCE_BUDGET)?;
    require_no_overlaps(&separation)?;
    let mut report = Report::new("main-theorem", cfg, cfg.seed);
    report.tables.push(separation_table("separation", &separation));

    let d = model.dim();
    let theory = lyapunov_dimension(model).min(d as f64);
    let (cloud, band, depth) = sample_for_band(model, cfg.samples, cfg.band, None, cfg.seed)?;
    let est = entropy_dimension(&cloud, band);

    let mut summary = Table::new("dimensions", &["quantity", "value"]);
    summary.push(vec![json!("entropy"), json!(model.entropy())]);
    for (j, chi) in model.lyapunov_exponents().iter().enumerate() {
        summary.push(vec![json!(format!("chi_{}", j + 1)), json!(chi)]);
    }
    summary.push(vec![json!("min_d_lyapunov"), json!(theory)]);
    summary.push(vec![json!("empirical_dimension"), json!(est.slope)]);
    summary.push(vec![json!("empirical_dimension_stderr"), json!(est.stderr)]);
    summary.push(vec![json!("normalized_entropy"), json!(est.normalized)]);
    summary.push(vec![json!("sampling_depth"), json!(depth)]);
    report.tables.push(summary);
    report.tables.push(slope_table("entropy_levels", &est));
    report.verdicts.push(Verdict::within("empirical_dimension", est.slope, theory, cfg.tolerance, cfg.samples));
    report.verdicts.push(Verdict::observation("normalized_entropy", est.normalized, cfg.samples));
    report.cloud = Some(cloud);
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct TypicalSweepConfig {
    /// Translation vectors, one row per map.
    pub translations: Vec<Vec<f64>>,
    pub trials: usize,
    pub samples: usize,
    /// Range of `|r_{ij}|`; signs are uniform.
    pub rate_range: (f64, f64),
    pub tolerance: f64,
    pub required_fraction: f64,
    pub separation_depth: usize,
    pub seed: u64,
}

impl Default for TypicalSweepConfig {
    fn default() -> Self {
        TypicalSweepConfig {
            translations: vec![vec![0.0, 0.0], vec![1.0, 1.0]],
            trials: 50,
            samples: 200_000,
            rate_range: (0.1, 0.6),
            tolerance: 0.1,
            required_fraction: 0.9,
            separation_depth: 10,
            seed: 0,
        }
    }
}

fn check_translations(t: &[Vec<f64>]) -> Result<usize> {
    let d = t.first().map_or(0, Vec::len);
    if t.len() < 2 || d == 0 || t.iter().any(|row| row.len() != d) {
        return Err(Error::BadTranslations("need at least two rows of equal positive length".into()));
    }
    for j in 0..d {
        for a in 0..t.len() {
            for b in a + 1..t.len() {
                if t[a][j] == t[b][j] {
                    return Err(Error::BadTranslations(format!(
                        "maps {} and {} share translation {} in coordinate {}",
                        a + 1,
                        b + 1,
                        t[a][j],
                        j + 1
                    )));
                }
            }
        }
    }
    Ok(d)
}

fn random_model(cfg: &TypicalSweepConfig, d: usize, trial: usize) -> Result<WeightedModel> {
    let mut rng = chunk_rng(derive_seed(cfg.seed, trial as u64), 0);
    let (lo, hi) = cfg.rate_range;
    let maps = cfg
        .translations
        .iter()
        .map(|t| {
            let rates = (0..d)
                .map(|_| {
                    let mag = rng.gen_range(lo..hi);
                    Scalar::Float(if rng.gen_bool(0.5) { mag } else { -mag })
                })
                .collect();
            AffineMap { rates, offsets: t.iter().map(|&x| Scalar::Float(x)).collect() }
        })
        .collect();
    let raw: Vec<f64> = (0..cfg.translations.len()).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut p: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let head: f64 = p[..p.len() - 1].iter().sum();
    *p.last_mut().unwrap() = 1.0 - head;
    WeightedModel::new(DiagonalAffineIfs::new(d, maps)?, p.into_iter().map(Scalar::Float).collect())
}

/// Fraction of random rate matrices and weights for which the empirical
/// dimension matches the prediction.
pub fn run_typical_sweep(cfg: &TypicalSweepConfig) -> Result<Report> {
    let d = check_translations(&cfg.translations)?;
    let mut report = Report::new("typical-sweep", cfg, cfg.seed);
    let mut table = Table::new("trials", &["trial", "rates", "p", "prediction", "estimate", "outcome"]);
    let mut passes = 0usize;
    for trial in 0..cfg.trials {
        let model = random_model(cfg, d, trial)?;
        let inner = MainTheoremConfig {
            samples: cfg.samples,
            tolerance: cfg.tolerance,
            band: None,
            separation_depth: cfg.separation_depth,
            seed: derive_seed(cfg.seed, 1_000_000 + trial as u64),
        };
        let rates: Vec<Vec<f64>> =
            model.user_ifs().maps().iter().map(|m| m.rates.iter().map(Scalar::to_f64).collect()).collect();
        let prediction = lyapunov_dimension(&model).min(d as f64);
        let (estimate, outcome) = match run_main_theorem_check(&model, &inner) {
            Ok(r) => {
                let v = r.verdict("empirical_dimension").expect("verdict present");
                if v.passed() {
                    passes += 1;
                }
                (json!(v.value), json!(v.status.to_string()))
            }
            Err(Error::HypothesisViolated(why)) => (json!(null), json!(format!("hypothesis: {why}"))),
            Err(e) => return Err(e),
        };
        table.push(vec![json!(trial), json!(rates), json!(model.p_f64()), json!(prediction), estimate, outcome]);
    }
    report.tables.push(table);
    if cfg.trials > 0 {
        let fraction = passes as f64 / cfg.trials as f64;
        report.verdicts.push(Verdict::at_least("pass_fraction", fraction, cfg.required_fraction, cfg.trials));
    }
    Ok(report)
}
