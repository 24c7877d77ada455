//! A planar system with equal exponents whose measure has dimension strictly
//! below `min{2, dim_L}`.

use std::cmp::Ordering;

use serde::Serialize;
use serde_json::json;

use super::{coordinate_separation, entropy_dimension, sample_for_band, separation_table, slope_table, Report, Table, Verdict};
use crate::dims::lyapunov_dimension;
use crate::error::{Error, Result};
use crate::ifs::{AffineMap, DiagonalAffineIfs, WeightedModel};
use crate::scalar::{Mode, Scalar};
use crate::separation::DEFAULT_BUDGET;

#[derive(Clone, Debug, Serialize)]
pub struct CounterexampleConfig {
    /// Rational contraction `λ`, e.g. `"3/4"`.
    pub lambda: String,
    pub n: usize,
    pub samples: usize,
    /// Dyadic levels for the slope fit; defaults to the sample-size band.
    pub band: Option<(usize, usize)>,
    /// The estimate must not exceed this value.
    pub ceiling: f64,
    /// Depth of the separation check on the coordinate systems.
    pub separation_depth: usize,
    pub seed: u64,
}

impl Default for CounterexampleConfig {
    fn default() -> Self {
        CounterexampleConfig {
            lambda: "3/4".into(),
            n: 4,
            samples: 1_000_000,
            band: None,
            ceiling: 1.96,
            separation_depth: 3,
            seed: 0,
        }
    }
}

/// `ψ_u(0) = Σ_k u_k λ^{k−1}` for the two-map system `{λx, λx + 1}`.
fn psi_at_zero(lambda: &Scalar, word: &[usize]) -> Scalar {
    let mut acc = Scalar::zero(Mode::Exact);
    let mut scale = Scalar::one(Mode::Exact);
    for &u in word {
        if u == 1 {
            acc = &acc + &scale;
        }
        scale = &scale * lambda;
    }
    acc
}

/// The `2^n`-map system indexed by `u ∈ {0,1}^n` with uniform weights. The
/// two constant words move their translation to a single coordinate; all
/// other words translate along the diagonal.
pub fn remark_model(lambda: &Scalar, n: usize) -> Result<WeightedModel> {
    let rate = lambda.pow(n as u32);
    let top = psi_at_zero(lambda, &vec![1; n]);
    let zero = Scalar::zero(Mode::Exact);
    let maps = (0..1usize << n)
        .map(|code| {
            let word: Vec<usize> = (0..n).map(|k| (code >> (n - 1 - k)) & 1).collect();
            let offsets = if code == 0 {
                vec![top.clone(), zero.clone()]
            } else if code == (1 << n) - 1 {
                vec![zero.clone(), top.clone()]
            } else {
                let t = psi_at_zero(lambda, &word);
                vec![t.clone(), t]
            };
            AffineMap { rates: vec![rate.clone(), rate.clone()], offsets }
        })
        .collect();
    WeightedModel::uniform(DiagonalAffineIfs::new(2, maps)?)
}

fn check_hypotheses(lambda: &Scalar, n: usize) -> Result<()> {
    let half = Scalar::ratio(1, 2, Mode::Exact);
    let third = Scalar::ratio(1, 3, Mode::Exact);
    let one = Scalar::one(Mode::Exact);
    if lambda.total_cmp(&one) != Ordering::Less || lambda.pow(2).total_cmp(&half) != Ordering::Greater {
        return Err(Error::HypothesisViolated(format!("λ = {lambda} must lie in (1/√2, 1)")));
    }
    if n < 3 {
        return Err(Error::HypothesisViolated(format!("n = {n} must exceed 2")));
    }
    if lambda.pow(n as u32).total_cmp(&third) != Ordering::Less {
        return Err(Error::HypothesisViolated(format!("λ^n = {} must be below 1/3", lambda.pow(n as u32))));
    }
    Ok(())
}

fn sorted_maps(ifs: &DiagonalAffineIfs) -> Vec<(Scalar, Scalar)> {
    let mut v: Vec<(Scalar, Scalar)> = ifs.maps().iter().map(|m| (m.rates[0].clone(), m.offsets[0].clone())).collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.total_cmp(&b.1)));
    v
}

pub fn run_counterexample(cfg: &CounterexampleConfig) -> Result<Report> {
    let lambda = Scalar::parse(&cfg.lambda, Mode::Exact)?;
    check_hypotheses(&lambda, cfg.n)?;
    let model = remark_model(&lambda, cfg.n)?;
    let ifs = model.user_ifs();
    let mut report = Report::new("counterexample", cfg, cfg.seed);

    // Both coordinate systems must coincide with the n-fold composition of {λx, λx + 1}.
    let base = DiagonalAffineIfs::new(
        1,
        vec![
            AffineMap { rates: vec![lambda.clone()], offsets: vec![Scalar::zero(Mode::Exact)] },
            AffineMap { rates: vec![lambda.clone()], offsets: vec![Scalar::one(Mode::Exact)] },
        ],
    )?;
    let composed: Vec<AffineMap> = base
        .enumerate_level(cfg.n, DEFAULT_BUDGET)?
        .into_iter()
        .map(|m| AffineMap { rates: m.rates, offsets: m.offsets })
        .collect();
    let power = sorted_maps(&DiagonalAffineIfs::new(1, composed)?);
    for j in 0..2 {
        let coord = ifs.induce_on_coords(&[j])?;
        report.verdicts.push(Verdict::holds(format!("coordinate_{}_equals_power_system", j + 1), sorted_maps(&coord) == power));
    }

    let separation = coordinate_separation(&model, cfg.separation_depth, super::EVIDENCE_BUDGET)?;
    for (j, r) in separation.iter().enumerate() {
        report.verdicts.push(Verdict::holds(format!("coordinate_{}_no_exact_overlaps", j + 1), r.first_overlap_level.is_none()));
    }
    report.tables.push(separation_table("separation", &separation));

    let dim_l = lyapunov_dimension(&model);
    let chi = -(cfg.n as f64) * lambda.to_f64().log2();
    let bound = 1.0 + 3f64.log2() / chi;
    // The anti-diagonal projection is a separated three-map system, so the
    // projected measure has dimension H(weights)/χ.
    let edge = 1.0 / (1u64 << cfg.n) as f64;
    let projected = crate::ifs::shannon_entropy(&[1.0 - 2.0 * edge, edge, edge]) / chi;

    let (cloud, band, _) = sample_for_band(&model, cfg.samples, cfg.band, None, cfg.seed)?;
    let est = entropy_dimension(&cloud, band);

    let mut summary = Table::new("dimensions", &["quantity", "value"]);
    for (k, v) in [
        ("lyapunov_dimension", dim_l),
        ("min_2_lyapunov", dim_l.min(2.0)),
        ("set_bound", bound),
        ("measure_projection_bound", 1.0 + projected),
        ("empirical_dimension", est.slope),
        ("empirical_dimension_stderr", est.stderr),
        ("normalized_entropy", est.normalized),
    ] {
        summary.push(vec![json!(k), json!(v)]);
    }
    report.tables.push(summary);
    report.tables.push(slope_table("entropy_levels", &est));

    report.verdicts.push(Verdict::at_least("min_2_lyapunov_is_2", dim_l, 2.0, 0));
    report.verdicts.push(Verdict::at_most("set_bound_below_2", bound, 2.0, 0));
    report.verdicts.push(Verdict::at_most("empirical_dimension", est.slope, cfg.ceiling, cfg.samples));
    report.verdicts.push(Verdict::observation("normalized_entropy", est.normalized, cfg.samples));
    report.verdicts.push(Verdict::observation("measure_projection_bound", 1.0 + projected, 0));
    report.cloud = Some(cloud);
    Ok(report)
}
