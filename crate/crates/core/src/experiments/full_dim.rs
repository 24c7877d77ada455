//! Bernoulli measures of full dimension in the plane.

use serde_json::json;

use super::{Report, Table, Verdict};
use crate::dims::full_dimension_vectors;
use crate::error::{Error, Result};
use crate::ifs::WeightedModel;

/// Agreement tolerance between `dim_L(Φ, p_σ)` and `dim_A`.
pub const FULL_DIM_TOLERANCE: f64 = 1e-9;

pub fn run_full_dim_measures(model: &WeightedModel) -> Result<Report> {
    let ifs = model.user_ifs();
    let full = match full_dimension_vectors(&ifs) {
        Err(Error::DegenerateAffinity(v)) => {
            return Err(Error::HypothesisViolated(format!("affinity dimension {v} is outside (0, 2)")))
        }
        Err(Error::NotPlanar(d)) => return Err(Error::HypothesisViolated(format!("needs d = 2, got {d}"))),
        other => other?,
    };
    let mut report = Report::new("full-dim", &json!({ "maps": ifs.len() }), 0);
    let mut table =
        Table::new("vectors", &["sigma", "p", "sum", "chi_sigma_1", "chi_sigma_2", "lyapunov_dimension", "distinct"]);
    for v in &full.vectors {
        let sigma: Vec<usize> = v.sigma.iter().map(|j| j + 1).collect();
        table.push(vec![
            json!(sigma),
            json!(v.p),
            json!(v.sum),
            json!(v.chi_sigma.0),
            json!(v.chi_sigma.1),
            json!(v.lyapunov_dimension),
            json!(v.distinct_exponents),
        ]);
        let tag = sigma.iter().map(|j| j.to_string()).collect::<String>();
        report.verdicts.push(Verdict::within(
            format!("sigma_{tag}_lyapunov_equals_affinity"),
            v.lyapunov_dimension,
            full.affinity.value,
            FULL_DIM_TOLERANCE,
            0,
        ));
        report.verdicts.push(Verdict::holds(format!("sigma_{tag}_distinct_exponents"), v.distinct_exponents));
    }
    let mut summary = Table::new("affinity", &["quantity", "value"]);
    summary.push(vec![json!("affinity_dimension"), json!(full.affinity.value)]);
    summary.push(vec![json!("residual"), json!(full.affinity.residual)]);
    summary.push(vec![json!("maximizers"), json!(full.vectors.len())]);
    report.tables.push(summary);
    report.tables.push(table);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::model;

    #[test]
    fn swapped_has_two_vectors() {
        let r = run_full_dim_measures(&model("swapped").unwrap()).unwrap();
        assert_eq!(r.table("vectors").unwrap().rows.len(), 2);
        assert!(r.passed());
    }

    #[test]
    fn homogeneous_has_uniform_vector() {
        let r = run_full_dim_measures(&model("homogeneous3").unwrap()).unwrap();
        let rows = &r.table("vectors").unwrap().rows;
        assert_eq!(rows.len(), 1);
        for p in rows[0][1].as_array().unwrap() {
            assert!((p.as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-9);
        }
        assert!(r.passed());
    }

    #[test]
    fn saturated_affinity_is_rejected() {
        assert!(matches!(run_full_dim_measures(&model("remark13").unwrap()), Err(Error::HypothesisViolated(_))));
        assert!(matches!(run_full_dim_measures(&model("cantor").unwrap()), Err(Error::HypothesisViolated(_))));
    }
}
