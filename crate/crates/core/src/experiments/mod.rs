//! Canned experiments built on the library, each producing a [`Report`].
//!
//! Every run is a pure function of its configuration and seed, so two runs
//! with equal inputs serialize to identical bytes regardless of thread count.

mod counterexample;
mod full_dim;
mod main_theorem;
mod observations;
pub mod report;

pub use counterexample::{remark_model, run_counterexample, CounterexampleConfig};
pub use full_dim::run_full_dim_measures;
pub use main_theorem::{run_main_theorem_check, run_typical_sweep, MainTheoremConfig, TypicalSweepConfig};
pub use observations::{
    run_entropy_increase, run_superexp_concentration, EntropyIncreaseConfig, SuperexpConfig,
};
pub use report::{svg_scatter, Report, Status, Table, Verdict};

use std::ops::RangeInclusive;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ifs::WeightedModel;
use crate::measure::{dyadic_entropy_estimate, required_depth, sample_mu, DiscreteMeasure};
use crate::separation::{least_squares, separation_report, SeparationReport};

/// Finest dyadic level considered when the band is read off the sample.
pub const FINEST_LEVEL: usize = 40;
/// Number of levels in the slope fit.
pub const SLOPE_WINDOW: usize = 5;
const COARSEST_LEVEL: usize = 4;

/// The last `SLOPE_WINDOW` levels up to the finest `t ≤ max_level` at which
/// the occupied cells are still at most a tenth of the atoms.
pub fn resolvable_band(theta: &DiscreteMeasure, max_level: usize) -> RangeInclusive<usize> {
    let resolved = |t: usize| !dyadic_entropy_estimate(theta, t as f64).bias_caveat;
    // Occupancy grows with t on nested grids, so the predicate flips once.
    let (mut lo, mut hi) = (COARSEST_LEVEL, max_level.max(COARSEST_LEVEL + 1));
    if resolved(hi) {
        lo = hi;
    } else {
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if resolved(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let top = lo.max(COARSEST_LEVEL + 1);
    top.saturating_sub(SLOPE_WINDOW - 1).max(COARSEST_LEVEL)..=top
}

/// Draws `samples` points deep enough for the band, which is read off the
/// sample when not given.
pub fn sample_for_band(
    model: &WeightedModel,
    samples: usize,
    band: Option<(usize, usize)>,
    depth: Option<usize>,
    seed: u64,
) -> Result<(DiscreteMeasure, RangeInclusive<usize>, usize)> {
    let r_max = model.user_ifs().r_max();
    let mut target = band.map_or(FINEST_LEVEL, |b| b.1);
    if let Some(depth) = depth {
        let supported = (-(depth as f64) * r_max.log2() - 10.0).floor().max(0.0) as usize;
        if band.is_none() {
            target = target.min(supported.max(COARSEST_LEVEL + 1));
        }
    }
    let depth = depth.unwrap_or_else(|| required_depth(r_max, target));
    let cloud = sample_mu(model, samples, depth, target, seed)?;
    let band = band.map_or_else(|| resolvable_band(&cloud, target), |(a, b)| a..=b);
    Ok((cloud, band, depth))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyDimension {
    /// Least-squares slope of `H(θ, 𝒟_t)` against `t`; the dimension estimate.
    pub slope: f64,
    /// `H(θ, 𝒟_t)/t` at the finest level of the band.
    pub normalized: f64,
    pub intercept: f64,
    pub stderr: f64,
    /// `(t, H(θ, 𝒟_t), occupied cells)`.
    pub levels: Vec<(usize, f64, usize)>,
}

/// Entropy dimension of an empirical measure over a band of dyadic levels.
pub fn entropy_dimension(theta: &DiscreteMeasure, band: RangeInclusive<usize>) -> EntropyDimension {
    let levels: Vec<(usize, f64, usize)> = band
        .map(|t| {
            let e = dyadic_entropy_estimate(theta, t as f64);
            (t, e.entropy, e.occupied)
        })
        .collect();
    let pts: Vec<(f64, f64)> = levels.iter().map(|&(t, h, _)| (t as f64, h)).collect();
    let (slope, intercept, stderr) = least_squares(&pts);
    let &(top, h_top, _) = levels.last().expect("band is non-empty");
    EntropyDimension { normalized: h_top / top as f64, slope, intercept, stderr, levels }
}

/// Enumeration budget for separation evidence inside experiments.
pub const EVIDENCE_BUDGET: u64 = 1 << 20;

/// Per-coordinate separation reports for the induced one-dimensional systems.
/// The depth is capped so that every level fits in `budget`.
pub fn coordinate_separation(model: &WeightedModel, n_max: usize, budget: u64) -> Result<Vec<SeparationReport>> {
    let ifs = model.user_ifs();
    let per_level = ifs.len().max(2) as f64;
    let cap = ((budget as f64).ln() / per_level.ln()).floor() as usize;
    let depth = n_max.min(cap).max(1);
    (0..ifs.dim()).map(|j| separation_report(&ifs.induce_on_coords(&[j])?, depth, budget)).collect()
}

pub fn require_distinct_exponents(model: &WeightedModel) -> Result<()> {
    if model.has_distinct_exponents() {
        Ok(())
    } else {
        Err(Error::HypothesisViolated("Lyapunov exponents coincide".into()))
    }
}

/// Fails with `HypothesisViolated` when some coordinate shows an exact overlap.
pub fn require_no_overlaps(reports: &[SeparationReport]) -> Result<()> {
    if let Some((j, r)) = reports.iter().enumerate().find(|(_, r)| r.first_overlap_level.is_some()) {
        return Err(Error::HypothesisViolated(format!(
            "coordinate {} has an exact overlap at level {}",
            j + 1,
            r.first_overlap_level.unwrap()
        )));
    }
    Ok(())
}

pub(crate) fn separation_table(name: &str, reports: &[SeparationReport]) -> Table {
    let mut t = Table::new(name, &["coord", "n", "delta", "s", "overlap", "distinct_maps"]);
    for (j, r) in reports.iter().enumerate() {
        for l in &r.levels {
            t.push(vec![
                (j + 1).into(),
                l.n.into(),
                l.delta.to_string().into(),
                l.s.to_string().into(),
                serde_json::to_value(&l.overlap).expect("overlap serializes"),
                l.distinct_maps.into(),
            ]);
        }
    }
    t
}

pub(crate) fn slope_table(name: &str, est: &EntropyDimension) -> Table {
    let mut t = Table::new(name, &["t", "entropy", "occupied", "entropy_per_level"]);
    for &(lvl, h, occ) in &est.levels {
        t.push(vec![lvl.into(), h.into(), occ.into(), (h / lvl as f64).into()]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::sample_points;
    use rand::Rng;

    #[test]
    fn band_stops_where_cells_outnumber_a_tenth_of_atoms() {
        // 2^12 atoms spread uniformly over [0, 1): level t has 2^t cells.
        let pts: Vec<f64> = (0..4096).map(|i| (i as f64 + 0.5) / 4096.0).collect();
        let m = DiscreteMeasure::uniform(1, pts).unwrap();
        assert_eq!(resolvable_band(&m, 40), 4..=8);
        assert_eq!(resolvable_band(&m, 6), 4..=6);
        let stacked = DiscreteMeasure::uniform(1, vec![0.3; 100]).unwrap();
        assert_eq!(resolvable_band(&stacked, 40), 36..=40);
        let lone = DiscreteMeasure::point_mass(&[0.3]);
        assert_eq!(resolvable_band(&lone, 40), 4..=5);
    }

    #[test]
    fn uniform_square_has_slope_two() {
        let pts = sample_points(200_000, 2, 3, |rng, row| {
            row[0] = rng.gen();
            row[1] = rng.gen();
        });
        let m = DiscreteMeasure::uniform(2, pts).unwrap();
        let s = entropy_dimension(&m, 3..=6);
        assert!((s.slope - 2.0).abs() < 0.02, "{}", s.slope);
        assert!((s.normalized - 2.0).abs() < 0.02, "{}", s.normalized);
    }
}
