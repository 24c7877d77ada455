//! Separation of one-dimensional systems: `Δ_n`, `S_n`, exact-overlap
//! witnesses and finite-level evidence for exponential separation.
//!
//! Level-`n` maps are enumerated in lexicographic word order, sorted by
//! `(slope, offset, word)` and compared only with their neighbours inside a
//! slope group, which is equivalent to the all-pairs minimum.

use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ifs::{DiagonalAffineIfs, Word};
use crate::scalar::{Mode, Scalar};

/// Default cap on the number of composed maps enumerated at one level.
pub const DEFAULT_BUDGET: u64 = 20_000_000;
/// Relative tolerance below which float gaps are treated as unresolved.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

/// `ψ(x) = s·x + b`.
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalAffine1D {
    pub slope: Scalar,
    pub offset: Scalar,
}

/// A distance in `[0, ∞]`.
#[derive(Clone, Debug, PartialEq)]
pub enum Gap {
    Finite(Scalar),
    Infinite,
}

impl Gap {
    pub fn to_f64(&self) -> f64 {
        match self {
            Gap::Finite(x) => x.to_f64(),
            Gap::Infinite => f64::INFINITY,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Gap::Finite(x) if x.is_zero())
    }

    pub fn min(self, other: Gap) -> Gap {
        match (self, other) {
            (Gap::Infinite, g) | (g, Gap::Infinite) => g,
            (Gap::Finite(a), Gap::Finite(b)) => {
                if b.total_cmp(&a) == Ordering::Less {
                    Gap::Finite(b)
                } else {
                    Gap::Finite(a)
                }
            }
        }
    }
}

impl fmt::Display for Gap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gap::Finite(x) => write!(f, "{x}"),
            Gap::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Gap {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// `∞` for different slopes, `|b₁ − b₂|` otherwise.
pub fn pair_distance(a: &CanonicalAffine1D, b: &CanonicalAffine1D) -> Gap {
    if a.slope != b.slope {
        Gap::Infinite
    } else {
        Gap::Finite((&a.offset - &b.offset).abs())
    }
}

/// Whether distinct words produced the same map at a level.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum OverlapStatus {
    /// Every pair of distinct words gives distinct maps.
    None,
    /// `φ_u = φ_v` for the lexicographically first such pair.
    Exact { witness: (String, String) },
    /// Float mode found a gap below tolerance; no claim either way.
    Indeterminate { smallest_gap: f64 },
    /// Only one word exists, so there is no pair to compare.
    SingleWord,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelSeparation {
    pub n: usize,
    pub delta: Gap,
    pub s: Gap,
    pub overlap: OverlapStatus,
    pub distinct_maps: usize,
}

fn check_one_dimensional(ifs: &DiagonalAffineIfs) -> Result<()> {
    if ifs.dim() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "separation needs a one-dimensional system, got d = {}",
            ifs.dim()
        )));
    }
    Ok(())
}

/// Level-`n` maps `(slope, offset)` in lexicographic word order.
pub fn level_maps(ifs: &DiagonalAffineIfs, n: usize, budget: u64) -> Result<Vec<CanonicalAffine1D>> {
    check_one_dimensional(ifs)?;
    ifs.level_size(n, budget)?;
    let gens: Vec<(Scalar, Scalar)> =
        (0..ifs.len()).map(|i| (ifs.rate(i, 0).clone(), ifs.offset(i, 0).clone())).collect();
    let mode = ifs.mode();
    let mut level = vec![CanonicalAffine1D { slope: Scalar::one(mode), offset: Scalar::zero(mode) }];
    for _ in 0..n {
        level = level
            .par_iter()
            .flat_map_iter(|u| {
                gens.iter().map(move |(r, t)| CanonicalAffine1D {
                    slope: &u.slope * r,
                    offset: &(&u.slope * t) + &u.offset,
                })
            })
            .collect();
    }
    Ok(level)
}

struct Sorted {
    maps: Vec<CanonicalAffine1D>,
    /// Word indices sorted by `(slope, offset, index)`.
    order: Vec<usize>,
    /// Half-open ranges of `order` sharing a slope.
    groups: Vec<(usize, usize)>,
    tol: f64,
}

impl Sorted {
    fn new(maps: Vec<CanonicalAffine1D>, mode: Mode) -> Self {
        let mut order: Vec<usize> = (0..maps.len()).collect();
        order.par_sort_unstable_by(|&a, &b| {
            maps[a]
                .slope
                .total_cmp(&maps[b].slope)
                .then_with(|| maps[a].offset.total_cmp(&maps[b].offset))
                .then(a.cmp(&b))
        });
        let tol = match mode {
            Mode::Exact => 0.0,
            Mode::Float => {
                FLOAT_TOLERANCE * maps.iter().map(|m| m.offset.to_f64().abs()).fold(1.0, f64::max)
            }
        };
        let mut groups = Vec::new();
        let mut start = 0;
        for k in 1..=order.len() {
            let split = k == order.len() || {
                let (a, b) = (&maps[order[start]].slope, &maps[order[k]].slope);
                match mode {
                    Mode::Exact => a != b,
                    Mode::Float => (b.to_f64() - a.to_f64()).abs() > FLOAT_TOLERANCE * a.to_f64().abs(),
                }
            };
            if split {
                groups.push((start, k));
                start = k;
            }
        }
        Sorted { maps, order, groups, tol }
    }

    fn offset_gap(&self, a: usize, b: usize) -> Scalar {
        (&self.maps[self.order[b]].offset - &self.maps[self.order[a]].offset).abs()
    }
}

#[derive(Default)]
struct GroupScan {
    /// Smallest adjacent gap including zero gaps.
    delta: Option<Scalar>,
    /// Smallest adjacent gap between distinct maps.
    s: Option<Scalar>,
    /// Smallest positive gap that fell below the float tolerance.
    unresolved: Option<f64>,
    /// First pair (by word index) realising an exact overlap.
    witness: Option<(usize, usize)>,
    distinct: usize,
}

fn keep_min(slot: &mut Option<Scalar>, v: Scalar) {
    if slot.as_ref().is_none_or(|cur| v.total_cmp(cur) == Ordering::Less) {
        *slot = Some(v);
    }
}

fn scan_group(sorted: &Sorted, (lo, hi): (usize, usize), exact: bool) -> GroupScan {
    let mut out = GroupScan { distinct: 1, ..Default::default() };
    let mut run_start = lo;
    for k in lo + 1..hi {
        let gap = sorted.offset_gap(k - 1, k);
        let same = gap.is_zero();
        if same {
            let pair = (sorted.order[run_start], sorted.order[run_start + 1]);
            if out.witness.is_none_or(|w| pair < w) {
                out.witness = Some(pair);
            }
        } else {
            run_start = k;
            out.distinct += 1;
            if !exact && gap.to_f64() < sorted.tol {
                out.unresolved = Some(out.unresolved.map_or(gap.to_f64(), |u: f64| u.min(gap.to_f64())));
            }
            keep_min(&mut out.s, gap.clone());
        }
        keep_min(&mut out.delta, gap);
    }
    out
}

/// Separation quantities at level `n` from one sorted enumeration.
pub fn level_separation(ifs: &DiagonalAffineIfs, n: usize, budget: u64) -> Result<LevelSeparation> {
    let maps = level_maps(ifs, n, budget)?;
    let mode = ifs.mode();
    let words = maps.len();
    let sorted = Sorted::new(maps, mode);
    let exact = mode == Mode::Exact;
    let scans: Vec<GroupScan> =
        sorted.groups.par_iter().map(|&g| scan_group(&sorted, g, exact)).collect();

    let distinct_maps: usize = scans.iter().map(|g| g.distinct).sum();
    let mut delta = Gap::Infinite;
    let mut s = Gap::Infinite;
    let mut witness: Option<(usize, usize)> = None;
    let mut unresolved: Option<f64> = None;
    for g in scans {
        if let Some(v) = g.delta {
            delta = delta.min(Gap::Finite(v));
        }
        if let Some(v) = g.s {
            s = s.min(Gap::Finite(v));
        }
        if let Some(w) = g.witness {
            witness = Some(witness.map_or(w, |cur| cur.min(w)));
        }
        if let Some(u) = g.unresolved {
            unresolved = Some(unresolved.map_or(u, |c: f64| c.min(u)));
        }
    }
    let zero = || Gap::Finite(Scalar::zero(mode));
    if words <= 1 {
        delta = zero();
    }
    if distinct_maps <= 1 {
        s = zero();
    }
    let alphabet = ifs.len();
    let overlap = if words <= 1 {
        OverlapStatus::SingleWord
    } else if let Some((a, b)) = witness.filter(|_| exact) {
        OverlapStatus::Exact {
            witness: (
                Word::from_index(a as u64, n, alphabet).to_string(),
                Word::from_index(b as u64, n, alphabet).to_string(),
            ),
        }
    } else if !exact && (witness.is_some() || unresolved.is_some()) {
        OverlapStatus::Indeterminate { smallest_gap: unresolved.unwrap_or(0.0) }
    } else {
        OverlapStatus::None
    };
    Ok(LevelSeparation { n, delta, s, overlap, distinct_maps })
}

/// `Δ_n(Ψ) = min{d(ψ_u, ψ_v) : u ≠ v ∈ Λ^n}`.
pub fn delta_n(ifs: &DiagonalAffineIfs, n: usize, budget: u64) -> Result<Gap> {
    level_separation(ifs, n, budget).map(|l| l.delta)
}

/// `S_n(Ψ) = min{d(ψ_u, ψ_v) : ψ_u ≠ ψ_v}`.
pub fn s_n(ifs: &DiagonalAffineIfs, n: usize, budget: u64) -> Result<Gap> {
    level_separation(ifs, n, budget).map(|l| l.s)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparationReport {
    pub levels: Vec<LevelSeparation>,
    /// `min_n Δ_n^{1/n}` over levels with `0 < Δ_n < ∞`.
    pub c_hat_min: Option<f64>,
    /// `2^slope` of the least-squares fit of `log₂ Δ_n` against `n`.
    pub c_hat_fit: Option<f64>,
    /// `min_n S_n^{1/n}` over levels with `0 < S_n < ∞`.
    pub c_hat_diophantine: Option<f64>,
    /// The two rate estimators disagree by more than 10%.
    pub unreliable: bool,
    pub no_exact_overlaps: bool,
    pub first_overlap_level: Option<usize>,
    /// Some level was indeterminate in float mode.
    pub indeterminate: bool,
    pub note: &'static str,
}

const EVIDENCE_NOTE: &str =
    "finitely many levels give evidence for exponential separation, never a proof";

pub fn separation_report(ifs: &DiagonalAffineIfs, n_max: usize, budget: u64) -> Result<SeparationReport> {
    check_one_dimensional(ifs)?;
    ifs.level_size(n_max, budget)?;
    let levels = (1..=n_max)
        .map(|n| level_separation(ifs, n, budget))
        .collect::<Result<Vec<_>>>()?;

    let rates = |pick: fn(&LevelSeparation) -> &Gap| -> Vec<(f64, f64)> {
        levels
            .iter()
            .filter_map(|l| {
                let v = pick(l).to_f64();
                (v > 0.0 && v.is_finite()).then_some((l.n as f64, v))
            })
            .collect()
    };
    let delta_pts = rates(|l| &l.delta);
    let c_hat_min = min_root(&delta_pts);
    let c_hat_fit = if delta_pts.len() >= 2 {
        let pts: Vec<(f64, f64)> = delta_pts.iter().map(|&(n, v)| (n, v.log2())).collect();
        Some(least_squares_slope(&pts).exp2())
    } else {
        None
    };
    let unreliable = match (c_hat_min, c_hat_fit) {
        (Some(a), Some(b)) => (a - b).abs() > 0.1 * b,
        _ => true,
    };
    let first_overlap_level =
        levels.iter().find(|l| matches!(l.overlap, OverlapStatus::Exact { .. })).map(|l| l.n);
    let indeterminate = levels.iter().any(|l| matches!(l.overlap, OverlapStatus::Indeterminate { .. }));
    Ok(SeparationReport {
        c_hat_min,
        c_hat_fit,
        c_hat_diophantine: min_root(&rates(|l| &l.s)),
        unreliable,
        no_exact_overlaps: first_overlap_level.is_none() && !indeterminate,
        first_overlap_level,
        indeterminate,
        levels,
        note: EVIDENCE_NOTE,
    })
}

fn min_root(pts: &[(f64, f64)]) -> Option<f64> {
    pts.iter().map(|&(n, v)| v.powf(1.0 / n)).reduce(f64::min)
}

/// Slope of the ordinary least-squares line through `pts`.
pub fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    least_squares(pts).0
}

/// `(slope, intercept, standard error of the slope)`.
pub fn least_squares(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let se = if pts.len() > 2 {
        let rss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    (slope, intercept, se)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelLevel {
    pub n: usize,
    pub distinct_maps: usize,
    /// Distinct maps of each coordinate system (in the IFS's coordinate order).
    pub distinct_coordinate_maps: Vec<usize>,
    /// Coordinates where two different maps share their projection.
    pub failing_coords: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelReport {
    pub levels: Vec<KernelLevel>,
    /// `π_j φ_u = π_j φ_v ⇒ φ_u = φ_v` held for all coordinates and levels checked.
    pub holds: bool,
}

/// Finite-level check that each coordinate projection of a level-`n` map
/// determines the whole map.
pub fn coordinate_kernel_check(ifs: &DiagonalAffineIfs, n_max: usize, budget: u64) -> Result<KernelReport> {
    ifs.level_size(n_max, budget)?;
    let mut levels = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let coord_ids: Vec<Vec<usize>> = (0..ifs.dim())
            .map(|j| {
                let sub = ifs.induce_on_coords(&[j])?;
                Ok(class_ids(&level_maps(&sub, n, budget)?))
            })
            .collect::<Result<_>>()?;
        let words = coord_ids[0].len();
        let mut full: Vec<Vec<usize>> =
            (0..words).map(|w| coord_ids.iter().map(|ids| ids[w]).collect()).collect();
        full.par_sort_unstable();
        full.dedup();
        let distinct_coordinate_maps: Vec<usize> =
            coord_ids.iter().map(|ids| ids.iter().max().map_or(0, |m| m + 1)).collect();
        let failing_coords = distinct_coordinate_maps
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != full.len())
            .map(|(j, _)| j)
            .collect();
        levels.push(KernelLevel { n, distinct_maps: full.len(), distinct_coordinate_maps, failing_coords });
    }
    let holds = levels.iter().all(|l| l.failing_coords.is_empty());
    Ok(KernelReport { levels, holds })
}

/// Dense ids of equal maps; ids follow sorted map order.
fn class_ids(maps: &[CanonicalAffine1D]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..maps.len()).collect();
    order.par_sort_unstable_by(|&a, &b| {
        maps[a].slope.total_cmp(&maps[b].slope).then_with(|| maps[a].offset.total_cmp(&maps[b].offset))
    });
    let mut ids = vec![0; maps.len()];
    let mut next = 0;
    for k in 0..order.len() {
        if k > 0 && maps[order[k]] != maps[order[k - 1]] {
            next += 1;
        }
        ids[order[k]] = next;
    }
    ids
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Scalar {
        Scalar::ratio(n, d, Mode::Exact)
    }

    fn cantor() -> DiagonalAffineIfs {
        DiagonalAffineIfs::parse(1, &[(&["1/3"], &["0"]), (&["1/3"], &["2/3"])], Mode::Exact).unwrap()
    }

    fn overlapping() -> DiagonalAffineIfs {
        DiagonalAffineIfs::parse(
            1,
            &[(&["1/2"], &["0"]), (&["1/2"], &["1/2"]), (&["1/2"], &["1"])],
            Mode::Exact,
        )
        .unwrap()
    }

    #[test]
    fn pair_distance_cases() {
        let a = CanonicalAffine1D { slope: q(1, 9), offset: q(0, 1) };
        let b = CanonicalAffine1D { slope: q(1, 9), offset: q(2, 9) };
        let c = CanonicalAffine1D { slope: q(1, 3), offset: q(0, 1) };
        assert!(pair_distance(&a, &a).is_zero());
        assert_eq!(pair_distance(&a, &b), Gap::Finite(q(2, 9)));
        assert_eq!(pair_distance(&a, &c), Gap::Infinite);
    }

    #[test]
    fn cantor_levels() {
        let l1 = level_separation(&cantor(), 1, DEFAULT_BUDGET).unwrap();
        assert_eq!(l1.delta, Gap::Finite(q(2, 3)));
        let l2 = level_separation(&cantor(), 2, DEFAULT_BUDGET).unwrap();
        assert_eq!(l2.delta, Gap::Finite(q(2, 9)));
        assert_eq!(l2.s, l2.delta);
        assert_eq!(l2.overlap, OverlapStatus::None);
    }

    #[test]
    fn overlapping_witness() {
        let l = level_separation(&overlapping(), 2, DEFAULT_BUDGET).unwrap();
        assert!(l.delta.is_zero());
        assert_eq!(l.s, Gap::Finite(q(1, 4)));
        assert_eq!(l.overlap, OverlapStatus::Exact { witness: ("02".into(), "10".into()) });
        assert_eq!(l.distinct_maps, 7);
    }

    #[test]
    fn single_map_gives_zero() {
        let ifs = DiagonalAffineIfs::parse(1, &[(&["1/2"], &["1"])], Mode::Exact).unwrap();
        let l = level_separation(&ifs, 3, DEFAULT_BUDGET).unwrap();
        assert!(l.delta.is_zero());
        assert!(l.s.is_zero());
        assert_eq!(l.overlap, OverlapStatus::SingleWord);
    }

    #[test]
    fn distinct_slopes_give_infinity() {
        let ifs = DiagonalAffineIfs::parse(1, &[(&["1/2"], &["0"]), (&["1/3"], &["0"])], Mode::Exact).unwrap();
        let l = level_separation(&ifs, 1, DEFAULT_BUDGET).unwrap();
        assert_eq!(l.delta, Gap::Infinite);
        assert_eq!(l.s, Gap::Infinite);
    }

    #[test]
    fn budget_is_enforced() {
        let err = level_separation(&cantor(), 30, 1000).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }

    #[test]
    fn float_overlap_is_indeterminate() {
        let ifs = overlapping().into_mode(Mode::Float).unwrap();
        let l = level_separation(&ifs, 2, DEFAULT_BUDGET).unwrap();
        assert!(matches!(l.overlap, OverlapStatus::Indeterminate { .. }));
    }

    #[test]
    fn report_flags() {
        let r = separation_report(&cantor(), 8, DEFAULT_BUDGET).unwrap();
        assert!(r.no_exact_overlaps);
        assert!(!r.unreliable);
        assert!((r.c_hat_fit.unwrap() - 1.0 / 3.0).abs() < 1e-9);
        let expected_min = 2f64.powf(1.0 / 8.0) / 3.0;
        assert!((r.c_hat_min.unwrap() - expected_min).abs() < 1e-12);
        let o = separation_report(&overlapping(), 3, DEFAULT_BUDGET).unwrap();
        assert!(!o.no_exact_overlaps);
        assert_eq!(o.first_overlap_level, Some(2));
    }

    #[test]
    fn kernel_check_detects_coordinate_collisions() {
        let ifs = DiagonalAffineIfs::parse(
            2,
            &[(&["1/2", "1/3"], &["0", "0"]), (&["1/2", "1/3"], &["1/2", "0"])],
            Mode::Exact,
        )
        .unwrap();
        let r = coordinate_kernel_check(&ifs, 2, DEFAULT_BUDGET).unwrap();
        assert!(!r.holds);
        assert_eq!(r.levels[0].failing_coords, vec![1]);
        let sep = DiagonalAffineIfs::parse(
            2,
            &[(&["1/2", "1/3"], &["0", "0"]), (&["1/2", "1/3"], &["1/2", "2/3"])],
            Mode::Exact,
        )
        .unwrap();
        assert!(coordinate_kernel_check(&sep, 4, DEFAULT_BUDGET).unwrap().holds);
    }
}
