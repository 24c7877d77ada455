//! Closed-form dimension quantities: the piecewise-linear map `f_Φ`, the
//! Lyapunov dimension, the affinity dimension and related root equations.

use itertools::Itertools;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ifs::{lyapunov_exponents_of, shannon_entropy, DiagonalAffineIfs, WeightedModel};

/// Sorted Lyapunov exponents with prefix sums `Σ_{b≤j} χ_b`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LyapunovProfile {
    chi: Vec<f64>,
    /// `prefix[j] = χ_1 + ⋯ + χ_j`, with `prefix[0] = 0`.
    prefix: Vec<f64>,
}

impl LyapunovProfile {
    /// Sorts `chi` ascending. All entries must be positive and finite.
    pub fn new(mut chi: Vec<f64>) -> Result<Self> {
        if chi.is_empty() {
            return Err(Error::EmptyCoordinateSet);
        }
        if let Some(&c) = chi.iter().find(|c| !(c.is_finite() && **c > 0.0)) {
            return Err(Error::InvalidArgument(format!("Lyapunov exponent {c} is not positive")));
        }
        chi.sort_by(f64::total_cmp);
        let mut prefix = Vec::with_capacity(chi.len() + 1);
        prefix.push(0.0);
        for &c in &chi {
            prefix.push(prefix.last().unwrap() + c);
        }
        Ok(LyapunovProfile { chi, prefix })
    }

    pub fn of_model(model: &WeightedModel) -> Self {
        Self::new(model.lyapunov_exponents().to_vec()).expect("model exponents are positive")
    }

    /// Profile of the subsystem on the sorted coordinate positions `coords`.
    pub fn restrict(&self, coords: &[usize]) -> Result<Self> {
        if let Some(&c) = coords.iter().find(|&&c| c >= self.dim()) {
            return Err(Error::CoordinateOutOfRange { coord: c, dim: self.dim() });
        }
        Self::new(coords.iter().map(|&c| self.chi[c]).collect())
    }

    pub fn dim(&self) -> usize {
        self.chi.len()
    }

    pub fn chi(&self) -> &[f64] {
        &self.chi
    }

    pub fn prefix(&self) -> &[f64] {
        &self.prefix
    }

    pub fn total(&self) -> f64 {
        self.prefix[self.dim()]
    }
}

/// `f_Φ(x)`: equals `j` at the `j`-th prefix sum, slope `1/χ_{j+1}` between
/// consecutive breakpoints and `d·x/Σχ` beyond the last one.
pub fn f_phi(profile: &LyapunovProfile, x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::NegativeArgument(x));
    }
    let d = profile.dim();
    let pre = &profile.prefix;
    if x >= pre[d] {
        return Ok(d as f64 * (x / pre[d]));
    }
    // Largest j with pre[j] <= x; j < d here.
    let j = pre.partition_point(|&p| p <= x) - 1;
    Ok(j as f64 + (x - pre[j]) / profile.chi[j])
}

/// `dim_L(Φ, p) = f_Φ(H(p))`.
pub fn lyapunov_dimension(model: &WeightedModel) -> f64 {
    f_phi(&LyapunovProfile::of_model(model), model.entropy()).expect("entropy is nonnegative")
}

/// `log₂ φ^s_σ(i)` for one map given its absolute rates.
pub fn log_singular_value_sigma(abs_rates: &[f64], sigma: &[usize], s: f64) -> f64 {
    let d = abs_rates.len();
    if s >= d as f64 {
        let total: f64 = abs_rates.iter().map(|r| r.log2()).sum();
        return (s / d as f64) * total;
    }
    let k = s.floor() as usize;
    let head: f64 = sigma[..k].iter().map(|&j| abs_rates[j].log2()).sum();
    head + (s - k as f64) * abs_rates[sigma[k]].log2()
}

/// `φ^s_σ(i)`: the product of the `⌊s⌋` rates picked by `σ` times the next one
/// raised to the fractional part; `|det|^{s/d}` once `s ≥ d`.
pub fn singular_value_sigma(ifs: &DiagonalAffineIfs, sigma: &[usize], s: f64, i: usize) -> f64 {
    let rates: Vec<f64> = (0..ifs.dim()).map(|j| ifs.abs_rate_f64(i, j)).collect();
    log_singular_value_sigma(&rates, sigma, s).exp2()
}

struct RateTable {
    d: usize,
    log_rates: Vec<Vec<f64>>,
    perms: Vec<Vec<usize>>,
}

impl RateTable {
    fn new(ifs: &DiagonalAffineIfs) -> Self {
        let d = ifs.dim();
        RateTable {
            d,
            log_rates: (0..ifs.len())
                .map(|i| (0..d).map(|j| ifs.abs_rate_f64(i, j).log2()).collect())
                .collect(),
            perms: (0..d).permutations(d).collect(),
        }
    }

    fn log_phi(&self, i: usize, sigma: &[usize], s: f64) -> f64 {
        let lr = &self.log_rates[i];
        if s >= self.d as f64 {
            return (s / self.d as f64) * lr.iter().sum::<f64>();
        }
        let k = s.floor() as usize;
        sigma[..k].iter().map(|&j| lr[j]).sum::<f64>() + (s - k as f64) * lr[sigma[k]]
    }

    fn sum_for(&self, sigma: &[usize], s: f64) -> f64 {
        (0..self.log_rates.len()).map(|i| self.log_phi(i, sigma, s).exp2()).sum()
    }

    fn pressure(&self, s: f64) -> f64 {
        self.perms.iter().map(|p| self.sum_for(p, s)).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `max_σ Σ_i φ^s_σ(i)`.
pub fn singular_value_pressure(ifs: &DiagonalAffineIfs, s: f64) -> f64 {
    RateTable::new(ifs).pressure(s)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AffinityDimension {
    pub value: f64,
    /// Permutations attaining the maximum at the root, in the IFS's coordinates.
    pub maximizers: Vec<Vec<usize>>,
    /// `|max_σ Σ_i φ^s_σ(i) − 1|` at the returned value.
    pub residual: f64,
    pub iterations: usize,
}

/// Relative slack for deciding which permutations attain the maximum.
pub const MAXIMIZER_SLACK: f64 = 1e-9;
const MAX_BISECTION_STEPS: usize = 200;

/// Bisects `f` (decreasing, `f(lo) ≥ 0 ≥ f(hi)`) down to adjacent floats.
fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> (f64, usize) {
    for it in 1..=MAX_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return (pick_closer(lo, hi, &f), it);
        }
        let v = f(mid);
        if v == 0.0 {
            return (mid, it);
        }
        if v > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (pick_closer(lo, hi, &f), MAX_BISECTION_STEPS)
}

fn pick_closer(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    if f(lo).abs() <= f(hi).abs() {
        lo
    } else {
        hi
    }
}

/// The unique `s ≥ 0` with `max_σ Σ_i φ^s_σ(i) = 1`, plus the maximizing set.
pub fn affinity_dimension(ifs: &DiagonalAffineIfs) -> Result<AffinityDimension> {
    let table = RateTable::new(ifs);
    let g = |s: f64| table.pressure(s) - 1.0;
    let (value, iterations) = if ifs.len() == 1 {
        (0.0, 0)
    } else {
        let mut hi = ifs.dim() as f64;
        while g(hi) > 0.0 {
            hi *= 2.0;
        }
        bisect(0.0, hi, g)
    };
    let max = table.pressure(value);
    let residual = (max - 1.0).abs();
    if residual >= 1e-12 {
        return Err(Error::NoConvergence(format!(
            "affinity dimension residual {residual:e} at s = {value}"
        )));
    }
    let maximizers = table
        .perms
        .iter()
        .filter(|p| table.sum_for(p, value) >= max * (1.0 - MAXIMIZER_SLACK))
        .cloned()
        .collect();
    Ok(AffinityDimension { value, maximizers, residual, iterations })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FullDimensionVector {
    pub sigma: Vec<usize>,
    /// `(φ^{s₀}_σ(i))_i`.
    pub p: Vec<f64>,
    pub sum: f64,
    /// `(χ_{σ(1)}, χ_{σ(2)})` under `p`.
    pub chi_sigma: (f64, f64),
    pub distinct_exponents: bool,
    /// `dim_L(Φ, p)`, which should reproduce `dim_A`.
    pub lyapunov_dimension: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FullDimensionReport {
    pub affinity: AffinityDimension,
    pub vectors: Vec<FullDimensionVector>,
}

/// Bernoulli weights attaining `dim_A` in the plane, one per maximizing
/// permutation.
pub fn full_dimension_vectors(ifs: &DiagonalAffineIfs) -> Result<FullDimensionReport> {
    if ifs.dim() != 2 {
        return Err(Error::NotPlanar(ifs.dim()));
    }
    let affinity = affinity_dimension(ifs)?;
    let s0 = affinity.value;
    if !(s0 > 0.0 && s0 < 2.0) {
        return Err(Error::DegenerateAffinity(s0));
    }
    let vectors = affinity
        .maximizers
        .iter()
        .map(|sigma| {
            let p: Vec<f64> = (0..ifs.len()).map(|i| singular_value_sigma(ifs, sigma, s0, i)).collect();
            let sum: f64 = p.iter().sum();
            let chi = lyapunov_exponents_of(ifs, &p);
            let chi_sigma = (chi[sigma[0]], chi[sigma[1]]);
            let profile = LyapunovProfile::new(chi.clone()).expect("positive exponents");
            let lyapunov_dimension = f_phi(&profile, shannon_entropy(&p)).expect("entropy >= 0");
            FullDimensionVector {
                sigma: sigma.clone(),
                distinct_exponents: (chi_sigma.0 - chi_sigma.1).abs() > 1e-12 * chi_sigma.0.max(chi_sigma.1),
                p,
                sum,
                chi_sigma,
                lyapunov_dimension,
            }
        })
        .collect();
    Ok(FullDimensionReport { affinity, vectors })
}

/// Root of `H(p) + max_σ Σ_i p_i log₂ φ^s_σ(i) = 0`; beyond `s = d` the
/// determinant branch continues the top linear piece of `f_Φ`.
pub fn lyapunov_dim_root(model: &WeightedModel) -> Result<f64> {
    let h = model.entropy();
    if h == 0.0 {
        return Ok(0.0);
    }
    let table = RateTable::new(model.ifs());
    let p = model.p_f64();
    let g = |s: f64| {
        let best = table
            .perms
            .iter()
            .map(|sigma| {
                p.iter()
                    .enumerate()
                    .filter(|(_, &w)| w > 0.0)
                    .map(|(i, &w)| w * table.log_phi(i, sigma, s))
                    .sum::<f64>()
            })
            .fold(f64::NEG_INFINITY, f64::max);
        h + best
    };
    let chi_min = model.lyapunov_exponents()[0];
    let hi = model.dim() as f64 + h / chi_min + 1.0;
    if g(hi) > 0.0 {
        return Err(Error::NoConvergence(format!("bracket [0, {hi}] does not contain the root")));
    }
    let (root, _) = bisect(0.0, hi, g);
    if g(root).abs() > 1e-9 {
        return Err(Error::NoConvergence(format!("residual {} at s = {root}", g(root))));
    }
    Ok(root)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FjMaximum {
    /// Maximum of `g(y) = Σ y_b/χ_b` over the vertices of `Y(x)`.
    pub value: f64,
    pub argmax: Vec<f64>,
    /// Best value found on the grid sweep.
    pub grid_value: f64,
    /// Worst-case shortfall of the grid maximum below the true maximum.
    pub grid_tolerance: f64,
    pub grid_points_per_axis: usize,
}

const GRID_POINTS_PER_AXIS: usize = 1000;
const GRID_TOTAL_CAP: f64 = 1.0e6;

/// Maximizes `Σ y_b/χ_b` over `Y(x) = {0 ≤ y_b ≤ χ_b, Σ y_b ≤ x}` by vertex
/// enumeration, with a grid sweep as a sanity check.
pub fn fj_max_oracle(profile: &LyapunovProfile, x: f64) -> Result<FjMaximum> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::NegativeArgument(x));
    }
    let m = profile.dim();
    let f = f_phi(profile, x)?;
    if f > m as f64 + 1e-12 {
        return Err(Error::PreconditionViolated(format!("f_J({x}) = {f} exceeds |J| = {m}")));
    }
    let chi = profile.chi();
    let g = |y: &[f64]| y.iter().zip(chi).map(|(y, c)| y / c).sum::<f64>();

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut consider = |y: Vec<f64>| {
        let v = g(&y);
        let better = match &best {
            None => true,
            Some((bv, by)) => {
                // Among ties prefer the lexicographically largest vertex.
                v > bv + 1e-12 || ((v - bv).abs() <= 1e-12 && lex_greater(&y, by))
            }
        };
        if better {
            best = Some((v, y));
        }
    };
    for mask in 0u32..(1 << m) {
        let base: Vec<f64> = (0..m).map(|b| if mask >> b & 1 == 1 { chi[b] } else { 0.0 }).collect();
        let used: f64 = base.iter().sum();
        if used <= x + 1e-12 {
            consider(base.clone());
        }
        for k in (0..m).filter(|k| mask >> k & 1 == 0) {
            let rest = x - used;
            if rest >= 0.0 && rest <= chi[k] {
                let mut y = base.clone();
                y[k] = rest;
                consider(y);
            }
        }
    }
    let (value, argmax) = best.expect("the origin is always a vertex");

    let per_axis = (GRID_TOTAL_CAP.powf(1.0 / m as f64).floor() as usize).clamp(2, GRID_POINTS_PER_AXIS);
    let steps: Vec<f64> = chi.iter().map(|c| c / (per_axis - 1) as f64).collect();
    let mut grid_value = 0.0f64;
    let mut idx = vec![0usize; m];
    'sweep: loop {
        let y: Vec<f64> = idx.iter().zip(&steps).map(|(&k, s)| k as f64 * s).collect();
        if y.iter().sum::<f64>() <= x {
            grid_value = grid_value.max(g(&y));
        }
        for b in 0..m {
            idx[b] += 1;
            if idx[b] < per_axis {
                continue 'sweep;
            }
            idx[b] = 0;
        }
        break;
    }
    // Rounding every coordinate of the maximizer down to the grid stays in Y(x).
    let grid_tolerance = steps.iter().zip(chi).map(|(s, c)| s / c).sum::<f64>();
    Ok(FjMaximum { value, argmax, grid_value, grid_tolerance, grid_points_per_axis: per_axis })
}

fn lex_greater(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()) == Some(std::cmp::Ordering::Greater)
}

/// `m + (x − Σ_{b≤m} χ_b)/χ_{m+1}`, the value of the `m`-th linear branch of
/// `f` extended to all `x`.
pub fn partial_branch_value(profile: &LyapunovProfile, m: usize, x: f64) -> Result<f64> {
    if m >= profile.dim() {
        return Err(Error::CoordinateOutOfRange { coord: m, dim: profile.dim() });
    }
    Ok(m as f64 + (x - profile.prefix()[m]) / profile.chi()[m])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Mode;

    fn log3() -> f64 {
        3f64.log2()
    }

    #[test]
    fn f_phi_breakpoints_are_exact() {
        let p = LyapunovProfile::new(vec![1.0, log3()]).unwrap();
        assert_eq!(f_phi(&p, 0.0).unwrap(), 0.0);
        assert_eq!(f_phi(&p, 1.0).unwrap(), 1.0);
        assert_eq!(f_phi(&p, 1.0 + log3()).unwrap(), 2.0);
        assert_eq!(f_phi(&p, 2.0 * (1.0 + log3())).unwrap(), 4.0);
        assert!(matches!(f_phi(&p, -0.5), Err(Error::NegativeArgument(_))));
    }

    #[test]
    fn singular_value_examples() {
        let ifs = DiagonalAffineIfs::parse(2, &[(&["1/2", "1/4"], &["0", "0"])], Mode::Exact).unwrap();
        assert_eq!(singular_value_sigma(&ifs, &[0, 1], 1.5, 0), 0.25);
        assert_eq!(singular_value_sigma(&ifs, &[1, 0], 0.0, 0), 1.0);
        let det = singular_value_sigma(&ifs, &[1, 0], 2.0, 0);
        assert!((det - 0.125).abs() < 1e-15);
        assert!((singular_value_sigma(&ifs, &[0, 1], 2.0, 0) - det).abs() < 1e-15);
    }

    #[test]
    fn single_map_has_zero_affinity_dimension() {
        let ifs = DiagonalAffineIfs::parse(2, &[(&["1/2", "1/4"], &["0", "0"])], Mode::Exact).unwrap();
        assert_eq!(affinity_dimension(&ifs).unwrap().value, 0.0);
    }

    #[test]
    fn cantor_affinity_dimension() {
        let ifs = DiagonalAffineIfs::parse(1, &[(&["1/3"], &["0"]), (&["1/3"], &["2/3"])], Mode::Exact).unwrap();
        let a = affinity_dimension(&ifs).unwrap();
        assert!((a.value - 1.0 / log3()).abs() < 1e-12);
        assert!(a.residual < 1e-12);
    }

    #[test]
    fn full_dimension_rejects_non_planar() {
        let ifs = DiagonalAffineIfs::parse(3, &[(&["1/2", "1/3", "1/4"], &["0", "0", "0"])], Mode::Exact).unwrap();
        assert!(matches!(full_dimension_vectors(&ifs), Err(Error::NotPlanar(3))));
    }

    #[test]
    fn fj_oracle_matches_closed_form() {
        let p = LyapunovProfile::new(vec![1.0, log3()]).unwrap();
        let r = fj_max_oracle(&p, 1.5).unwrap();
        assert!((r.value - (1.0 + 0.5 / log3())).abs() < 1e-12);
        assert_eq!(r.argmax, vec![1.0, 0.5]);
        assert!(r.grid_value <= r.value + 1e-12);
        assert!(r.value - r.grid_value <= r.grid_tolerance);
        let zero = fj_max_oracle(&p, 0.0).unwrap();
        assert_eq!(zero.value, 0.0);
        assert_eq!(zero.argmax, vec![0.0, 0.0]);
        assert!(matches!(fj_max_oracle(&p, 3.0), Err(Error::PreconditionViolated(_))));
    }

    #[test]
    fn partial_branch_dominates() {
        let p = LyapunovProfile::new(vec![1.0, log3()]).unwrap();
        let v = partial_branch_value(&p, 0, 1.5).unwrap();
        assert_eq!(v, 1.5);
        assert!(v >= f_phi(&p, 1.5).unwrap().min(2.0));
    }
}
