//! Finite measures in `ℝ^d`, grid partitions and their entropies, component
//! measures, local dimension and Monte-Carlo sampling of self-affine measures.
//!
//! Entropies are in bits. A partition of a measure's support is stored as a
//! dense block label per atom; grid cells get labels in increasing key order.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ifs::{FloatIfs, WeightedModel, Word};
use crate::rng::{chunk_rng, chunks};
use crate::separation::least_squares;

/// Weighted atoms in `ℝ^d`, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
    provenance: Option<Vec<Word>>,
}

impl DiscreteMeasure {
    /// Equal weights on the rows of `points`.
    pub fn uniform(dim: usize, points: Vec<f64>) -> Result<Self> {
        if dim == 0 || !points.len().is_multiple_of(dim) || points.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "{} coordinates do not form nonempty rows of length {dim}",
                points.len()
            )));
        }
        let n = points.len() / dim;
        Ok(DiscreteMeasure { dim, points, weights: vec![1.0 / n as f64; n], provenance: None })
    }

    /// Nonnegative weights summing to 1 within `1e-12`.
    pub fn weighted(dim: usize, points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let mut m = Self::uniform(dim, points)?;
        if weights.len() != m.len() {
            return Err(Error::DimensionMismatch(format!("{} weights for {} atoms", weights.len(), m.len())));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::BadWeights("negative or NaN atom weight".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::BadWeights(format!("atom weights sum to {total}")));
        }
        m.weights = weights;
        Ok(m)
    }

    pub fn point_mass(x: &[f64]) -> Self {
        DiscreteMeasure { dim: x.len(), points: x.to_vec(), weights: vec![1.0], provenance: None }
    }

    pub fn with_provenance(mut self, words: Vec<Word>) -> Result<Self> {
        if words.len() != self.len() {
            return Err(Error::DimensionMismatch(format!("{} words for {} atoms", words.len(), self.len())));
        }
        self.provenance = Some(words);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn provenance(&self) -> Option<&[Word]> {
        self.provenance.as_deref()
    }

    /// Normalized restriction to the atoms selected by `keep`.
    pub fn restrict(&self, keep: impl Fn(usize) -> bool) -> Result<Self> {
        let idx: Vec<usize> = (0..self.len()).filter(|&i| keep(i)).collect();
        let mass: f64 = idx.iter().map(|&i| self.weights[i]).sum();
        if idx.is_empty() || mass <= 0.0 {
            return Err(Error::ZeroMassBlock);
        }
        Ok(DiscreteMeasure {
            dim: self.dim,
            points: idx.iter().flat_map(|&i| self.point(i).iter().copied()).collect(),
            weights: idx.iter().map(|&i| self.weights[i] / mass).collect(),
            provenance: self.provenance.as_ref().map(|w| idx.iter().map(|&i| w[i].clone()).collect()),
        })
    }

    /// Pushforward under `x ↦ diag(scale)·x + shift`.
    pub fn affine_image(&self, scale: &[f64], shift: &[f64]) -> Self {
        let mut out = self.clone();
        for row in out.points.chunks_mut(self.dim) {
            for j in 0..self.dim {
                row[j] = scale[j] * row[j] + shift[j];
            }
        }
        out
    }

    /// Largest Euclidean distance between two corners of the bounding box.
    pub fn bounding_diameter(&self) -> f64 {
        (0..self.dim)
            .map(|j| {
                let (lo, hi) = self
                    .points
                    .iter()
                    .skip(j)
                    .step_by(self.dim)
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
                (hi - lo).powi(2)
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// Assignment of atoms to blocks `0..blocks`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinitePartitionView {
    labels: Vec<u32>,
    blocks: usize,
}

impl FinitePartitionView {
    /// Relabels arbitrary block keys densely, in increasing key order.
    pub fn from_keys<K: Ord + Sync>(keys: &[K]) -> Self {
        let mut order: Vec<u32> = (0..keys.len() as u32).collect();
        order.par_sort_unstable_by(|&a, &b| keys[a as usize].cmp(&keys[b as usize]));
        let mut labels = vec![0u32; keys.len()];
        let mut next = 0u32;
        for k in 0..order.len() {
            if k > 0 && keys[order[k] as usize] != keys[order[k - 1] as usize] {
                next += 1;
            }
            labels[order[k] as usize] = next;
        }
        let blocks = if keys.is_empty() { 0 } else { next as usize + 1 };
        FinitePartitionView { labels, blocks }
    }

    pub fn trivial(atoms: usize) -> Self {
        FinitePartitionView { labels: vec![0; atoms], blocks: usize::from(atoms > 0) }
    }

    pub fn singletons(atoms: usize) -> Self {
        FinitePartitionView { labels: (0..atoms as u32).collect(), blocks: atoms }
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    /// Common refinement `ξ ∨ η`.
    pub fn join(&self, other: &Self) -> Self {
        assert_eq!(self.labels.len(), other.labels.len(), "partitions of different supports");
        let keys: Vec<u64> =
            self.labels.iter().zip(&other.labels).map(|(&a, &b)| (a as u64) << 32 | b as u64).collect();
        Self::from_keys(&keys)
    }
}

/// Product grid with cells `∏_j [s_j + k_j w_j, s_j + (k_j+1) w_j)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Grid {
    widths: Vec<f64>,
    shifts: Vec<f64>,
}

impl Grid {
    pub fn cells(widths: Vec<f64>) -> Self {
        let shifts = vec![0.0; widths.len()];
        Grid { widths, shifts }
    }

    /// Level-`⌊t⌋` dyadic cubes.
    pub fn dyadic(dim: usize, t: f64) -> Self {
        Self::cells(vec![(-t.floor()).exp2(); dim])
    }

    /// `⨉_j 𝒟_{t_j}` with per-coordinate levels floored.
    pub fn anisotropic(levels: &[f64]) -> Self {
        Self::cells(levels.iter().map(|t| (-t.floor()).exp2()).collect())
    }

    pub fn shifted(mut self, shifts: Vec<f64>) -> Self {
        assert_eq!(shifts.len(), self.widths.len());
        self.shifts = shifts;
        self
    }

    pub fn dim(&self) -> usize {
        self.widths.len()
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    pub fn key_into(&self, x: &[f64], out: &mut [i128]) {
        for j in 0..self.widths.len() {
            out[j] = ((x[j] - self.shifts[j]) / self.widths[j]).floor() as i128;
        }
    }

    pub fn key(&self, x: &[f64]) -> Vec<i128> {
        let mut k = vec![0; self.dim()];
        self.key_into(x, &mut k);
        k
    }

    pub fn partition(&self, theta: &DiscreteMeasure) -> FinitePartitionView {
        assert_eq!(self.dim(), theta.dim(), "grid and measure dimensions differ");
        let d = self.dim();
        let mut flat = vec![0i128; theta.len() * d];
        flat.par_chunks_mut(d).enumerate().for_each(|(i, k)| self.key_into(theta.point(i), k));
        let keys: Vec<&[i128]> = flat.chunks(d).collect();
        FinitePartitionView::from_keys(&keys)
    }
}

pub fn block_masses(theta: &DiscreteMeasure, xi: &FinitePartitionView) -> Vec<f64> {
    let mut m = vec![0.0; xi.blocks()];
    for (w, &l) in theta.weights().iter().zip(xi.labels()) {
        m[l as usize] += w;
    }
    m
}

fn entropy_of_masses(masses: impl IntoIterator<Item = f64>) -> f64 {
    masses.into_iter().filter(|&m| m > 0.0).map(|m| -m * m.log2()).sum::<f64>().max(0.0)
}

/// `H(θ, ξ)`.
pub fn entropy(theta: &DiscreteMeasure, xi: &FinitePartitionView) -> f64 {
    entropy_of_masses(block_masses(theta, xi))
}

/// `H(θ, ξ | η) = Σ_{A∈η} θ(A) H(θ_A, ξ)`.
pub fn conditional_entropy(theta: &DiscreteMeasure, xi: &FinitePartitionView, eta: &FinitePartitionView) -> f64 {
    let pairs: Vec<(u32, u32)> = eta.labels().iter().copied().zip(xi.labels().iter().copied()).collect();
    let joint = FinitePartitionView::from_keys(&pairs);
    // Joint labels follow (η, ξ) order, so each η-block is a contiguous run.
    let joint_mass = block_masses(theta, &joint);
    let mut owner = vec![0u32; joint.blocks()];
    for (k, &l) in joint.labels().iter().enumerate() {
        owner[l as usize] = pairs[k].0;
    }
    let mut total = 0.0;
    let mut start = 0;
    while start < joint_mass.len() {
        let mut end = start;
        while end < joint_mass.len() && owner[end] == owner[start] {
            end += 1;
        }
        let run = &joint_mass[start..end];
        let a: f64 = run.iter().sum();
        if a > 0.0 {
            total += a * entropy_of_masses(run.iter().map(|m| m / a));
        }
        start = end;
    }
    total
}

/// `H(θ, 𝒟_t)`.
pub fn dyadic_entropy(theta: &DiscreteMeasure, t: f64) -> f64 {
    entropy(theta, &Grid::dyadic(theta.dim(), t).partition(theta))
}

/// `H(θ, ⨉_j 𝒟_{t_j})`.
pub fn anisotropic_entropy(theta: &DiscreteMeasure, levels: &[f64]) -> f64 {
    entropy(theta, &Grid::anisotropic(levels).partition(theta))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyEstimate {
    pub level: f64,
    pub entropy: f64,
    pub occupied: usize,
    pub atoms: usize,
    /// More than one occupied cell per ten atoms: the plug-in value is biased low.
    pub bias_caveat: bool,
}

pub fn dyadic_entropy_estimate(theta: &DiscreteMeasure, t: f64) -> EntropyEstimate {
    let xi = Grid::dyadic(theta.dim(), t).partition(theta);
    EntropyEstimate {
        level: t.floor(),
        entropy: entropy(theta, &xi),
        occupied: xi.blocks(),
        atoms: theta.len(),
        bias_caveat: xi.blocks() * 10 > theta.len(),
    }
}

/// `θ_{E(x)}`, the normalized restriction to the grid cell containing `x`.
pub fn component_at(theta: &DiscreteMeasure, grid: &Grid, x: &[f64]) -> Result<DiscreteMeasure> {
    let target = grid.key(x);
    let mut k = vec![0; grid.dim()];
    let inside: Vec<bool> = (0..theta.len())
        .map(|i| {
            grid.key_into(theta.point(i), &mut k);
            k == target
        })
        .collect();
    theta.restrict(|i| inside[i])
}

/// All components of `θ` along `grid`, with their masses, in cell-key order.
pub fn components(theta: &DiscreteMeasure, grid: &Grid) -> Vec<(f64, DiscreteMeasure)> {
    let xi = grid.partition(theta);
    let masses = block_masses(theta, &xi);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); xi.blocks()];
    for (i, &l) in xi.labels().iter().enumerate() {
        members[l as usize].push(i);
    }
    members
        .into_iter()
        .zip(masses)
        .filter(|(_, m)| *m > 0.0)
        .map(|(idx, m)| {
            let set: std::collections::BTreeSet<usize> = idx.into_iter().collect();
            (m, theta.restrict(|i| set.contains(&i)).expect("positive mass"))
        })
        .collect()
}

/// `𝔼[H(θ_{x,coarse}, fine)]` as an exact mass-weighted sum over components.
pub fn component_entropy_expectation(theta: &DiscreteMeasure, coarse: &Grid, fine: &Grid) -> f64 {
    components(theta, coarse).iter().map(|(m, c)| m * entropy(c, &fine.partition(c))).sum()
}

/// A nested-by-index family of grids, `E_0, E_1, …`.
pub trait PartitionFamily: Sync {
    fn grid(&self, level: usize) -> Grid;
}

/// Dyadic cubes `𝒟_n` in `ℝ^d`.
#[derive(Clone, Copy, Debug)]
pub struct DyadicFamily {
    pub dim: usize,
}

impl PartitionFamily for DyadicFamily {
    fn grid(&self, level: usize) -> Grid {
        Grid::dyadic(self.dim, level as f64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TelescopeCheck {
    pub m: usize,
    pub n: usize,
    /// `(1/n) H(θ, E_n)`.
    pub lhs: f64,
    /// `𝔼_{1≤q≤n} (1/m) H(θ, E_{q+m} | E_q)`.
    pub rhs: f64,
    /// `𝔼_{1≤q≤n} (1/m) 𝔼[H(θ_{x,q}, E_{q+m})]` through explicit components.
    pub rhs_components: f64,
    pub residual: f64,
    /// `(m + log₂ R)/n`.
    pub scale: f64,
}

/// Compares the normalized entropy at level `n` with the average of
/// `m`-step conditional entropies; `radius` bounds the support diameter.
pub fn telescope_check(
    theta: &DiscreteMeasure,
    family: &dyn PartitionFamily,
    m: usize,
    n: usize,
    radius: f64,
) -> Result<TelescopeCheck> {
    if m == 0 || m > n {
        return Err(Error::InvalidArgument(format!("need 1 <= m <= n, got m = {m}, n = {n}")));
    }
    if radius < 1.0 {
        return Err(Error::InvalidArgument(format!("support radius bound {radius} must be >= 1")));
    }
    let parts: Vec<FinitePartitionView> = (0..=n + m).into_par_iter().map(|k| family.grid(k).partition(theta)).collect();
    let lhs = entropy(theta, &parts[n]) / n as f64;
    let cond: Vec<f64> = (1..=n).into_par_iter().map(|q| conditional_entropy(theta, &parts[q + m], &parts[q])).collect();
    let rhs = cond.iter().sum::<f64>() / (n * m) as f64;
    let comp: Vec<f64> = (1..=n)
        .into_par_iter()
        .map(|q| {
            let coarse = &parts[q];
            let fine = &parts[q + m];
            grouped_entropy(theta, coarse, fine)
        })
        .collect();
    let rhs_components = comp.iter().sum::<f64>() / (n * m) as f64;
    Ok(TelescopeCheck {
        m,
        n,
        lhs,
        rhs,
        rhs_components,
        residual: (lhs - rhs).abs(),
        scale: (m as f64 + radius.log2()) / n as f64,
    })
}

/// `Σ_A θ(A) H(θ_A, fine)` by materializing each block's normalized weights.
fn grouped_entropy(theta: &DiscreteMeasure, coarse: &FinitePartitionView, fine: &FinitePartitionView) -> f64 {
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); coarse.blocks()];
    for (i, &l) in coarse.labels().iter().enumerate() {
        members[l as usize].push(i);
    }
    members
        .iter()
        .map(|idx| {
            let mass: f64 = idx.iter().map(|&i| theta.weights()[i]).sum();
            if mass <= 0.0 {
                return 0.0;
            }
            let mut cells: Vec<(u32, f64)> = idx.iter().map(|&i| (fine.labels()[i], theta.weights()[i] / mass)).collect();
            cells.sort_by_key(|c| c.0);
            let mut masses = Vec::new();
            for (l, w) in cells {
                match masses.last_mut() {
                    Some((pl, pw)) if *pl == l => *pw += w,
                    _ => masses.push((l, w)),
                }
            }
            mass * entropy_of_masses(masses.into_iter().map(|c| c.1))
        })
        .sum()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalDimension {
    pub slope: f64,
    pub stderr: f64,
    /// Radii whose balls held enough atoms to be used in the fit.
    pub radii_used: Vec<f64>,
}

/// Fewest atoms a ball must contain to enter the local-dimension fit.
pub const MIN_BALL_ATOMS: usize = 20;

/// Least-squares slope of `log₂ θ(B(x, r))` against `log₂ r`.
pub fn local_dimension(theta: &DiscreteMeasure, x: &[f64], radii: &[f64]) -> Result<LocalDimension> {
    let mut dist: Vec<(f64, f64)> = (0..theta.len())
        .map(|i| {
            let d2: f64 = theta.point(i).iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum();
            (d2.sqrt(), theta.weights()[i])
        })
        .collect();
    dist.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut cum = Vec::with_capacity(dist.len());
    let mut acc = 0.0;
    for &(_, w) in &dist {
        acc += w;
        cum.push(acc);
    }
    let mut pts = Vec::new();
    let mut used = Vec::new();
    for &r in radii {
        let count = dist.partition_point(|d| d.0 <= r);
        if count >= MIN_BALL_ATOMS.min(theta.len()) && count > 0 {
            pts.push((r.log2(), cum[count - 1].min(1.0).log2()));
            used.push(r);
        }
    }
    if pts.len() < 3 {
        return Err(Error::InsufficientResolution(format!(
            "only {} of {} radii hold at least {MIN_BALL_ATOMS} atoms",
            pts.len(),
            radii.len()
        )));
    }
    let (slope, _, stderr) = least_squares(&pts);
    Ok(LocalDimension { slope, stderr, radii_used: used })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalDimensionSummary {
    pub mean: f64,
    pub std_dev: f64,
    pub slopes: Vec<f64>,
}

/// Local-dimension slopes at `base_points` atoms drawn with `seed`.
pub fn local_dimension_summary(
    theta: &DiscreteMeasure,
    radii: &[f64],
    base_points: usize,
    seed: u64,
) -> Result<LocalDimensionSummary> {
    let mut rng = chunk_rng(seed, 0);
    let picks = WeightedIndex::new(theta.weights()).map_err(|e| Error::BadWeights(e.to_string()))?;
    let idx: Vec<usize> = (0..base_points).map(|_| picks.sample(&mut rng)).collect();
    let slopes = idx
        .par_iter()
        .map(|&i| local_dimension(theta, theta.point(i), radii).map(|l| l.slope))
        .collect::<Result<Vec<_>>>()?;
    let n = slopes.len() as f64;
    let mean = slopes.iter().sum::<f64>() / n;
    let std_dev = (slopes.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0)).sqrt();
    Ok(LocalDimensionSummary { mean, std_dev, slopes })
}

/// `n` points of dimension `dim`, chunk `k` filled by `fill` with its own stream.
pub fn sample_points<F>(n: usize, dim: usize, seed: u64, fill: F) -> Vec<f64>
where
    F: Fn(&mut ChaCha8Rng, &mut [f64]) + Sync,
{
    let ranges: Vec<_> = chunks(n).collect();
    let parts: Vec<Vec<f64>> = ranges
        .par_iter()
        .map(|(k, r)| {
            let mut rng = chunk_rng(seed, *k);
            let mut out = vec![0.0; r.len() * dim];
            for row in out.chunks_mut(dim) {
                fill(&mut rng, row);
            }
            out
        })
        .collect();
    parts.concat()
}

/// `φ_{x|depth}(0)` for `x ~ p^ℕ`, written into `out`.
pub fn draw_coding(ifs: &FloatIfs, symbols: &WeightedIndex<f64>, depth: usize, rng: &mut impl Rng, out: &mut [f64]) {
    ifs.code_into((0..depth).map(|_| symbols.sample(rng)), out);
}

/// Smallest depth with `r_max^depth < 2^{−(target_level+10)}`.
pub fn required_depth(r_max: f64, target_level: usize) -> usize {
    ((target_level as f64 + 10.0) / -r_max.log2()).floor() as usize + 1
}

/// I.i.d. truncated codings of the self-affine measure, in user coordinates.
pub fn sample_mu(
    model: &WeightedModel,
    n_points: usize,
    depth: usize,
    target_level: usize,
    seed: u64,
) -> Result<DiscreteMeasure> {
    let ifs = model.user_ifs();
    let achieved = ifs.r_max().powi(depth as i32);
    let required = (-(target_level as f64 + 10.0)).exp2();
    if !(achieved < required) {
        return Err(Error::InsufficientDepth { depth, achieved, required });
    }
    let float = ifs.to_float();
    let symbols = WeightedIndex::new(model.p_f64()).map_err(|e| Error::BadWeights(e.to_string()))?;
    let pts = sample_points(n_points, float.dim, seed, |rng, row| draw_coding(&float, &symbols, depth, rng, row));
    DiscreteMeasure::uniform(float.dim, pts)
}

/// Mean over `directions` random unit vectors of the 1-Wasserstein distance
/// between the projections of `a` and `b`.
pub fn sliced_w1(a: &DiscreteMeasure, b: &DiscreteMeasure, directions: usize, seed: u64) -> f64 {
    assert_eq!(a.dim(), b.dim(), "measures live in different dimensions");
    let d = a.dim();
    let mut rng = chunk_rng(seed, 0);
    let dirs: Vec<Vec<f64>> = (0..directions)
        .map(|_| loop {
            let v: Vec<f64> = (0..d).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-3 && norm <= 1.0 {
                break v.into_iter().map(|x| x / norm).collect();
            }
        })
        .collect();
    let per: Vec<f64> = dirs.par_iter().map(|u| w1_1d(&project(a, u), &project(b, u))).collect();
    per.iter().sum::<f64>() / directions.max(1) as f64
}

fn project(m: &DiscreteMeasure, u: &[f64]) -> Vec<(f64, f64)> {
    let mut v: Vec<(f64, f64)> = (0..m.len())
        .map(|i| (m.point(i).iter().zip(u).map(|(x, y)| x * y).sum(), m.weights()[i]))
        .collect();
    v.sort_by(|x, y| x.0.total_cmp(&y.0));
    v
}

/// `∫ |F_a − F_b|` for sorted weighted samples.
fn w1_1d(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let (mut i, mut j) = (0, 0);
    let (mut fa, mut fb) = (0.0f64, 0.0f64);
    let mut last = a[0].0.min(b[0].0);
    let mut total = 0.0;
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(p), Some(q)) => p.0.min(q.0),
            (Some(p), None) => p.0,
            (None, Some(q)) => q.0,
            (None, None) => unreachable!(),
        };
        total += (fa - fb).abs() * (x - last);
        last = x;
        while i < a.len() && a[i].0 == x {
            fa += a[i].1;
            i += 1;
        }
        while j < b.len() && b[j].0 == x {
            fb += b[j].1;
            j += 1;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::DiagonalAffineIfs;
    use crate::scalar::Mode;

    fn four_points() -> DiscreteMeasure {
        DiscreteMeasure::uniform(2, vec![0.25, 0.25, -0.25, 0.25, 0.25, -0.25, -0.25, -0.25]).unwrap()
    }

    #[test]
    fn dyadic_entropy_examples() {
        let m = four_points();
        assert!((dyadic_entropy(&m, 1.0) - 2.0).abs() < 1e-15);
        assert_eq!(dyadic_entropy(&DiscreteMeasure::point_mass(&[0.3, 0.4]), 12.0), 0.0);
        let inside = DiscreteMeasure::uniform(1, vec![0.1, 0.5, 0.9]).unwrap();
        assert_eq!(dyadic_entropy(&inside, 0.0), 0.0);
        assert_eq!(dyadic_entropy(&inside, 0.7), 0.0);
    }

    #[test]
    fn conditional_entropy_examples() {
        let m = DiscreteMeasure::uniform(1, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let xi = FinitePartitionView::singletons(4);
        let eta = FinitePartitionView::from_keys(&[0, 0, 1, 1]);
        assert!((conditional_entropy(&m, &xi, &eta) - 1.0).abs() < 1e-15);
        assert_eq!(conditional_entropy(&m, &xi, &xi), 0.0);
        let trivial = FinitePartitionView::trivial(4);
        assert!((conditional_entropy(&m, &xi, &trivial) - entropy(&m, &xi)).abs() < 1e-15);
    }

    #[test]
    fn components_and_zero_mass() {
        let m = DiscreteMeasure::uniform(1, vec![0.25, 0.75]).unwrap();
        let coarse = Grid::dyadic(1, 0.0);
        assert_eq!(component_at(&m, &coarse, &[0.5]).unwrap(), m);
        let fine = Grid::dyadic(1, 1.0);
        let c = component_at(&m, &fine, &[0.7]).unwrap();
        assert_eq!(c.points(), &[0.75]);
        assert_eq!(c.weights(), &[1.0]);
        assert!(matches!(component_at(&m, &fine, &[3.0]), Err(Error::ZeroMassBlock)));
    }

    #[test]
    fn weighted_measure_validation() {
        assert!(DiscreteMeasure::weighted(1, vec![0.0, 1.0], vec![0.5, 0.6]).is_err());
        assert!(DiscreteMeasure::weighted(1, vec![0.0, 1.0], vec![1.5, -0.5]).is_err());
        assert!(DiscreteMeasure::uniform(2, vec![0.0, 1.0, 2.0]).is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_checks_depth() {
        let ifs = DiagonalAffineIfs::parse(1, &[(&["1/3"], &["0"]), (&["1/3"], &["2/3"])], Mode::Exact).unwrap();
        let model = WeightedModel::uniform(ifs).unwrap();
        let a = sample_mu(&model, 10_000, 40, 10, 3).unwrap();
        let b = sample_mu(&model, 10_000, 40, 10, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.points().iter().all(|&x| (0.0..=1.0).contains(&x)));
        assert!(matches!(sample_mu(&model, 10, 5, 10, 3), Err(Error::InsufficientDepth { .. })));
        assert!(required_depth(1.0 / 3.0, 10) >= 13);
    }

    #[test]
    fn degenerate_weights_give_fixed_point() {
        let ifs = DiagonalAffineIfs::parse(1, &[(&["1/3"], &["0"]), (&["1/3"], &["2/3"])], Mode::Exact).unwrap();
        let p = vec![Scalar::ratio(0, 1, Mode::Exact), Scalar::ratio(1, 1, Mode::Exact)];
        let model = WeightedModel::new(ifs, p).unwrap();
        let s = sample_mu(&model, 100, 40, 10, 1).unwrap();
        assert!(s.points().iter().all(|&x| (x - 1.0).abs() < 1e-12));
    }

    use crate::scalar::Scalar;

    #[test]
    fn w1_of_shift() {
        let a = DiscreteMeasure::uniform(1, vec![0.0, 1.0]).unwrap();
        let b = a.affine_image(&[1.0], &[0.5]);
        assert!((w1_1d(&project(&a, &[1.0]), &project(&b, &[1.0])) - 0.5).abs() < 1e-15);
        assert!(sliced_w1(&a, &a, 8, 1) == 0.0);
    }

    #[test]
    fn local_dimension_of_point_mass_is_zero() {
        let m = DiscreteMeasure::uniform(1, vec![0.5; 50]).unwrap();
        let radii: Vec<f64> = (1..8).map(|k| (-(k as f64)).exp2()).collect();
        let l = local_dimension(&m, &[0.5], &radii).unwrap();
        assert!(l.slope.abs() < 1e-12);
    }

    #[test]
    fn telescope_of_point_mass_is_zero() {
        let m = DiscreteMeasure::point_mass(&[0.3]);
        let t = telescope_check(&m, &DyadicFamily { dim: 1 }, 2, 10, 1.0).unwrap();
        assert_eq!(t.lhs, 0.0);
        assert_eq!(t.rhs, 0.0);
        assert!(telescope_check(&m, &DyadicFamily { dim: 1 }, 0, 10, 1.0).is_err());
    }
}
