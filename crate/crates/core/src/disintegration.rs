//! Grouping of level-`N` words by linear part, the random measures it
//! induces, and the finite-level random-walk entropy.
//!
//! Symbols whose maps share a linear part form a *symbol group*. The linear
//! part of a word depends only on how many symbols it takes from each group,
//! so a class of `Γ` is a set of count vectors with equal products. This keeps
//! `Γ` cheap to build even when `|Λ|^N` is far beyond any enumeration budget.
//! Everything here works in the user's coordinate order.

use std::collections::HashMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dims::{f_phi, LyapunovProfile};
use crate::error::{Error, Result};
use crate::ifs::{shannon_entropy, DiagonalAffineIfs, FloatIfs, WeightedModel, Word};
use crate::measure::{dyadic_entropy, sample_points, sliced_w1, DiscreteMeasure, Grid, PartitionFamily};
use crate::rng::{chunk_rng, derive_seed};
use crate::scalar::{Mode, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    /// Words are grouped by their linear part.
    #[default]
    Linear,
    /// Every word is its own class.
    Word,
}

impl std::str::FromStr for Granularity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Granularity::Linear),
            "word" => Ok(Granularity::Word),
            _ => Err(Error::InvalidArgument(format!("granularity must be linear or word, got {s:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
enum ClassContent {
    /// Group-count vectors with their unnormalized probabilities.
    Counts(Vec<(Vec<usize>, f64)>),
    Word(Word),
}

#[derive(Clone, Debug)]
pub struct GammaClass {
    /// Signed diagonal linear part shared by all member words.
    pub linear: Vec<Scalar>,
    pub mass: f64,
    /// Exact class mass when the model is exact.
    pub exact_mass: Option<Scalar>,
    /// Lexicographically first member word.
    pub first_word: Word,
    content: ClassContent,
}

impl GammaClass {
    pub fn linear_f64(&self) -> Vec<f64> {
        self.linear.iter().map(Scalar::to_f64).collect()
    }
}

/// The partition `Γ` of `Λ^N`.
#[derive(Clone, Debug)]
pub struct GammaPartition {
    block_len: usize,
    granularity: Granularity,
    ifs: DiagonalAffineIfs,
    float: FloatIfs,
    p: Vec<f64>,
    p_exact: Option<Vec<Scalar>>,
    /// `group_of[i]` is the symbol group of symbol `i`.
    group_of: Vec<usize>,
    groups: Vec<Vec<usize>>,
    classes: Vec<GammaClass>,
    class_of_counts: HashMap<Vec<usize>, u32>,
}

fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in (0..=total).rev() {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn multinomial_f64(counts: &[usize]) -> f64 {
    let mut acc = 1.0;
    let mut n = 0usize;
    for &c in counts {
        for k in 1..=c {
            n += 1;
            acc = acc * n as f64 / k as f64;
        }
    }
    acc
}

fn multinomial_exact(counts: &[usize]) -> Scalar {
    let mut acc = Scalar::one(Mode::Exact);
    let mut n = 0i64;
    for &c in counts {
        for k in 1..=c as i64 {
            n += 1;
            acc = &acc * &Scalar::ratio(n, k, Mode::Exact);
        }
    }
    acc
}

fn vec_cmp(a: &[Scalar], b: &[Scalar]) -> std::cmp::Ordering {
    a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
}

fn same_linear(a: &[Scalar], b: &[Scalar], mode: Mode) -> bool {
    match mode {
        Mode::Exact => a == b,
        Mode::Float => a.iter().zip(b).all(|(x, y)| {
            let (x, y) = (x.to_f64(), y.to_f64());
            (x - y).abs() <= 1e-9 * x.abs().max(y.abs())
        }),
    }
}

impl GammaPartition {
    /// Builds `Γ` for blocks of length `block_len`. Word granularity
    /// enumerates `Λ^N` and is subject to `budget`.
    pub fn build(model: &WeightedModel, block_len: usize, granularity: Granularity, budget: u64) -> Result<Self> {
        if block_len == 0 {
            return Err(Error::InvalidArgument("block length N must be at least 1".into()));
        }
        let ifs = model.user_ifs();
        let mode = ifs.mode();
        let d = ifs.dim();
        let p = model.p_f64().to_vec();
        let p_exact = (mode == Mode::Exact).then(|| model.p().to_vec());

        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut group_of = vec![0; ifs.len()];
        for i in 0..ifs.len() {
            let rates = &ifs.maps()[i].rates;
            match groups.iter().position(|g| &ifs.maps()[g[0]].rates == rates) {
                Some(g) => {
                    groups[g].push(i);
                    group_of[i] = g;
                }
                None => {
                    group_of[i] = groups.len();
                    groups.push(vec![i]);
                }
            }
        }
        let group_mass: Vec<f64> = groups.iter().map(|g| g.iter().map(|&i| p[i]).sum()).collect();
        let group_mass_exact: Option<Vec<Scalar>> = p_exact.as_ref().map(|pe| {
            groups.iter().map(|g| g.iter().fold(Scalar::zero(mode), |acc, &i| &acc + &pe[i])).collect()
        });

        // One entry per count vector: (counts, linear part, mass, exact mass, first word).
        let mut entries: Vec<(Vec<usize>, Vec<Scalar>, f64, Option<Scalar>, Word)> = compositions(block_len, groups.len())
            .into_iter()
            .map(|c| {
                let linear: Vec<Scalar> = (0..d)
                    .map(|j| {
                        c.iter().enumerate().fold(Scalar::one(mode), |acc, (g, &k)| {
                            &acc * &ifs.rate(groups[g][0], j).pow(k as u32)
                        })
                    })
                    .collect();
                let mass = multinomial_f64(&c)
                    * c.iter().zip(&group_mass).map(|(&k, m)| m.powi(k as i32)).product::<f64>();
                let exact = group_mass_exact.as_ref().map(|gm| {
                    c.iter().zip(gm).fold(multinomial_exact(&c), |acc, (&k, m)| &acc * &m.pow(k as u32))
                });
                let mut first: Vec<usize> =
                    c.iter().enumerate().flat_map(|(g, &k)| std::iter::repeat_n(groups[g][0], k)).collect();
                first.sort_unstable();
                (c, linear, mass, exact, Word(first))
            })
            .collect();

        let classes: Vec<GammaClass> = match granularity {
            Granularity::Linear => {
                entries.sort_by(|a, b| vec_cmp(&a.1, &b.1).then_with(|| a.4.cmp(&b.4)));
                let mut merged: Vec<GammaClass> = Vec::new();
                for (c, linear, mass, exact, first) in entries {
                    match merged.last_mut() {
                        Some(cl) if same_linear(&cl.linear, &linear, mode) => {
                            cl.mass += mass;
                            if let (Some(a), Some(b)) = (cl.exact_mass.as_mut(), exact) {
                                *a = &*a + &b;
                            }
                            if first < cl.first_word {
                                cl.first_word = first;
                            }
                            if let ClassContent::Counts(v) = &mut cl.content {
                                v.push((c, mass));
                            }
                        }
                        _ => merged.push(GammaClass {
                            linear,
                            mass,
                            exact_mass: exact,
                            first_word: first,
                            content: ClassContent::Counts(vec![(c, mass)]),
                        }),
                    }
                }
                merged.sort_by(|a, b| a.first_word.cmp(&b.first_word));
                merged
            }
            Granularity::Word => {
                let count = ifs.level_size(block_len, budget)?;
                (0..count as u64)
                    .map(|w| {
                        let word = Word::from_index(w, block_len, ifs.len());
                        let map = ifs.compose_word(&word).expect("symbols in range");
                        let mass = word.symbols().iter().map(|&s| p[s]).product();
                        let exact_mass = p_exact.as_ref().map(|pe| {
                            word.symbols().iter().fold(Scalar::one(mode), |acc, &s| &acc * &pe[s])
                        });
                        GammaClass {
                            linear: map.rates,
                            mass,
                            exact_mass,
                            first_word: word.clone(),
                            content: ClassContent::Word(word),
                        }
                    })
                    .collect()
            }
        };

        let mut class_of_counts = HashMap::new();
        if granularity == Granularity::Linear {
            for (k, cl) in classes.iter().enumerate() {
                if let ClassContent::Counts(v) = &cl.content {
                    for (c, _) in v {
                        class_of_counts.insert(c.clone(), k as u32);
                    }
                }
            }
        }
        let float = ifs.to_float();
        Ok(GammaPartition { block_len, granularity, ifs, float, p, p_exact, group_of, groups, classes, class_of_counts })
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn granularity(&self) -> Granularity {
        self.granularity
    }

    pub fn classes(&self) -> &[GammaClass] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn ifs(&self) -> &DiagonalAffineIfs {
        &self.ifs
    }

    pub fn masses(&self) -> Vec<f64> {
        self.classes.iter().map(|c| c.mass).collect()
    }

    /// `H(β, Γ)`.
    pub fn entropy(&self) -> f64 {
        shannon_entropy(&self.masses())
    }

    /// Class id of a block of length `N`.
    pub fn class_of(&self, block: &[usize]) -> u32 {
        debug_assert_eq!(block.len(), self.block_len);
        match self.granularity {
            Granularity::Linear => {
                let mut c = vec![0; self.groups.len()];
                for &s in block {
                    c[self.group_of[s]] += 1;
                }
                self.class_of_counts[&c]
            }
            Granularity::Word => {
                block.iter().fold(0u64, |acc, &s| acc * self.p.len() as u64 + s as u64) as u32
            }
        }
    }

    /// Member words of class `k` with their probabilities under the
    /// normalized restriction, in lexicographic order.
    pub fn members(&self, k: usize, budget: u64) -> Result<Vec<(Word, f64)>> {
        let cl = &self.classes[k];
        if cl.mass <= 0.0 {
            return Err(Error::ZeroMassClass(k));
        }
        if let ClassContent::Word(w) = &cl.content {
            return Ok(vec![(w.clone(), 1.0)]);
        }
        let count = self.ifs.level_size(self.block_len, budget)?;
        Ok((0..count as u64)
            .filter_map(|w| {
                let word = Word::from_index(w, self.block_len, self.p.len());
                (self.class_of(word.symbols()) as usize == k).then(|| {
                    let pr: f64 = word.symbols().iter().map(|&s| self.p[s]).product();
                    (word, pr / cl.mass)
                })
            })
            .filter(|(_, pr)| *pr > 0.0)
            .collect())
    }

    /// Precomputed tables for drawing blocks from each class.
    pub fn sampler(&self) -> Result<ClassSampler> {
        let group_symbols = self
            .groups
            .iter()
            .map(|g| {
                let w: Vec<f64> = g.iter().map(|&i| self.p[i]).collect();
                if w.iter().sum::<f64>() > 0.0 {
                    WeightedIndex::new(w).ok()
                } else {
                    None
                }
            })
            .collect();
        let per_class = self
            .classes
            .iter()
            .map(|cl| match &cl.content {
                ClassContent::Word(w) => Some(BlockDraw::Fixed(w.symbols().to_vec())),
                ClassContent::Counts(v) => {
                    let weights: Vec<f64> = v.iter().map(|(_, m)| *m).collect();
                    WeightedIndex::new(&weights)
                        .ok()
                        .map(|idx| BlockDraw::Counts { counts: v.iter().map(|(c, _)| c.clone()).collect(), idx })
                }
            })
            .collect();
        let classes = WeightedIndex::new(self.masses()).map_err(|e| Error::BadWeights(e.to_string()))?;
        Ok(ClassSampler { groups: self.groups.clone(), group_symbols, per_class, classes })
    }

    /// `A^{ω|n}` as a product of class linear parts.
    pub fn omega_scale(&self, omega: &OmegaPrefix) -> OmegaScale {
        let d = self.ifs.dim();
        let mut linear = vec![1.0f64; d];
        let mut chi = vec![0.0f64; d];
        for &k in &omega.0 {
            let a = self.classes[k as usize].linear_f64();
            for j in 0..d {
                linear[j] *= a[j];
                chi[j] -= a[j].abs().log2();
            }
        }
        let lambda = linear.iter().map(|a| a.abs()).collect();
        OmegaScale { linear, lambda, chi }
    }

    /// `r_min^{nN} ≤ λ^{ω|n}_j ≤ r_max^{nN}` for every coordinate, in log form.
    pub fn scale_within_bounds(&self, omega: &OmegaPrefix, scale: &OmegaScale) -> bool {
        let steps = (omega.len() * self.block_len) as f64;
        let lo = -steps * self.ifs.r_min().log2();
        let hi = -steps * self.ifs.r_max().log2();
        let slack = 1e-9 * lo.max(1.0);
        scale.chi.iter().all(|&c| c >= hi - slack && c <= lo + slack)
    }
}

#[derive(Clone, Debug)]
enum BlockDraw {
    Fixed(Vec<usize>),
    Counts { counts: Vec<Vec<usize>>, idx: WeightedIndex<f64> },
}

/// Draws blocks of `β` restricted and normalized to a class.
#[derive(Clone, Debug)]
pub struct ClassSampler {
    groups: Vec<Vec<usize>>,
    group_symbols: Vec<Option<WeightedIndex<f64>>>,
    per_class: Vec<Option<BlockDraw>>,
    classes: WeightedIndex<f64>,
}

impl ClassSampler {
    /// A class id drawn from `(β(γ))_γ`.
    pub fn draw_class(&self, rng: &mut impl Rng) -> u32 {
        self.classes.sample(rng) as u32
    }

    /// Appends one block from class `k` to `out`.
    pub fn draw_block(&self, k: u32, rng: &mut impl Rng, out: &mut Vec<usize>) -> Result<()> {
        match self.per_class.get(k as usize).and_then(Option::as_ref) {
            None => Err(Error::ZeroMassClass(k as usize)),
            Some(BlockDraw::Fixed(w)) => {
                out.extend_from_slice(w);
                Ok(())
            }
            Some(BlockDraw::Counts { counts, idx }) => {
                let c = &counts[idx.sample(rng)];
                let mut slots: Vec<usize> = c.iter().enumerate().flat_map(|(g, &k)| std::iter::repeat_n(g, k)).collect();
                slots.shuffle(rng);
                for g in slots {
                    let pick = self.group_symbols[g].as_ref().expect("positive group mass").sample(rng);
                    out.push(self.groups[g][pick]);
                }
                Ok(())
            }
        }
    }
}

/// Class ids `ω_1 … ω_n`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct OmegaPrefix(pub Vec<u32>);

impl OmegaPrefix {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn prefix(&self, n: usize) -> OmegaPrefix {
        OmegaPrefix(self.0[..n].to_vec())
    }

    /// `T^n ω`.
    pub fn shift(&self, n: usize) -> OmegaPrefix {
        OmegaPrefix(self.0[n..].to_vec())
    }
}

/// `n` i.i.d. classes from `P`.
pub fn sample_omega(gamma: &GammaPartition, n: usize, seed: u64) -> Result<OmegaPrefix> {
    let sampler = gamma.sampler()?;
    let mut rng = chunk_rng(seed, 0);
    Ok(OmegaPrefix((0..n).map(|_| sampler.draw_class(&mut rng)).collect()))
}

/// One word of length `nN` drawn from `β^ω`.
pub fn sample_beta_omega_word(gamma: &GammaPartition, omega: &OmegaPrefix, rng: &mut impl Rng) -> Result<Word> {
    let sampler = gamma.sampler()?;
    let mut out = Vec::with_capacity(omega.len() * gamma.block_len());
    for &k in &omega.0 {
        sampler.draw_block(k, rng, &mut out)?;
    }
    Ok(Word(out))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NuMode {
    /// Every word consistent with `ω`, weighted exactly.
    Exact { budget: u64 },
    /// `count` atoms at sampled words, equal weights.
    Sampled { count: usize, seed: u64 },
}

/// `ν^ω_n = Σ_u β^ω([u]) δ_{φ_u(0)}` with provenance words.
pub fn nu_omega_n(gamma: &GammaPartition, omega: &OmegaPrefix, mode: NuMode) -> Result<DiscreteMeasure> {
    let d = gamma.ifs.dim();
    if omega.is_empty() {
        return DiscreteMeasure::point_mass(&vec![0.0; d]).with_provenance(vec![Word::empty()]);
    }
    match mode {
        NuMode::Exact { budget } => {
            let mut lists = Vec::with_capacity(omega.len());
            let mut total: u128 = 1;
            for &k in &omega.0 {
                let m = gamma.members(k as usize, budget)?;
                total = total.saturating_mul(m.len() as u128);
                if total > budget as u128 {
                    return Err(Error::BudgetExceeded { requested: total, budget });
                }
                lists.push(m);
            }
            let mut words = vec![(Vec::new(), 1.0f64)];
            for list in &lists {
                words = words
                    .iter()
                    .flat_map(|(w, pr)| {
                        list.iter().map(move |(b, q)| {
                            let mut v = w.clone();
                            v.extend_from_slice(b.symbols());
                            (v, pr * q)
                        })
                    })
                    .collect();
            }
            let mut points = vec![0.0; words.len() * d];
            points
                .par_chunks_mut(d)
                .zip(&words)
                .for_each(|(row, (w, _))| gamma.float.code_into(w.iter().copied(), row));
            let total: f64 = words.iter().map(|w| w.1).sum();
            let weights = words.iter().map(|w| w.1 / total).collect();
            DiscreteMeasure::weighted(d, points, weights)?
                .with_provenance(words.into_iter().map(|(w, _)| Word(w)).collect())
        }
        NuMode::Sampled { count, seed } => {
            let sampler = gamma.sampler()?;
            let mut words = Vec::with_capacity(count);
            let mut rng = chunk_rng(seed, 0);
            let mut points = vec![0.0; count * d];
            for row in points.chunks_mut(d) {
                let mut w = Vec::with_capacity(omega.len() * gamma.block_len());
                for &k in &omega.0 {
                    sampler.draw_block(k, &mut rng, &mut w)?;
                }
                gamma.float.code_into(w.iter().copied(), row);
                words.push(Word(w));
            }
            DiscreteMeasure::uniform(d, points)?.with_provenance(words)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OmegaScale {
    /// Signed diagonal of `A^{ω|n}`.
    pub linear: Vec<f64>,
    /// `λ^{ω|n}_j = |A^{ω|n}_j|`.
    pub lambda: Vec<f64>,
    /// `χ^{ω|n}_j = −log₂ λ^{ω|n}_j`.
    pub chi: Vec<f64>,
}

impl OmegaScale {
    /// Cells of `E^ω_n = A^{ω|n} 𝒟_0^d`.
    pub fn grid(&self) -> Grid {
        Grid::cells(self.lambda.clone())
    }
}

/// Index of the `E^ω_n` cell containing `x`.
pub fn nonconformal_key(scale: &OmegaScale, x: &[f64]) -> Vec<i128> {
    scale.grid().key(x)
}

/// The grids `E^ω_0, E^ω_1, …` along a fixed prefix.
#[derive(Clone, Debug)]
pub struct OmegaFamily {
    scales: Vec<Vec<f64>>,
}

impl OmegaFamily {
    pub fn new(gamma: &GammaPartition, omega: &OmegaPrefix) -> Self {
        let scales = (0..=omega.len()).map(|n| gamma.omega_scale(&omega.prefix(n)).lambda).collect();
        OmegaFamily { scales }
    }

    pub fn max_level(&self) -> usize {
        self.scales.len() - 1
    }
}

impl PartitionFamily for OmegaFamily {
    fn grid(&self, level: usize) -> Grid {
        Grid::cells(self.scales[level].clone())
    }
}

/// Blocks needed so that the truncation error stays below `2^{-(level+10)}`.
pub fn tail_blocks(gamma: &GammaPartition, level: usize) -> usize {
    let per_block = -(gamma.block_len as f64) * gamma.ifs.r_max().log2();
    ((level as f64 + 10.0) / per_block).ceil() as usize + 1
}

/// Draws `count` points `Π(x)`, `x ~ β^ω`, along the full prefix `omega`.
pub fn sample_mu_omega(gamma: &GammaPartition, omega: &OmegaPrefix, count: usize, seed: u64) -> Result<DiscreteMeasure> {
    let sampler = gamma.sampler()?;
    for &k in &omega.0 {
        if gamma.classes[k as usize].mass <= 0.0 {
            return Err(Error::ZeroMassClass(k as usize));
        }
    }
    let d = gamma.ifs.dim();
    let float = &gamma.float;
    let pts = sample_points(count, d, seed, |rng, row| {
        let mut w = Vec::with_capacity(omega.len() * gamma.block_len);
        for &k in &omega.0 {
            sampler.draw_block(k, rng, &mut w).expect("class masses checked");
        }
        float.code_into(w.iter().copied(), row);
    });
    DiscreteMeasure::uniform(d, pts)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelGap {
    pub level: usize,
    pub direct: f64,
    pub convolved: f64,
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvolutionReport {
    pub block_len: usize,
    pub n: usize,
    pub samples: usize,
    pub omega: OmegaPrefix,
    pub nu_atoms: usize,
    pub nu_exact: bool,
    pub levels: Vec<LevelGap>,
    pub max_gap: f64,
    pub sliced_w1: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct ConvolutionConfig {
    pub n: usize,
    pub samples: usize,
    pub levels: std::ops::RangeInclusive<usize>,
    pub tolerance: f64,
    pub directions: usize,
    /// Largest `ν^ω_n` enumerated exactly before falling back to sampling.
    pub exact_nu_cap: u64,
    pub seed: u64,
}

impl Default for ConvolutionConfig {
    fn default() -> Self {
        ConvolutionConfig {
            n: 1,
            samples: 100_000,
            levels: 2..=10,
            tolerance: 0.05,
            directions: 64,
            exact_nu_cap: 100_000,
            seed: 0,
        }
    }
}

/// Compares direct samples of `μ^ω` with samples of `ν^ω_n * A^{ω|n} μ^{T^nω}`
/// through dyadic entropies and a sliced transport distance.
pub fn convolution_check(gamma: &GammaPartition, cfg: &ConvolutionConfig) -> Result<ConvolutionReport> {
    let top = *cfg.levels.end();
    let total = cfg.n + tail_blocks(gamma, top);
    let omega = sample_omega(gamma, total, derive_seed(cfg.seed, 1))?;
    let direct = sample_mu_omega(gamma, &omega, cfg.samples, derive_seed(cfg.seed, 2))?;

    let head = omega.prefix(cfg.n);
    let tail = omega.shift(cfg.n);
    let (nu, nu_exact) = match nu_omega_n(gamma, &head, NuMode::Exact { budget: cfg.exact_nu_cap }) {
        Ok(nu) => (nu, true),
        Err(Error::BudgetExceeded { .. }) => (
            nu_omega_n(gamma, &head, NuMode::Sampled { count: cfg.samples, seed: derive_seed(cfg.seed, 3) })?,
            false,
        ),
        Err(e) => return Err(e),
    };
    let scale = gamma.omega_scale(&head);
    let sampler = gamma.sampler()?;
    let atoms = WeightedIndex::new(nu.weights()).map_err(|e| Error::BadWeights(e.to_string()))?;
    let d = gamma.ifs.dim();
    let float = &gamma.float;
    let pts = sample_points(cfg.samples, d, derive_seed(cfg.seed, 4), |rng, row| {
        let a = atoms.sample(rng);
        let mut w = Vec::with_capacity(tail.len() * gamma.block_len);
        for &k in &tail.0 {
            sampler.draw_block(k, rng, &mut w).expect("sampled classes have mass");
        }
        float.code_into(w.iter().copied(), row);
        for j in 0..d {
            row[j] = nu.point(a)[j] + scale.linear[j] * row[j];
        }
    });
    let convolved = DiscreteMeasure::uniform(d, pts)?;

    let levels: Vec<LevelGap> = cfg
        .levels
        .clone()
        .map(|t| {
            let a = dyadic_entropy(&direct, t as f64);
            let b = dyadic_entropy(&convolved, t as f64);
            LevelGap { level: t, direct: a, convolved: b, gap: (a - b).abs() }
        })
        .collect();
    let max_gap = levels.iter().map(|l| l.gap).fold(0.0, f64::max);
    let w1 = sliced_w1(&direct, &convolved, cfg.directions, derive_seed(cfg.seed, 5));
    Ok(ConvolutionReport {
        block_len: gamma.block_len,
        n: cfg.n,
        samples: cfg.samples,
        omega: head,
        nu_atoms: nu.len(),
        nu_exact,
        levels,
        max_gap,
        sliced_w1: w1,
        tolerance: cfg.tolerance,
        pass: max_gap < cfg.tolerance,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HrwMethod {
    Enumerated,
    /// `H(p) − H(β, Γ)/N`, used past the budget when overlaps are ruled out.
    ClosedForm,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HrwFinite {
    pub n: usize,
    pub block_len: usize,
    pub value: f64,
    pub method: HrwMethod,
    /// Distinct words gave distinct maps at level `nN`; `None` when not enumerated.
    pub injective: Option<bool>,
}

/// `(1/nN)[H(β, 𝒞_{nN} ∨ Γ_n) − H(β, Γ_n)]` where `Γ_n` is the join of the
/// block partitions. Past `budget` the closed form is used only when
/// `no_overlap_evidence` is set.
pub fn h_rw_finite(
    model: &WeightedModel,
    gamma: &GammaPartition,
    n: usize,
    budget: u64,
    no_overlap_evidence: bool,
) -> Result<HrwFinite> {
    if n == 0 {
        return Err(Error::InvalidArgument("h_rw needs n >= 1".into()));
    }
    let big_n = gamma.block_len;
    let len = n * big_n;
    let ifs = &gamma.ifs;
    if let Err(e @ Error::BudgetExceeded { .. }) = ifs.level_size(len, budget) {
        if !no_overlap_evidence {
            return Err(e);
        }
        return Ok(HrwFinite {
            n,
            block_len: big_n,
            value: model.entropy() - gamma.entropy() / big_n as f64,
            method: HrwMethod::ClosedForm,
            injective: None,
        });
    }
    let maps = ifs.enumerate_level(len, budget)?;
    let words = maps.len();
    let alphabet = ifs.len();
    let mode = ifs.mode();

    // Word probabilities in lexicographic order.
    let mut probs = vec![Scalar::one(mode)];
    let p_scalar: Vec<Scalar> = match &gamma.p_exact {
        Some(pe) => pe.clone(),
        None => gamma.p.iter().map(|&x| Scalar::Float(x)).collect(),
    };
    for _ in 0..len {
        probs = probs.iter().flat_map(|u| p_scalar.iter().map(move |q| u * q)).collect();
    }

    let block_words = (alphabet as u64).pow(big_n as u32);
    let block_class: Vec<u32> = (0..block_words)
        .map(|b| gamma.class_of(Word::from_index(b, big_n, alphabet).symbols()))
        .collect();
    let join: Vec<Vec<u32>> = (0..words as u64)
        .into_par_iter()
        .map(|w| {
            let mut seq = vec![0u32; n];
            let mut rest = w;
            for k in (0..n).rev() {
                seq[k] = block_class[(rest % block_words) as usize];
                rest /= block_words;
            }
            seq
        })
        .collect();

    let map_ids = map_class_ids(&maps, mode);
    let distinct_maps = map_ids.iter().max().map_or(0, |m| *m as usize + 1);
    let joint_keys: Vec<(&[u32], u32)> = join.iter().map(|s| s.as_slice()).zip(map_ids.iter().copied()).collect();
    let joint = crate::measure::FinitePartitionView::from_keys(&joint_keys);
    let join_part = crate::measure::FinitePartitionView::from_keys(&join);

    let entropy_of = |part: &crate::measure::FinitePartitionView| -> f64 {
        let mut masses = vec![Scalar::zero(mode); part.blocks()];
        for (w, &l) in part.labels().iter().enumerate() {
            masses[l as usize] = &masses[l as usize] + &probs[w];
        }
        shannon_entropy(&masses.iter().map(Scalar::to_f64).collect::<Vec<_>>())
    };
    let value = (entropy_of(&joint) - entropy_of(&join_part)) / len as f64;
    Ok(HrwFinite {
        n,
        block_len: big_n,
        value: value.max(0.0),
        method: HrwMethod::Enumerated,
        injective: Some(distinct_maps == words),
    })
}

/// Dense ids of equal maps (within `1e-9` relative in float mode).
fn map_class_ids(maps: &[crate::ifs::ComposedMap], mode: Mode) -> Vec<u32> {
    let key = |m: &crate::ifs::ComposedMap| -> Vec<Scalar> { m.rates.iter().chain(&m.offsets).cloned().collect() };
    let keys: Vec<Vec<Scalar>> = maps.iter().map(key).collect();
    let mut order: Vec<usize> = (0..maps.len()).collect();
    order.par_sort_unstable_by(|&a, &b| vec_cmp(&keys[a], &keys[b]).then(a.cmp(&b)));
    let mut ids = vec![0u32; maps.len()];
    let mut next = 0u32;
    for k in 1..order.len() {
        let (a, b) = (&keys[order[k - 1]], &keys[order[k]]);
        let equal = match mode {
            Mode::Exact => a == b,
            Mode::Float => {
                let scale = a.iter().map(|x| x.to_f64().abs()).fold(1.0, f64::max);
                a.iter().zip(b).all(|(x, y)| (x.to_f64() - y.to_f64()).abs() <= 1e-9 * scale)
            }
        };
        if !equal {
            next += 1;
        }
        ids[order[k]] = next;
    }
    ids
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KappaReport {
    pub dim_cala: f64,
    pub kappa: f64,
    /// `min{d, f_Φ(h)}` and its `κ` for the supplied finite-level `h`.
    pub predicted_dim: Option<f64>,
    pub predicted_kappa: Option<f64>,
}

/// `κ = Σ_{j<d} χ_j + χ_d(dim 𝒜 − (d−1))`.
pub fn kappa(profile: &LyapunovProfile, dim_cala: f64) -> f64 {
    let d = profile.dim();
    profile.prefix()[d - 1] + profile.chi()[d - 1] * (dim_cala - (d as f64 - 1.0))
}

pub fn kappa_estimate(model: &WeightedModel, dim_cala: f64, h_rw: Option<f64>) -> Result<KappaReport> {
    let profile = LyapunovProfile::of_model(model);
    let d = model.dim() as f64;
    let predicted_dim = h_rw.map(|h| f_phi(&profile, h.max(0.0)).map(|f| f.min(d))).transpose()?;
    Ok(KappaReport {
        dim_cala,
        kappa: kappa(&profile, dim_cala),
        predicted_kappa: predicted_dim.map(|pd| kappa(&profile, pd)),
        predicted_dim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::separation::DEFAULT_BUDGET;

    fn q(n: i64, d: i64) -> Scalar {
        Scalar::ratio(n, d, Mode::Exact)
    }

    fn example(p0: (i64, i64)) -> WeightedModel {
        let ifs = DiagonalAffineIfs::parse(
            2,
            &[(&["1/2", "1/3"], &["0", "0"]), (&["1/3", "1/2"], &["1", "1"])],
            Mode::Exact,
        )
        .unwrap();
        WeightedModel::new(ifs, vec![q(p0.0, p0.1), &q(1, 1) - &q(p0.0, p0.1)]).unwrap()
    }

    fn cantor() -> WeightedModel {
        let ifs = DiagonalAffineIfs::parse(1, &[(&["1/3"], &["0"]), (&["1/3"], &["2/3"])], Mode::Exact).unwrap();
        WeightedModel::uniform(ifs).unwrap()
    }

    #[test]
    fn example_gamma_has_three_classes() {
        let g = GammaPartition::build(&example((1, 2)), 2, Granularity::Linear, DEFAULT_BUDGET).unwrap();
        assert_eq!(g.len(), 3);
        let firsts: Vec<String> = g.classes().iter().map(|c| c.first_word.to_string()).collect();
        assert_eq!(firsts, ["00", "01", "11"]);
        assert_eq!(g.classes()[1].exact_mass, Some(q(1, 2)));
        assert_eq!(g.classes()[1].linear, vec![q(1, 6), q(1, 6)]);
        assert_eq!(g.class_of(&[1, 0]), 1);
        let members: Vec<String> = g.members(1, DEFAULT_BUDGET).unwrap().iter().map(|m| m.0.to_string()).collect();
        assert_eq!(members, ["01", "10"]);
    }

    #[test]
    fn homogeneous_gamma_is_trivial() {
        let g = GammaPartition::build(&cantor(), 5, Granularity::Linear, DEFAULT_BUDGET).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g.classes()[0].exact_mass, Some(q(1, 1)));
        let w = GammaPartition::build(&cantor(), 3, Granularity::Word, DEFAULT_BUDGET).unwrap();
        assert_eq!(w.len(), 8);
    }

    #[test]
    fn nu_for_cantor() {
        let g = GammaPartition::build(&cantor(), 1, Granularity::Linear, DEFAULT_BUDGET).unwrap();
        let nu = nu_omega_n(&g, &OmegaPrefix(vec![0, 0]), NuMode::Exact { budget: 1000 }).unwrap();
        let expect = [0.0, 2.0 / 9.0, 2.0 / 3.0, 8.0 / 9.0];
        for (a, b) in nu.points().iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(nu.weights().iter().all(|&w| w == 0.25));
        let zero = nu_omega_n(&g, &OmegaPrefix(vec![]), NuMode::Exact { budget: 1000 }).unwrap();
        assert_eq!(zero.points(), &[0.0]);
    }

    #[test]
    fn omega_scale_and_keys() {
        let g = GammaPartition::build(&example((1, 2)), 2, Granularity::Linear, DEFAULT_BUDGET).unwrap();
        let om = OmegaPrefix(vec![1]);
        let s = g.omega_scale(&om);
        assert!((s.lambda[0] - 1.0 / 6.0).abs() < 1e-15);
        assert!(g.scale_within_bounds(&om, &s));
        assert_eq!(nonconformal_key(&s, &[0.2, 0.9]), vec![1, 5]);
        let id = g.omega_scale(&OmegaPrefix(vec![]));
        assert_eq!(id.lambda, vec![1.0, 1.0]);
        assert_eq!(nonconformal_key(&id, &[0.5, -0.5]), vec![0, -1]);
    }

    #[test]
    fn example_h_rw_is_quarter_bit() {
        let m = example((1, 2));
        let g = GammaPartition::build(&m, 2, Granularity::Linear, DEFAULT_BUDGET).unwrap();
        let h = h_rw_finite(&m, &g, 1, DEFAULT_BUDGET, false).unwrap();
        assert!((h.value - 0.25).abs() < 1e-12);
        assert_eq!(h.injective, Some(true));
    }

    #[test]
    fn closed_form_requires_evidence() {
        let m = example((1, 2));
        let g = GammaPartition::build(&m, 2, Granularity::Linear, DEFAULT_BUDGET).unwrap();
        assert!(matches!(h_rw_finite(&m, &g, 10, 100, false), Err(Error::BudgetExceeded { .. })));
        let h = h_rw_finite(&m, &g, 10, 100, true).unwrap();
        assert_eq!(h.method, HrwMethod::ClosedForm);
        assert!((h.value - 0.25).abs() < 1e-12);
    }

    #[test]
    fn deterministic_class_draws_its_word() {
        let m = example((1, 2));
        let g = GammaPartition::build(&m, 2, Granularity::Linear, DEFAULT_BUDGET).unwrap();
        let mut rng = chunk_rng(1, 0);
        let w = sample_beta_omega_word(&g, &OmegaPrefix(vec![0, 2]), &mut rng).unwrap();
        assert_eq!(w.to_string(), "0011");
    }

    #[test]
    fn kappa_endpoints() {
        let m = example((1, 3));
        let prof = LyapunovProfile::of_model(&m);
        assert!((kappa(&prof, 2.0) - prof.total()).abs() < 1e-12);
        assert!((kappa(&prof, 1.0) - prof.chi()[0]).abs() < 1e-12);
    }
}
