//! Diagonal affine iterated function systems, words, the coding map and the
//! weighted model that every dimension formula consumes.
//!
//! All logarithms are base 2, so entropies and exponents are in bits.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Mode, Scalar};
use crate::MAX_DIM;

/// One map `x ↦ diag(rates) x + offsets`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap {
    pub rates: Vec<Scalar>,
    pub offsets: Vec<Scalar>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalAffineIfs {
    dim: usize,
    mode: Mode,
    maps: Vec<AffineMap>,
}

impl DiagonalAffineIfs {
    pub fn new(dim: usize, maps: Vec<AffineMap>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch("ambient dimension must be at least 1".into()));
        }
        if dim > MAX_DIM {
            return Err(Error::DimensionTooLarge(dim));
        }
        if maps.is_empty() {
            return Err(Error::DimensionMismatch("an IFS needs at least one map".into()));
        }
        let mode = maps[0].rates.first().map(Scalar::mode).unwrap_or(Mode::Float);
        for (i, m) in maps.iter().enumerate() {
            if m.rates.len() != dim || m.offsets.len() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "map {i} has {} rates and {} offsets, expected {dim}",
                    m.rates.len(),
                    m.offsets.len()
                )));
            }
            if m.rates.iter().chain(&m.offsets).any(|s| s.mode() != mode) {
                return Err(Error::DimensionMismatch(format!("map {i} mixes exact and float scalars")));
            }
            for (j, r) in m.rates.iter().enumerate() {
                let a = r.abs();
                if a.is_zero() || a >= Scalar::one(mode) {
                    return Err(Error::RateOutOfRange { map: i, coord: j, value: r.to_string() });
                }
            }
        }
        Ok(DiagonalAffineIfs { dim, mode, maps })
    }

    /// Convenience constructor from `(rates, offsets)` given as text.
    pub fn parse(dim: usize, maps: &[(&[&str], &[&str])], mode: Mode) -> Result<Self> {
        let maps = maps
            .iter()
            .map(|(r, t)| {
                Ok(AffineMap {
                    rates: r.iter().map(|s| Scalar::parse(s, mode)).collect::<Result<_>>()?,
                    offsets: t.iter().map(|s| Scalar::parse(s, mode)).collect::<Result<_>>()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(dim, maps)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Number of symbols `|Λ|`.
    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn maps(&self) -> &[AffineMap] {
        &self.maps
    }

    pub fn rate(&self, i: usize, j: usize) -> &Scalar {
        &self.maps[i].rates[j]
    }

    pub fn offset(&self, i: usize, j: usize) -> &Scalar {
        &self.maps[i].offsets[j]
    }

    pub fn abs_rate_f64(&self, i: usize, j: usize) -> f64 {
        self.maps[i].rates[j].to_f64().abs()
    }

    pub fn r_max(&self) -> f64 {
        self.abs_rates().fold(0.0, f64::max)
    }

    pub fn r_min(&self) -> f64 {
        self.abs_rates().fold(1.0, f64::min)
    }

    fn abs_rates(&self) -> impl Iterator<Item = f64> + '_ {
        self.maps.iter().flat_map(|m| m.rates.iter().map(|r| r.to_f64().abs()))
    }

    /// Largest `|t_{i,j}|`.
    pub fn t_max(&self) -> f64 {
        self.maps
            .iter()
            .flat_map(|m| m.offsets.iter().map(|t| t.to_f64().abs()))
            .fold(0.0, f64::max)
    }

    pub fn into_mode(self, mode: Mode) -> Result<Self> {
        let maps = self
            .maps
            .into_iter()
            .map(|m| AffineMap {
                rates: m.rates.into_iter().map(|s| s.into_mode(mode)).collect(),
                offsets: m.offsets.into_iter().map(|s| s.into_mode(mode)).collect(),
            })
            .collect();
        Self::new(self.dim, maps)
    }

    fn check_word(&self, word: &Word) -> Result<()> {
        match word.0.iter().find(|&&s| s >= self.len()) {
            Some(&symbol) => Err(Error::SymbolOutOfRange { symbol, alphabet: self.len() }),
            None => Ok(()),
        }
    }

    pub fn map_of(&self, symbol: usize) -> ComposedMap {
        let m = &self.maps[symbol];
        ComposedMap { rates: m.rates.clone(), offsets: m.offsets.clone() }
    }

    /// `φ_I = φ_{i_1} ∘ ⋯ ∘ φ_{i_n}`; the empty word gives the identity.
    pub fn compose_word(&self, word: &Word) -> Result<ComposedMap> {
        self.check_word(word)?;
        let mut acc = ComposedMap::identity(self.dim, self.mode);
        for &s in &word.0 {
            acc = acc.compose(&self.map_of(s));
        }
        Ok(acc)
    }

    /// `φ_I(0)` together with a bound on its distance to `Π(x)` for any
    /// infinite extension `x` of `I`, per coordinate.
    pub fn truncated_coding(&self, word: &Word) -> Result<Coding> {
        let map = self.compose_word(word)?;
        let r = self.r_max();
        let bound = r.powi(word.len() as i32) * self.t_max() / (1.0 - r);
        Ok(Coding { point: map.offsets, error_bound: bound })
    }

    /// The IFS induced on the coordinates `coords` (0-based, in the given order).
    pub fn induce_on_coords(&self, coords: &[usize]) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyCoordinateSet);
        }
        if let Some(&c) = coords.iter().find(|&&c| c >= self.dim) {
            return Err(Error::CoordinateOutOfRange { coord: c, dim: self.dim });
        }
        let maps = self
            .maps
            .iter()
            .map(|m| AffineMap {
                rates: coords.iter().map(|&j| m.rates[j].clone()).collect(),
                offsets: coords.iter().map(|&j| m.offsets[j].clone()).collect(),
            })
            .collect();
        Self::new(coords.len(), maps)
    }

    /// Number of words of length `n`, failing when it exceeds `budget`.
    pub fn level_size(&self, n: usize, budget: u64) -> Result<usize> {
        let requested = (self.len() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        if requested > budget as u128 {
            return Err(Error::BudgetExceeded { requested, budget });
        }
        Ok(requested as usize)
    }

    /// All `φ_u`, `u ∈ Λ^n`, in lexicographic word order.
    pub fn enumerate_level(&self, n: usize, budget: u64) -> Result<Vec<ComposedMap>> {
        self.level_size(n, budget)?;
        let singles: Vec<ComposedMap> = (0..self.len()).map(|i| self.map_of(i)).collect();
        let mut level = vec![ComposedMap::identity(self.dim, self.mode)];
        for _ in 0..n {
            level = level.iter().flat_map(|u| singles.iter().map(move |s| u.compose(s))).collect();
        }
        Ok(level)
    }

    /// Binary64 tables for Monte-Carlo work.
    pub fn to_float(&self) -> FloatIfs {
        FloatIfs {
            dim: self.dim,
            rates: self.maps.iter().flat_map(|m| m.rates.iter().map(Scalar::to_f64)).collect(),
            offsets: self.maps.iter().flat_map(|m| m.offsets.iter().map(Scalar::to_f64)).collect(),
        }
    }
}

/// Row-major `f64` copy of an IFS.
#[derive(Clone, Debug)]
pub struct FloatIfs {
    pub dim: usize,
    pub rates: Vec<f64>,
    pub offsets: Vec<f64>,
}

impl FloatIfs {
    #[inline]
    pub fn rates_of(&self, i: usize) -> &[f64] {
        &self.rates[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn offsets_of(&self, i: usize) -> &[f64] {
        &self.offsets[i * self.dim..(i + 1) * self.dim]
    }

    /// Writes `φ_{symbols}(0)` into `out`.
    pub fn code_into(&self, symbols: impl IntoIterator<Item = usize>, out: &mut [f64]) {
        let mut scale = [1.0f64; MAX_DIM];
        out.fill(0.0);
        for s in symbols {
            let r = self.rates_of(s);
            let t = self.offsets_of(s);
            for j in 0..self.dim {
                out[j] += scale[j] * t[j];
                scale[j] *= r[j];
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Coding {
    pub point: Vec<Scalar>,
    pub error_bound: f64,
}

/// A finite word over `Λ`, symbols 0-based.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<usize>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[usize] {
        &self.0
    }

    pub fn concat(&self, other: &Word) -> Word {
        Word(self.0.iter().chain(&other.0).copied().collect())
    }

    /// Decodes the `index`-th word of length `len` in lexicographic order.
    pub fn from_index(mut index: u64, len: usize, alphabet: usize) -> Word {
        let mut out = vec![0; len];
        for slot in out.iter_mut().rev() {
            *slot = (index % alphabet as u64) as usize;
            index /= alphabet as u64;
        }
        Word(out)
    }
}

impl From<&[usize]> for Word {
    fn from(s: &[usize]) -> Self {
        Word(s.to_vec())
    }
}

impl std::str::FromStr for Word {
    type Err = Error;

    /// Digits `"0120"` or dot-separated symbols `"0.11.2"`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("bad word {s:?}"));
        if s.is_empty() {
            return Ok(Word::empty());
        }
        if s.contains('.') {
            s.split('.').map(|p| p.parse().map_err(|_| bad())).collect::<Result<_>>().map(Word)
        } else {
            s.chars()
                .map(|c| c.to_digit(10).map(|d| d as usize).ok_or_else(bad))
                .collect::<Result<_>>()
                .map(Word)
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.iter().all(|&s| s < 10) {
            for s in &self.0 {
                write!(f, "{s}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
            write!(f, "{}", parts.join("."))
        }
    }
}

/// A composed map `φ_I` with signed diagonal linear part `A^I`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComposedMap {
    pub rates: Vec<Scalar>,
    pub offsets: Vec<Scalar>,
}

impl ComposedMap {
    pub fn identity(dim: usize, mode: Mode) -> Self {
        ComposedMap { rates: vec![Scalar::one(mode); dim], offsets: vec![Scalar::zero(mode); dim] }
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &ComposedMap) -> ComposedMap {
        let rates = self.rates.iter().zip(&inner.rates).map(|(a, b)| a * b).collect();
        let offsets = self
            .rates
            .iter()
            .zip(&inner.offsets)
            .zip(&self.offsets)
            .map(|((a, t), s)| &(a * t) + s)
            .collect();
        ComposedMap { rates, offsets }
    }

    pub fn apply(&self, x: &[Scalar]) -> Vec<Scalar> {
        self.rates.iter().zip(x).zip(&self.offsets).map(|((a, x), t)| &(a * x) + t).collect()
    }

    /// `λ^I_j = |A^I_j|`.
    pub fn scales(&self) -> Vec<f64> {
        self.rates.iter().map(|r| r.to_f64().abs()).collect()
    }

    /// `χ^I_j = −log₂ λ^I_j`.
    pub fn log_scales(&self) -> Vec<f64> {
        self.rates.iter().map(|r| -r.to_f64().abs().log2()).collect()
    }
}

/// `H(p) = −Σ p_i log₂ p_i` with `0 log 0 = 0`.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum::<f64>().max(0.0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelWarning {
    /// Two Lyapunov exponents coincide (user coordinates, 0-based).
    EqualExponents { coords: (usize, usize), chi: f64 },
}

impl fmt::Display for ModelWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelWarning::EqualExponents { coords: (a, b), chi } => write!(
                f,
                "χ_{} = χ_{} = {chi:.6}: distinct-exponent hypothesis violated",
                a + 1,
                b + 1
            ),
        }
    }
}

/// Relative tolerance under which two Lyapunov exponents count as equal.
pub const EXPONENT_TIE_TOLERANCE: f64 = 1e-12;

/// A diagonal IFS with a probability vector, coordinates sorted so that
/// `χ_1 ≤ ⋯ ≤ χ_d`.
#[derive(Clone, Debug)]
pub struct WeightedModel {
    ifs: DiagonalAffineIfs,
    p: Vec<Scalar>,
    p_f64: Vec<f64>,
    coord_order: Vec<usize>,
    chi: Vec<f64>,
    warnings: Vec<ModelWarning>,
}

impl WeightedModel {
    /// Validates `p`, sorts coordinates by exponent and records ties.
    /// `ifs` is given in user coordinates.
    pub fn new(ifs: DiagonalAffineIfs, p: Vec<Scalar>) -> Result<Self> {
        let mode = ifs.mode();
        if p.len() != ifs.len() {
            return Err(Error::BadWeights(format!(
                "{} weights for {} maps",
                p.len(),
                ifs.len()
            )));
        }
        if p.iter().any(|x| x.mode() != mode) {
            return Err(Error::BadWeights("weights use a different number mode than the maps".into()));
        }
        if let Some(x) = p.iter().find(|x| x.is_negative()) {
            return Err(Error::BadWeights(format!("negative weight {x}")));
        }
        let total = p.iter().fold(Scalar::zero(mode), |acc, x| &acc + x);
        let ok = match mode {
            Mode::Exact => total == Scalar::one(mode),
            Mode::Float => (total.to_f64() - 1.0).abs() <= 1e-9,
        };
        if !ok {
            return Err(Error::BadWeights(format!("weights sum to {total}, not 1")));
        }
        let p_f64: Vec<f64> = p.iter().map(Scalar::to_f64).collect();

        let user_chi = lyapunov_exponents_of(&ifs, &p_f64);
        let mut coord_order: Vec<usize> = (0..ifs.dim()).collect();
        coord_order.sort_by(|&a, &b| user_chi[a].total_cmp(&user_chi[b]));
        let chi: Vec<f64> = coord_order.iter().map(|&j| user_chi[j]).collect();

        let mut warnings = Vec::new();
        for k in 1..chi.len() {
            if (chi[k] - chi[k - 1]).abs() <= EXPONENT_TIE_TOLERANCE * chi[k].max(1.0) {
                let (a, b) = (coord_order[k - 1], coord_order[k]);
                let w = ModelWarning::EqualExponents { coords: (a.min(b), a.max(b)), chi: chi[k] };
                log::warn!("{w}");
                warnings.push(w);
            }
        }
        let ifs = ifs.induce_on_coords(&coord_order)?;
        Ok(WeightedModel { ifs, p, p_f64, coord_order, chi, warnings })
    }

    /// Model with the uniform probability vector.
    pub fn uniform(ifs: DiagonalAffineIfs) -> Result<Self> {
        let m = ifs.len() as i64;
        let p = vec![Scalar::ratio(1, m, ifs.mode()); ifs.len()];
        Self::new(ifs, p)
    }

    /// The IFS in sorted coordinates.
    pub fn ifs(&self) -> &DiagonalAffineIfs {
        &self.ifs
    }

    /// The IFS in the user's coordinate order.
    pub fn user_ifs(&self) -> DiagonalAffineIfs {
        let mut inverse = vec![0; self.dim()];
        for (k, &j) in self.coord_order.iter().enumerate() {
            inverse[j] = k;
        }
        self.ifs.induce_on_coords(&inverse).expect("valid permutation")
    }

    pub fn dim(&self) -> usize {
        self.ifs.dim()
    }

    pub fn mode(&self) -> Mode {
        self.ifs.mode()
    }

    pub fn p(&self) -> &[Scalar] {
        &self.p
    }

    pub fn p_f64(&self) -> &[f64] {
        &self.p_f64
    }

    /// `coord_order()[k]` is the user coordinate placed at sorted position `k`.
    pub fn coord_order(&self) -> &[usize] {
        &self.coord_order
    }

    pub fn warnings(&self) -> &[ModelWarning] {
        &self.warnings
    }

    pub fn has_distinct_exponents(&self) -> bool {
        self.warnings.is_empty()
    }

    /// Sorted Lyapunov exponents in bits.
    pub fn lyapunov_exponents(&self) -> &[f64] {
        &self.chi
    }

    pub fn entropy(&self) -> f64 {
        shannon_entropy(&self.p_f64)
    }

    /// Maps a point from sorted coordinates back to user coordinates.
    pub fn to_user_coords(&self, point: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; point.len()];
        for (k, &j) in self.coord_order.iter().enumerate() {
            out[j] = point[k];
        }
        out
    }

    /// Same maps, different weights.
    pub fn with_weights(&self, p: Vec<Scalar>) -> Result<Self> {
        WeightedModel::new(self.user_ifs(), p)
    }

    pub fn from_spec(spec: &ModelSpec, mode: Option<Mode>) -> Result<Self> {
        build_model(spec, mode)
    }

    pub fn from_json(text: &str, mode: Option<Mode>) -> Result<Self> {
        let spec: ModelSpec = serde_json::from_str(text)?;
        build_model(&spec, mode)
    }

    pub fn load(path: impl AsRef<Path>, mode: Option<Mode>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?, mode)
    }

    /// Serializable description in user coordinates.
    pub fn to_spec(&self) -> ModelSpec {
        let user = self.user_ifs();
        let lit = |s: &Scalar| match s {
            Scalar::Exact(_) => NumberLit::Text(s.to_string()),
            Scalar::Float(x) => NumberLit::Number(*x),
        };
        ModelSpec {
            d: user.dim(),
            maps: user
                .maps()
                .iter()
                .map(|m| MapSpec {
                    r: m.rates.iter().map(lit).collect(),
                    t: m.offsets.iter().map(lit).collect(),
                })
                .collect(),
            p: self.p.iter().map(lit).collect(),
        }
    }
}

/// `χ_j = Σ_i −p_i log₂|r_{i,j}|` in the IFS's own coordinate order.
pub fn lyapunov_exponents_of(ifs: &DiagonalAffineIfs, p: &[f64]) -> Vec<f64> {
    (0..ifs.dim())
        .map(|j| {
            p.iter()
                .enumerate()
                .filter(|(_, &w)| w > 0.0)
                .map(|(i, &w)| -w * ifs.abs_rate_f64(i, j).log2())
                .sum()
        })
        .collect()
}

/// A numeric field in a model file: JSON number or string.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NumberLit {
    Number(f64),
    Text(String),
}

impl NumberLit {
    fn is_rational_text(&self) -> bool {
        matches!(self, NumberLit::Text(s) if s.contains('/'))
    }

    fn to_scalar(&self, mode: Mode) -> Result<Scalar> {
        match self {
            NumberLit::Text(s) => Scalar::parse(s, mode),
            // Shortest round-trip repr, so 0.1 reads back as 1/10 in exact mode.
            NumberLit::Number(x) => Scalar::parse(&format!("{x:?}"), mode),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapSpec {
    pub r: Vec<NumberLit>,
    pub t: Vec<NumberLit>,
}

/// The model file schema: `{"d": 2, "maps": [{"r": [...], "t": [...]}], "p": [...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub d: usize,
    pub maps: Vec<MapSpec>,
    pub p: Vec<NumberLit>,
}

impl ModelSpec {
    /// Exact when any field is a `"num/den"` string, float otherwise.
    pub fn natural_mode(&self) -> Mode {
        let rational = self
            .maps
            .iter()
            .flat_map(|m| m.r.iter().chain(&m.t))
            .chain(&self.p)
            .any(NumberLit::is_rational_text);
        if rational {
            Mode::Exact
        } else {
            Mode::Float
        }
    }
}

/// Parses and validates a model description. `mode` overrides the mode
/// implied by the literals.
pub fn build_model(spec: &ModelSpec, mode: Option<Mode>) -> Result<WeightedModel> {
    let mode = mode.unwrap_or_else(|| spec.natural_mode());
    let maps = spec
        .maps
        .iter()
        .map(|m| {
            if m.r.len() != spec.d || m.t.len() != spec.d {
                return Err(Error::DimensionMismatch(format!(
                    "map has {} rates and {} offsets but d = {}",
                    m.r.len(),
                    m.t.len(),
                    spec.d
                )));
            }
            Ok(AffineMap {
                rates: m.r.iter().map(|x| x.to_scalar(mode)).collect::<Result<_>>()?,
                offsets: m.t.iter().map(|x| x.to_scalar(mode)).collect::<Result<_>>()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let ifs = DiagonalAffineIfs::new(spec.d, maps)?;
    let p = spec.p.iter().map(|x| x.to_scalar(mode)).collect::<Result<Vec<_>>>()?;
    WeightedModel::new(ifs, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cantor() -> DiagonalAffineIfs {
        DiagonalAffineIfs::parse(1, &[(&["1/3"], &["0"]), (&["1/3"], &["2/3"])], Mode::Exact).unwrap()
    }

    fn q(n: i64, d: i64) -> Scalar {
        Scalar::ratio(n, d, Mode::Exact)
    }

    #[test]
    fn cantor_model_is_valid() {
        let m = WeightedModel::uniform(cantor()).unwrap();
        assert!((m.lyapunov_exponents()[0] - 3f64.log2()).abs() < 1e-15);
        assert!(m.warnings().is_empty());
    }

    #[test]
    fn rate_one_is_rejected() {
        let err = DiagonalAffineIfs::parse(1, &[(&["1"], &["0"])], Mode::Exact).unwrap_err();
        assert!(matches!(err, Error::RateOutOfRange { .. }));
        let err = DiagonalAffineIfs::parse(1, &[(&["-1.0"], &["0"])], Mode::Float).unwrap_err();
        assert!(matches!(err, Error::RateOutOfRange { .. }));
        let err = DiagonalAffineIfs::parse(1, &[(&["0"], &["0"])], Mode::Float).unwrap_err();
        assert!(matches!(err, Error::RateOutOfRange { .. }));
    }

    #[test]
    fn mismatched_lengths_are_rejected() {
        let err = DiagonalAffineIfs::parse(2, &[(&["1/2"], &["0", "0"])], Mode::Exact).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
    }

    #[test]
    fn bad_weights_are_rejected() {
        let ifs = cantor();
        assert!(matches!(
            WeightedModel::new(ifs.clone(), vec![q(1, 2), q(1, 3)]),
            Err(Error::BadWeights(_))
        ));
        assert!(matches!(
            WeightedModel::new(ifs.clone(), vec![q(3, 2), q(-1, 2)]),
            Err(Error::BadWeights(_))
        ));
        assert!(matches!(WeightedModel::new(ifs, vec![q(1, 1)]), Err(Error::BadWeights(_))));
    }

    #[test]
    fn equal_exponents_warn() {
        let ifs = DiagonalAffineIfs::parse(
            2,
            &[(&["1/2", "1/2"], &["0", "0"]), (&["1/2", "1/2"], &["1", "1"])],
            Mode::Exact,
        )
        .unwrap();
        let m = WeightedModel::uniform(ifs).unwrap();
        assert_eq!(m.warnings().len(), 1);
        assert!(!m.has_distinct_exponents());
        assert!(matches!(m.warnings()[0], ModelWarning::EqualExponents { coords: (0, 1), .. }));
    }

    #[test]
    fn compose_cantor_word() {
        let ifs = cantor();
        let w: Word = "01".parse().unwrap();
        let m = ifs.compose_word(&w).unwrap();
        assert_eq!(m.offsets[0], q(2, 9));
        assert_eq!(m.rates[0], q(1, 9));
        let id = ifs.compose_word(&Word::empty()).unwrap();
        assert_eq!(id, ComposedMap::identity(1, Mode::Exact));
        assert!(matches!(
            ifs.compose_word(&Word(vec![2])),
            Err(Error::SymbolOutOfRange { symbol: 2, alphabet: 2 })
        ));
    }

    #[test]
    fn composed_linear_part_is_order_independent_on_diagonals() {
        let ifs = DiagonalAffineIfs::parse(
            2,
            &[(&["1/2", "1/3"], &["0", "0"]), (&["1/3", "1/2"], &["1", "1"])],
            Mode::Exact,
        )
        .unwrap();
        let a = ifs.compose_word(&"01".parse().unwrap()).unwrap();
        let b = ifs.compose_word(&"10".parse().unwrap()).unwrap();
        assert_eq!(a.rates, vec![q(1, 6), q(1, 6)]);
        assert_eq!(a.rates, b.rates);
        assert_ne!(a.offsets, b.offsets);
    }

    #[test]
    fn truncated_coding_of_cantor() {
        let ifs = cantor();
        let c = ifs.truncated_coding(&"1".parse().unwrap()).unwrap();
        assert_eq!(c.point, vec![q(2, 3)]);
        let o = ifs.truncated_coding(&Word::empty()).unwrap();
        assert_eq!(o.point, vec![q(0, 1)]);
        for n in 1..12usize {
            let c = ifs.truncated_coding(&Word(vec![1; n])).unwrap();
            // Σ_{k<n} (2/3) 3^{-k} = 1 − 3^{-n}
            let expected = &Scalar::one(Mode::Exact) - &q(1, 3).pow(n as u32);
            assert_eq!(c.point[0], expected);
            assert!((1.0 - c.point[0].to_f64()) <= c.error_bound + 1e-15);
        }
    }

    #[test]
    fn exponents_of_example_system() {
        let ifs = DiagonalAffineIfs::parse(
            2,
            &[(&["1/2", "1/3"], &["0", "0"]), (&["1/3", "1/2"], &["1", "1"])],
            Mode::Exact,
        )
        .unwrap();
        let m = WeightedModel::uniform(ifs).unwrap();
        let expected = (1.0 + 3f64.log2()) / 2.0;
        for &c in m.lyapunov_exponents() {
            assert!((c - expected).abs() < 1e-14);
        }
        assert!(!m.has_distinct_exponents());
    }

    #[test]
    fn exponents_are_sorted_and_permutation_retained() {
        let ifs = DiagonalAffineIfs::parse(
            2,
            &[(&["1/3", "1/2"], &["0", "0"]), (&["1/3", "1/2"], &["2/3", "1/2"])],
            Mode::Exact,
        )
        .unwrap();
        let m = WeightedModel::uniform(ifs).unwrap();
        assert_eq!(m.coord_order(), &[1, 0]);
        assert!((m.lyapunov_exponents()[0] - 1.0).abs() < 1e-15);
        assert!((m.lyapunov_exponents()[1] - 3f64.log2()).abs() < 1e-15);
        assert_eq!(m.to_user_coords(&[0.25, 0.75]), vec![0.75, 0.25]);
        assert_eq!(m.user_ifs().rate(0, 0), &q(1, 3));
    }

    #[test]
    fn entropy_values() {
        assert_eq!(shannon_entropy(&[0.5, 0.5]), 1.0);
        assert_eq!(shannon_entropy(&[1.0, 0.0]), 0.0);
        assert!((shannon_entropy(&[0.25, 0.75]) - 0.811_278_124_459_132_8).abs() < 1e-12);
    }

    #[test]
    fn induce_on_coords_reads_off_coordinates() {
        let ifs = DiagonalAffineIfs::parse(
            2,
            &[(&["1/2", "1/3"], &["0", "0"]), (&["1/3", "1/2"], &["1", "1"])],
            Mode::Exact,
        )
        .unwrap();
        assert_eq!(ifs.induce_on_coords(&[0, 1]).unwrap(), ifs);
        let first = ifs.induce_on_coords(&[0]).unwrap();
        assert_eq!(first.rate(0, 0), &q(1, 2));
        assert_eq!(first.rate(1, 0), &q(1, 3));
        assert_eq!(first.offset(1, 0), &q(1, 1));
        assert!(matches!(ifs.induce_on_coords(&[]), Err(Error::EmptyCoordinateSet)));
    }

    #[test]
    fn model_json_round_trip_and_mode_detection() {
        let text = r#"{"d": 2, "maps": [{"r": ["1/2","1/3"], "t": ["0","0"]},
                                         {"r": [0.5, "1/3"], "t": [0.5, "2/3"]}], "p": ["1/2","1/2"]}"#;
        let m = WeightedModel::from_json(text, None).unwrap();
        assert_eq!(m.mode(), Mode::Exact);
        assert_eq!(m.ifs().offset(1, 0), &q(1, 2));
        let float_text = r#"{"d": 1, "maps": [{"r": [0.3], "t": [0]}, {"r": [0.3], "t": [0.7]}], "p": [0.5, 0.5]}"#;
        assert_eq!(WeightedModel::from_json(float_text, None).unwrap().mode(), Mode::Float);
        let forced = WeightedModel::from_json(float_text, Some(Mode::Exact)).unwrap();
        assert_eq!(forced.ifs().rate(0, 0), &q(3, 10));
        let back = WeightedModel::from_spec(&m.to_spec(), None).unwrap();
        assert_eq!(back.ifs(), m.ifs());
    }

    #[test]
    fn word_parsing_and_display() {
        let w: Word = "0210".parse().unwrap();
        assert_eq!(w.symbols(), &[0, 2, 1, 0]);
        assert_eq!(w.to_string(), "0210");
        let big: Word = "12.3".parse().unwrap();
        assert_eq!(big.to_string(), "12.3");
        assert_eq!(Word::from_index(5, 3, 2), Word(vec![1, 0, 1]));
    }
}
