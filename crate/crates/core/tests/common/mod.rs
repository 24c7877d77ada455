//! Helpers shared by integration test targets.

use safd::fixtures;
use safd::ifs::{DiagonalAffineIfs, Word};
use safd::scalar::{Mode, Scalar};
use safd::separation::Gap;

/// `(Δ_n, S_n)` by comparing every pair of words.
pub fn all_pairs(ifs: &DiagonalAffineIfs, n: usize) -> (Gap, Gap) {
    let count = (ifs.len() as u64).pow(n as u32);
    let maps: Vec<(Scalar, Scalar)> = (0..count)
        .map(|w| {
            let m = ifs.compose_word(&Word::from_index(w, n, ifs.len())).unwrap();
            (m.rates[0].clone(), m.offsets[0].clone())
        })
        .collect();
    let zero = Gap::Finite(Scalar::zero(Mode::Exact));
    if maps.len() < 2 {
        return (zero.clone(), zero);
    }
    let mut delta = Gap::Infinite;
    let mut s = Gap::Infinite;
    let mut distinct = std::collections::BTreeSet::new();
    for (i, a) in maps.iter().enumerate() {
        distinct.insert(format!("{} {}", a.0, a.1));
        for b in &maps[i + 1..] {
            if a.0 != b.0 {
                continue;
            }
            let d = Gap::Finite((&a.1 - &b.1).abs());
            if d.to_f64() > 0.0 {
                s = s.min(d.clone());
            }
            delta = delta.min(d);
        }
    }
    if distinct.len() <= 1 {
        s = zero;
    }
    (delta, s)
}

/// One-dimensional coordinate systems of every fixture with at most three maps.
pub fn small_systems() -> Vec<(String, DiagonalAffineIfs)> {
    let mut out = Vec::new();
    for (name, _) in fixtures::ALL {
        let ifs = fixtures::model(name).unwrap().user_ifs();
        if ifs.len() > 3 {
            continue;
        }
        for j in 0..ifs.dim() {
            out.push((format!("{name}[{}]", j + 1), ifs.induce_on_coords(&[j]).unwrap()));
        }
    }
    out
}
