//! Models shipped with the crate, embedded at compile time.

use crate::error::{Error, Result};
use crate::ifs::WeightedModel;

/// `(name, JSON)` for every bundled model.
pub const ALL: &[(&str, &str)] = &[
    ("cantor", include_str!("../fixtures/cantor.json")),
    ("mcmullen", include_str!("../fixtures/mcmullen.json")),
    ("example_ab", include_str!("../fixtures/example_ab.json")),
    ("swapped", include_str!("../fixtures/swapped.json")),
    ("remark13", include_str!("../fixtures/remark13.json")),
    ("homogeneous3", include_str!("../fixtures/homogeneous3.json")),
    ("overlapping", include_str!("../fixtures/overlapping.json")),
];

pub fn json(name: &str) -> Option<&'static str> {
    let name = name.strip_suffix(".json").unwrap_or(name);
    ALL.iter().find(|(n, _)| *n == name).map(|(_, j)| *j)
}

/// A bundled model in its natural arithmetic mode.
pub fn model(name: &str) -> Result<WeightedModel> {
    let text = json(name).ok_or_else(|| Error::InvalidArgument(format!("no bundled model named {name:?}")))?;
    WeightedModel::from_json(text, None)
}
