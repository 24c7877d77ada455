//! Sorted-scan separation quantities against an all-pairs enumeration.

mod common;

use common::{all_pairs, small_systems};
use safd::fixtures;
use safd::scalar::{Mode, Scalar};
use safd::separation::{level_separation, Gap, OverlapStatus, DEFAULT_BUDGET};

#[test]
fn sorted_scan_matches_all_pairs() {
    let systems = small_systems();
    assert!(systems.len() >= 8);
    for (name, ifs) in systems {
        for n in 1..=6 {
            let fast = level_separation(&ifs, n, DEFAULT_BUDGET).unwrap();
            let (delta, s) = all_pairs(&ifs, n);
            assert_eq!(fast.delta, delta, "{name} delta at n = {n}");
            assert_eq!(fast.s, s, "{name} S at n = {n}");
        }
    }
}

#[test]
fn cantor_gaps_are_two_thirds_powers() {
    let ifs = fixtures::model("cantor").unwrap().user_ifs();
    for n in 1..=8 {
        let l = level_separation(&ifs, n, DEFAULT_BUDGET).unwrap();
        let expected = Scalar::ratio(2, 3i64.pow(n as u32), Mode::Exact);
        assert_eq!(l.delta, Gap::Finite(expected), "n = {n}");
        assert_eq!(l.overlap, OverlapStatus::None);
    }
}

#[test]
fn overlapping_fixture_witness() {
    let ifs = fixtures::model("overlapping").unwrap().user_ifs();
    let l = level_separation(&ifs, 2, DEFAULT_BUDGET).unwrap();
    assert!(l.delta.is_zero());
    assert_eq!(l.s, Gap::Finite(Scalar::ratio(1, 4, Mode::Exact)));
    assert_eq!(l.overlap, OverlapStatus::Exact { witness: ("02".into(), "10".into()) });
}
