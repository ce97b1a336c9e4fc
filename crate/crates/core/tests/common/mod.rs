//! Generators shared by the integration tests.
#![allow(dead_code)]

use proptest::prelude::*;

use fuzzycell::fuzzy::FuzzyInt;

fn grade() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), Just(0.2), Just(0.5), 0.001f64..1.0]
}

/// Arbitrary normal fuzzy integer, support size 1..=8 in [-20, 20].
pub fn arb_fuzzy() -> impl Strategy<Value = FuzzyInt> {
    (
        prop::collection::btree_set(-20i64..=20, 1..=8),
        prop::collection::vec(grade(), 8),
        0usize..8,
    )
        .prop_map(|(values, grades, top)| {
            let top = top % values.len();
            let pairs = values
                .into_iter()
                .zip(grades)
                .enumerate()
                .map(|(i, (v, g))| (v, if i == top { 1.0 } else { g }));
            FuzzyInt::new(pairs).unwrap()
        })
}

/// Unimodal fuzzy integer on a contiguous support.
pub fn arb_convex_at(
    lo: std::ops::RangeInclusive<i64>,
    max_len: usize,
) -> impl Strategy<Value = FuzzyInt> {
    (
        lo,
        prop::collection::vec(0.01f64..1.0, 0..max_len),
        0usize..max_len,
    )
        .prop_map(|(lo, mut grades, split)| {
            let split = split.min(grades.len());
            grades[..split].sort_by(f64::total_cmp);
            grades[split..].sort_by(|a, b| b.total_cmp(a));
            grades.insert(split, 1.0);
            FuzzyInt::new(
                grades
                    .into_iter()
                    .enumerate()
                    .map(|(i, g)| (lo + i as i64, g)),
            )
            .unwrap()
        })
}

pub fn arb_any() -> impl Strategy<Value = FuzzyInt> {
    prop_oneof![arb_fuzzy(), arb_convex_at(-20..=13, 8)]
}
