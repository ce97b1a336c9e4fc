//! Brute-force extension principle used as a test oracle.
//!
//! Enumerates every combination of support values with no shortcuts and
//! builds the result through the validating constructor. Shares no code
//! with the production kernels.

use std::collections::BTreeMap;

use super::FuzzyInt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtOp {
    Add,
    Sub,
    Min,
}

impl ExtOp {
    fn apply(self, x: i64, y: i64) -> i64 {
        match self {
            ExtOp::Add => x + y,
            ExtOp::Sub => x - y,
            ExtOp::Min => x.min(y),
        }
    }
}

pub fn ext_op(op: ExtOp, a: &FuzzyInt, b: &FuzzyInt) -> FuzzyInt {
    let mut out: BTreeMap<i64, f64> = BTreeMap::new();
    for (x, ga) in a.entries() {
        for (y, gb) in b.entries() {
            let g = ga.min(gb);
            let slot = out.entry(op.apply(x, y)).or_insert(0.0);
            if g > *slot {
                *slot = g;
            }
        }
    }
    FuzzyInt::new(out).expect("extension principle preserves normality")
}

/// n-ary minimum by enumerating the full Cartesian product of supports.
pub fn ext_min_n(operands: &[&FuzzyInt]) -> FuzzyInt {
    fn walk(rest: &[Vec<(i64, f64)>], current: (i64, f64), out: &mut BTreeMap<i64, f64>) {
        match rest.split_first() {
            None => {
                let slot = out.entry(current.0).or_insert(0.0);
                if current.1 > *slot {
                    *slot = current.1;
                }
            }
            Some((head, tail)) => {
                for &(x, g) in head {
                    walk(tail, (current.0.min(x), current.1.min(g)), out);
                }
            }
        }
    }
    let supports: Vec<Vec<(i64, f64)>> = operands.iter().map(|a| a.entries().collect()).collect();
    let mut out = BTreeMap::new();
    walk(&supports, (i64::MAX, 1.0), &mut out);
    FuzzyInt::new(out).expect("extension principle preserves normality")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fz(pairs: &[(i64, f64)]) -> FuzzyInt {
        FuzzyInt::new(pairs.iter().copied()).unwrap()
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(
            ext_op(ExtOp::Add, &fz(&[(2, 1.0)]), &fz(&[(3, 1.0)])),
            fz(&[(5, 1.0)])
        );
        assert_eq!(
            ext_op(
                ExtOp::Min,
                &fz(&[(1, 0.5), (2, 1.0)]),
                &fz(&[(0, 1.0), (3, 0.5)])
            ),
            fz(&[(0, 1.0), (1, 0.5), (2, 0.5)])
        );
        assert_eq!(
            ext_op(ExtOp::Sub, &fz(&[(5, 1.0)]), &fz(&[(1, 1.0)])),
            fz(&[(4, 1.0)])
        );
    }

    #[test]
    fn n_ary_matches_binary_for_two() {
        let a = fz(&[(1, 0.5), (2, 1.0)]);
        let b = fz(&[(0, 1.0), (3, 0.5)]);
        assert_eq!(ext_min_n(&[&a, &b]), ext_op(ExtOp::Min, &a, &b));
    }
}
