//! Dense max-min kernels over grade arrays.
//!
//! A grade array `g` starting at value `lo` stores `g[i]` as the membership
//! of `lo + i`. Zero grades mark values outside the support. All functions
//! here return trimmed arrays (no zero at either end) or an empty array.

/// Removes leading and trailing zero grades, adjusting the offset.
pub(crate) fn trim(lo: i64, mut grades: Vec<f64>) -> (i64, Vec<f64>) {
    let Some(first) = grades.iter().position(|&g| g > 0.0) else {
        return (0, Vec::new());
    };
    let last = grades.iter().rposition(|&g| g > 0.0).unwrap_or(first);
    grades.truncate(last + 1);
    if first > 0 {
        grades.drain(..first);
    }
    (lo + first as i64, grades)
}

/// Unimodal with no interior holes: every alpha-cut is an integer interval.
pub(crate) fn is_convex(grades: &[f64]) -> bool {
    let mut i = 1;
    while i < grades.len() && grades[i] >= grades[i - 1] {
        i += 1;
    }
    while i < grades.len() && grades[i] <= grades[i - 1] {
        i += 1;
    }
    i >= grades.len() && grades.iter().all(|&g| g > 0.0)
}

/// Index of the first maximal grade.
pub(crate) fn peak(grades: &[f64]) -> (usize, f64) {
    let mut best = (0, 0.0);
    for (i, &g) in grades.iter().enumerate() {
        if g > best.1 {
            best = (i, g);
        }
    }
    best
}

/// Max-min convolution: `out[z] = max_{i+j=z} min(a[i], b[j])`.
pub(crate) fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    if is_convex(a) && is_convex(b) {
        convolve_convex(a, b)
    } else {
        convolve_general(a, b)
    }
}

pub(crate) fn convolve_general(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &ga) in a.iter().enumerate() {
        if ga <= 0.0 {
            continue;
        }
        let row = &mut out[i..i + b.len()];
        for (slot, &gb) in row.iter_mut().zip(b) {
            let g = if ga < gb { ga } else { gb };
            if g > *slot {
                *slot = g;
            }
        }
    }
    out
}

/// Level-sweep convolution for convex operands.
///
/// Cuts of convex operands are intervals and the cut of the result is their
/// Minkowski sum. Sweeping thresholds downward, each output cell receives the
/// first threshold whose cut covers it. Linear in the operand and output sizes.
pub(crate) fn convolve_convex(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    let (pa, ha) = peak(a);
    let (pb, hb) = peak(b);
    let (mut la, mut ra, mut lb, mut rb) = (pa, pa, pb, pb);
    let mut theta = ha.min(hb);
    // covered output interval, empty until the first pass
    let mut covered: Option<(usize, usize)> = None;
    loop {
        while la > 0 && a[la - 1] >= theta {
            la -= 1;
        }
        while ra + 1 < a.len() && a[ra + 1] >= theta {
            ra += 1;
        }
        while lb > 0 && b[lb - 1] >= theta {
            lb -= 1;
        }
        while rb + 1 < b.len() && b[rb + 1] >= theta {
            rb += 1;
        }
        let (lo, hi) = (la + lb, ra + rb);
        match covered {
            None => out[lo..=hi].iter_mut().for_each(|g| *g = theta),
            Some((cl, cr)) => {
                out[lo..cl].iter_mut().for_each(|g| *g = theta);
                out[cr + 1..=hi].iter_mut().for_each(|g| *g = theta);
            }
        }
        covered = Some((lo, hi));

        let next = [
            (la > 0).then(|| a[la - 1]),
            (ra + 1 < a.len()).then(|| a[ra + 1]),
            (lb > 0).then(|| b[lb - 1]),
            (rb + 1 < b.len()).then(|| b[rb + 1]),
        ]
        .into_iter()
        .flatten()
        .fold(None, |acc: Option<f64>, g| {
            Some(acc.map_or(g, |m| m.max(g)))
        });
        match next {
            Some(g) if g > 0.0 => theta = g,
            _ => break,
        }
    }
    out
}

/// Binary extension-principle minimum.
///
/// `mu(z) = max(min(a(z), B(>=z)), min(b(z), A(>=z)))` where `A(>=z)` is the
/// largest grade of `a` at values not below `z`. Returns `(lo, grades)`.
pub(crate) fn ext_min(alo: i64, a: &[f64], blo: i64, b: &[f64]) -> (i64, Vec<f64>) {
    if a.is_empty() || b.is_empty() {
        return (0, Vec::new());
    }
    let ahi = alo + a.len() as i64 - 1;
    let bhi = blo + b.len() as i64 - 1;
    let lo = alo.min(blo);
    let hi = ahi.min(bhi);
    let at = |lo_: i64, g: &[f64], x: i64| -> f64 {
        let i = x - lo_;
        if i < 0 || i >= g.len() as i64 {
            0.0
        } else {
            g[i as usize]
        }
    };
    // suffix maxima seeded with the parts of each operand above `hi`
    let mut a_sup = ((hi + 1).max(alo)..=ahi)
        .map(|x| at(alo, a, x))
        .fold(0.0, f64::max);
    let mut b_sup = ((hi + 1).max(blo)..=bhi)
        .map(|x| at(blo, b, x))
        .fold(0.0, f64::max);
    let mut out = vec![0.0; (hi - lo + 1) as usize];
    for z in (lo..=hi).rev() {
        let ga = at(alo, a, z);
        let gb = at(blo, b, z);
        a_sup = a_sup.max(ga);
        b_sup = b_sup.max(gb);
        out[(z - lo) as usize] = ga.min(b_sup).max(gb.min(a_sup));
    }
    trim(lo, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trim_strips_zero_ends() {
        assert_eq!(
            trim(3, vec![0.0, 0.5, 0.0, 1.0, 0.0]),
            (4, vec![0.5, 0.0, 1.0])
        );
        assert_eq!(trim(3, vec![0.0, 0.0]), (0, vec![]));
    }

    #[test]
    fn convexity() {
        assert!(is_convex(&[0.2, 1.0, 0.2]));
        assert!(is_convex(&[1.0]));
        assert!(is_convex(&[0.1, 0.3, 1.0, 1.0, 0.5]));
        assert!(!is_convex(&[1.0, 0.0, 1.0]));
        assert!(!is_convex(&[0.5, 0.2, 1.0]));
    }

    #[test]
    fn convex_and_general_agree() {
        let a = [0.1, 0.4, 1.0, 0.7, 0.3];
        let b = [0.2, 1.0, 0.6];
        assert_eq!(convolve_convex(&a, &b), convolve_general(&a, &b));
        let c = [1.0];
        assert_eq!(convolve_convex(&a, &c), a.to_vec());
    }

    #[test]
    fn convex_sweep_subnormal_operands() {
        let a = [0.3, 0.5, 0.4];
        let b = [0.2, 0.9];
        assert_eq!(convolve_convex(&a, &b), convolve_general(&a, &b));
    }
}
