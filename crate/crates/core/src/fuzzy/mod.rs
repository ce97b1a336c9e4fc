//! Discrete fuzzy integers and their extension-principle arithmetic.
//!
//! Every model quantity (position, velocity, gap, vehicle length, queue
//! length) is a fuzzy set over the integers written `{g1/v1; g2/v2; ...}`.
//! Operations lift crisp integer functions with the sup-min extension
//! principle; on finite supports the supremum is a maximum over support
//! pairs and the t-norm is `min`.

use std::fmt;
use std::ops::{Add, Sub};

use thiserror::Error;

mod kernel;
pub mod oracle;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FuzzyError {
    #[error("fuzzy number has an empty support")]
    EmptySupport,
    #[error("fuzzy number is not normal: largest grade is {0}")]
    NotNormal(f64),
    #[error("grade {grade} of value {value} is outside (0, 1]")]
    BadGrade { value: i64, grade: f64 },
    #[error("value {0} is listed more than once")]
    DuplicateValue(i64),
    #[error("dilation exponent {0} is outside (0, 1]")]
    BadExponent(f64),
}

/// A finite discrete fuzzy set over the integers, not necessarily normal.
///
/// Grades are stored densely from the smallest support value; zero grades
/// inside the range are holes and are never reported as entries.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FuzzySet {
    lo: i64,
    grades: Vec<f64>,
}

impl FuzzySet {
    /// Builds a set from `(value, grade)` pairs. Grades must lie in (0, 1].
    pub fn new(pairs: impl IntoIterator<Item = (i64, f64)>) -> Result<Self, FuzzyError> {
        let mut pairs: Vec<(i64, f64)> = pairs.into_iter().collect();
        pairs.sort_by_key(|&(v, _)| v);
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(FuzzyError::DuplicateValue(w[0].0));
            }
        }
        for &(value, grade) in &pairs {
            if !(grade > 0.0 && grade <= 1.0) {
                return Err(FuzzyError::BadGrade { value, grade });
            }
        }
        let Some(&(lo, _)) = pairs.first() else {
            return Ok(Self::empty());
        };
        let hi = pairs[pairs.len() - 1].0;
        let mut grades = vec![0.0; (hi - lo + 1) as usize];
        for (v, g) in pairs {
            grades[(v - lo) as usize] = g;
        }
        Ok(Self { lo, grades })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    fn from_dense(lo: i64, grades: Vec<f64>) -> Self {
        let (lo, grades) = kernel::trim(lo, grades);
        Self { lo, grades }
    }

    pub fn is_empty(&self) -> bool {
        self.grades.is_empty()
    }

    /// Number of support values.
    pub fn len(&self) -> usize {
        self.grades.iter().filter(|&&g| g > 0.0).count()
    }

    /// Support entries in increasing value order.
    pub fn entries(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.grades
            .iter()
            .enumerate()
            .filter(|(_, &g)| g > 0.0)
            .map(move |(i, &g)| (self.lo + i as i64, g))
    }

    pub fn grade(&self, x: i64) -> f64 {
        let i = x - self.lo;
        if i < 0 || i >= self.grades.len() as i64 {
            0.0
        } else {
            self.grades[i as usize]
        }
    }

    pub fn min_value(&self) -> Option<i64> {
        (!self.is_empty()).then_some(self.lo)
    }

    pub fn max_value(&self) -> Option<i64> {
        (!self.is_empty()).then(|| self.lo + self.grades.len() as i64 - 1)
    }

    /// Largest grade; 0 for the empty set.
    pub fn height(&self) -> f64 {
        kernel::peak(&self.grades).1
    }

    /// Value of maximal grade, smallest among ties.
    pub fn argmax(&self) -> Option<i64> {
        if self.is_empty() {
            return None;
        }
        Some(self.lo + kernel::peak(&self.grades).0 as i64)
    }

    /// `(min, max)` of the values whose grade reaches `theta`.
    pub fn alpha_cut(&self, theta: f64) -> Option<(i64, i64)> {
        let first = self.grades.iter().position(|&g| g > 0.0 && g >= theta)?;
        let last = self.grades.iter().rposition(|&g| g > 0.0 && g >= theta)?;
        Some((self.lo + first as i64, self.lo + last as i64))
    }

    pub fn is_convex(&self) -> bool {
        kernel::is_convex(&self.grades)
    }

    pub fn ext_add(&self, other: &Self) -> Self {
        if self.is_empty() || other.is_empty() {
            return Self::empty();
        }
        Self::from_dense(
            self.lo + other.lo,
            kernel::convolve(&self.grades, &other.grades),
        )
    }

    pub fn ext_sub(&self, other: &Self) -> Self {
        self.ext_add(&other.negated())
    }

    pub fn ext_min(&self, other: &Self) -> Self {
        let (lo, grades) = kernel::ext_min(self.lo, &self.grades, other.lo, &other.grades);
        Self { lo, grades }
    }

    /// The image under `x -> -x`.
    pub fn negated(&self) -> Self {
        match self.max_value() {
            None => Self::empty(),
            Some(hi) => Self {
                lo: -hi,
                grades: self.grades.iter().rev().copied().collect(),
            },
        }
    }

    pub fn shift(&self, k: i64) -> Self {
        Self {
            lo: self.lo + k,
            grades: self.grades.clone(),
        }
    }

    /// Keeps only the values `>= bound`.
    pub fn restrict_from(&self, bound: i64) -> Self {
        if bound <= self.lo {
            return self.clone();
        }
        let skip = (bound - self.lo) as usize;
        if skip >= self.grades.len() {
            return Self::empty();
        }
        Self::from_dense(bound, self.grades[skip..].to_vec())
    }

    /// Largest grade among values `<= bound`.
    pub fn height_upto(&self, bound: i64) -> f64 {
        if bound < self.lo {
            return 0.0;
        }
        let end = ((bound - self.lo + 1) as usize).min(self.grades.len());
        self.grades[..end].iter().copied().fold(0.0, f64::max)
    }

    /// Maps every value below `bound` onto `bound`, merging grades by max.
    pub fn clamp_below(&self, bound: i64) -> Self {
        if self.is_empty() || bound <= self.lo {
            return self.clone();
        }
        let merged = self.height_upto(bound);
        let mut out = self.restrict_from(bound);
        if merged > 0.0 {
            out.raise_grade(bound, merged);
        }
        out
    }

    /// Sets `grade(x) = max(grade(x), g)`, extending the range if needed.
    pub fn raise_grade(&mut self, x: i64, g: f64) {
        if g <= 0.0 {
            return;
        }
        if self.is_empty() {
            *self = Self {
                lo: x,
                grades: vec![g],
            };
            return;
        }
        if x < self.lo {
            let pad = (self.lo - x) as usize;
            self.grades.splice(0..0, std::iter::repeat_n(0.0, pad));
            self.lo = x;
        }
        let i = (x - self.lo) as usize;
        if i >= self.grades.len() {
            self.grades.resize(i + 1, 0.0);
        }
        if g > self.grades[i] {
            self.grades[i] = g;
        }
    }

    /// Reduces every value modulo `modulus`, merging grades by max.
    pub fn wrap(&self, modulus: i64) -> Self {
        let mut grades = vec![0.0; modulus as usize];
        for (v, g) in self.entries() {
            let slot = &mut grades[v.rem_euclid(modulus) as usize];
            if g > *slot {
                *slot = g;
            }
        }
        Self::from_dense(0, grades)
    }

    /// Same support and grades within `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let (a, b): (Vec<_>, Vec<_>) = (self.entries().collect(), other.entries().collect());
        a.len() == b.len()
            && a.iter()
                .zip(&b)
                .all(|(x, y)| x.0 == y.0 && (x.1 - y.1).abs() <= tol)
    }
}

impl fmt::Display for FuzzySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, (v, g)) in self.entries().enumerate() {
            if k > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{}/{}", format_grade(g), v)?;
        }
        f.write_str("}")
    }
}

/// Up to four decimals with trailing zeros dropped: `1`, `0.2`, `0.2275`.
pub fn format_grade(g: f64) -> String {
    let s = format!("{g:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

/// A normal discrete fuzzy integer: non-empty finite support, grades in
/// (0, 1], and at least one grade exactly 1.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyInt(FuzzySet);

impl FuzzyInt {
    pub fn new(pairs: impl IntoIterator<Item = (i64, f64)>) -> Result<Self, FuzzyError> {
        Self::try_from(FuzzySet::new(pairs)?)
    }

    /// The crisp value `{1/x}`.
    pub fn crisp(x: i64) -> Self {
        Self(FuzzySet {
            lo: x,
            grades: vec![1.0],
        })
    }

    pub fn as_set(&self) -> &FuzzySet {
        &self.0
    }

    pub fn into_set(self) -> FuzzySet {
        self.0
    }

    pub fn entries(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.0.entries()
    }

    pub fn grade(&self, x: i64) -> f64 {
        self.0.grade(x)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min_value(&self) -> i64 {
        self.0.lo
    }

    pub fn max_value(&self) -> i64 {
        self.0.lo + self.0.grades.len() as i64 - 1
    }

    /// Distance between the extreme support values.
    pub fn width(&self) -> i64 {
        self.max_value() - self.min_value()
    }

    /// `Some(x)` when the number is the singleton `{1/x}`.
    pub fn as_crisp(&self) -> Option<i64> {
        (self.0.grades.len() == 1).then_some(self.0.lo)
    }

    pub fn ext_add(&self, other: &Self) -> Self {
        Self(self.0.ext_add(&other.0))
    }

    pub fn ext_sub(&self, other: &Self) -> Self {
        Self(self.0.ext_sub(&other.0))
    }

    pub fn ext_min(&self, other: &Self) -> Self {
        Self(self.0.ext_min(&other.0))
    }

    /// Raises every grade to the power `e`; grade 1 is a fixed point, so
    /// normality and support are preserved.
    pub fn dilate(&self, e: f64) -> Result<Self, FuzzyError> {
        if !(e > 0.0 && e <= 1.0) {
            return Err(FuzzyError::BadExponent(e));
        }
        if e == 1.0 {
            return Ok(self.clone());
        }
        let mut last = (1.0, 1.0);
        let grades = self
            .0
            .grades
            .iter()
            .map(|&g| {
                if g <= 0.0 || g == 1.0 {
                    g
                } else if g == last.0 {
                    last.1
                } else {
                    last = (g, g.powf(e));
                    last.1
                }
            })
            .collect();
        Ok(Self(FuzzySet {
            lo: self.0.lo,
            grades,
        }))
    }

    /// Defuzzified value: the value of maximal grade, smallest among ties.
    pub fn argmax(&self) -> i64 {
        self.0.lo + kernel::peak(&self.0.grades).0 as i64
    }

    /// `(min, max)` of `{x : mu(x) >= theta}`; `theta` above 1 is treated as 1.
    pub fn alpha_cut(&self, theta: f64) -> (i64, i64) {
        self.0
            .alpha_cut(theta.min(1.0))
            .expect("a normal fuzzy number has a non-empty cut at any level up to 1")
    }

    /// Drops entries whose grade is below `epsilon`. Grade-1 entries always
    /// survive.
    pub fn truncate(&self, epsilon: f64) -> Self {
        if epsilon <= 0.0 {
            return self.clone();
        }
        let grades = self
            .0
            .grades
            .iter()
            .map(|&g| if g < epsilon && g < 1.0 { 0.0 } else { g })
            .collect();
        Self(FuzzySet::from_dense(self.0.lo, grades))
    }

    pub fn clamp_below(&self, bound: i64) -> Self {
        Self(self.0.clamp_below(bound))
    }

    pub fn shift(&self, k: i64) -> Self {
        Self(self.0.shift(k))
    }

    pub fn is_convex(&self) -> bool {
        self.0.is_convex()
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.0.approx_eq(&other.0, tol)
    }
}

/// n-ary extension-principle minimum, folded pairwise. `None` for no operands.
pub fn ext_min(operands: &[&FuzzyInt]) -> Option<FuzzyInt> {
    let (first, rest) = operands.split_first()?;
    Some(rest.iter().fold((*first).clone(), |acc, x| acc.ext_min(x)))
}

impl TryFrom<FuzzySet> for FuzzyInt {
    type Error = FuzzyError;

    fn try_from(set: FuzzySet) -> Result<Self, Self::Error> {
        if set.is_empty() {
            return Err(FuzzyError::EmptySupport);
        }
        let h = set.height();
        if h < 1.0 {
            return Err(FuzzyError::NotNormal(h));
        }
        Ok(Self(set))
    }
}

impl fmt::Display for FuzzyInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Add for &FuzzyInt {
    type Output = FuzzyInt;

    fn add(self, rhs: Self) -> FuzzyInt {
        self.ext_add(rhs)
    }
}

impl Sub for &FuzzyInt {
    type Output = FuzzyInt;

    fn sub(self, rhs: Self) -> FuzzyInt {
        self.ext_sub(rhs)
    }
}
