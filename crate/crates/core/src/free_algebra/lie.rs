use std::ops::Deref;

use num_complex::Complex64;
use serde::Serialize;

use super::poly::{Accumulator, WordPoly};
use super::series::GradedSeries;
use crate::error::{Error, Result};

/// Expand the right-nested bracket `[v1,[v2,...[v_{n-1},v_n]...]]` of the
/// letters of a packed word, adding `c` times the result into `acc`.
///
/// For `S` a subset of positions `1..n-1`, the word is the letters outside
/// `S` in increasing order, then `v_n`, then the letters in `S` in
/// decreasing order, with sign `(-1)^|S|`.
fn add_right_nested(acc: &mut Accumulator, n: usize, code: u32, c: Complex64) {
    let letter = |i: usize| (code >> (n - 1 - i)) & 1;
    let last = letter(n - 1);
    for subset in 0u32..(1u32 << (n - 1)) {
        let mut head = 0u32;
        let mut head_len = 0usize;
        let mut tail = 0u32;
        for i in 0..n - 1 {
            if subset >> i & 1 == 1 {
                // letters in S appear in decreasing order after v_n
                tail |= letter(i) << i_rank(subset, i);
            } else {
                head = (head << 1) | letter(i);
                head_len += 1;
            }
        }
        let tail_len = n - 1 - head_len;
        let word = (((head << 1) | last) << tail_len) | tail;
        let sign = if tail_len.is_multiple_of(2) { c } else { -c };
        acc.add(word, sign);
    }
}

/// Position (from the right, 0-based) of the letter at index `i` within the
/// decreasing tail built from `subset`: smaller indices sit further right.
#[inline]
fn i_rank(subset: u32, i: usize) -> u32 {
    (subset & ((1u32 << i) - 1)).count_ones()
}

/// Expand the left-nested bracket `[[...[v1,v2],v3]...],v_n]`.
///
/// For `S` a subset of positions `2..n`, the word is the letters in `S` in
/// decreasing order, then `v1`, then the rest in increasing order, with
/// sign `(-1)^|S|`.
fn add_left_nested(acc: &mut Accumulator, n: usize, code: u32, c: Complex64) {
    let letter = |i: usize| (code >> (n - 1 - i)) & 1;
    let first = letter(0);
    for subset in 0u32..(1u32 << (n - 1)) {
        // bit k of subset refers to position k + 1
        let mut head = 0u32;
        let mut head_len = 0usize;
        let mut tail = 0u32;
        let mut tail_len = 0usize;
        for i in (1..n).rev() {
            if subset >> (i - 1) & 1 == 1 {
                head = (head << 1) | letter(i);
                head_len += 1;
            }
        }
        for i in 1..n {
            if subset >> (i - 1) & 1 == 0 {
                tail = (tail << 1) | letter(i);
                tail_len += 1;
            }
        }
        let word = (((head << 1) | first) << tail_len) | tail;
        let sign = if head_len.is_multiple_of(2) { c } else { -c };
        acc.add(word, sign);
    }
}

/// Right-nested bracketing of a homogeneous polynomial, without the `1/n`.
pub fn right_nested(p: &WordPoly) -> WordPoly {
    let n = p.degree();
    let mut acc = Accumulator::new(n);
    for &(w, c) in p.raw_terms() {
        add_right_nested(&mut acc, n, w, c);
    }
    acc.finish()
}

/// Left-nested bracketing of a homogeneous polynomial, without the `1/n`.
pub fn left_nested(p: &WordPoly) -> WordPoly {
    let n = p.degree();
    let mut acc = Accumulator::new(n);
    for &(w, c) in p.raw_terms() {
        add_left_nested(&mut acc, n, w, c);
    }
    acc.finish()
}

/// The projector `nu_n = (1/n) * right_nested` on a homogeneous component.
pub fn dsw_project_poly(p: &WordPoly) -> WordPoly {
    let n = p.degree();
    right_nested(p).scaled(Complex64::new(1.0 / n as f64, 0.0))
}

/// Apply `nu_n` on every grade.
pub fn dsw_project(p: &GradedSeries) -> GradedSeries {
    let mut out = GradedSeries::zero(p.truncation());
    for g in p.grades() {
        if !g.is_zero() {
            out.set_grade(dsw_project_poly(g));
        }
    }
    out
}

/// Per-grade distance from the projector's fixed space.
#[derive(Clone, Debug, Serialize)]
pub struct LieReport {
    pub is_lie: bool,
    pub tol: f64,
    /// `l1(nu_n(p_n) - p_n)` for `n = 1..=N`.
    pub deviations: Vec<f64>,
}

impl LieReport {
    pub fn max_deviation(&self) -> f64 {
        self.deviations.iter().cloned().fold(0.0, f64::max)
    }

    /// First grade whose deviation exceeds the tolerance.
    pub fn first_failure(&self) -> Option<(usize, f64)> {
        self.deviations
            .iter()
            .enumerate()
            .find(|(_, d)| **d > self.tol)
            .map(|(k, d)| (k + 1, *d))
    }
}

pub fn is_lie(p: &GradedSeries, tol: f64) -> LieReport {
    assert!(tol > 0.0, "tolerance must be positive");
    let deviations: Vec<f64> = p
        .grades()
        .map(|g| {
            if g.degree() == 1 || g.is_zero() {
                0.0
            } else {
                dsw_project_poly(g).l1_distance(g)
            }
        })
        .collect();
    LieReport {
        is_lie: deviations.iter().all(|d| *d <= tol),
        tol,
        deviations,
    }
}

/// A graded series known to be a Lie element.
#[derive(Clone, Debug, PartialEq)]
pub struct LieSeries(GradedSeries);

impl LieSeries {
    /// Check membership with `tol` and wrap.
    pub fn new(p: GradedSeries, tol: f64) -> Result<LieSeries> {
        let report = is_lie(&p, tol);
        match report.first_failure() {
            None => Ok(LieSeries(p)),
            Some((grade, deviation)) => Err(Error::NotLie { grade, deviation }),
        }
    }

    /// Wrap the projection of `p`, which is Lie by construction.
    pub fn project(p: &GradedSeries) -> LieSeries {
        LieSeries(dsw_project(p))
    }

    pub fn zero(truncation: usize) -> LieSeries {
        LieSeries(GradedSeries::zero(truncation))
    }

    pub fn x(truncation: usize) -> LieSeries {
        LieSeries(GradedSeries::x(truncation))
    }

    pub fn y(truncation: usize) -> LieSeries {
        LieSeries(GradedSeries::y(truncation))
    }

    pub fn bracket(&self, other: &LieSeries) -> LieSeries {
        LieSeries(self.0.bracket(&other.0))
    }

    pub fn add(&self, other: &LieSeries) -> LieSeries {
        LieSeries(self.0.add(&other.0))
    }

    pub fn sub(&self, other: &LieSeries) -> LieSeries {
        LieSeries(self.0.sub(&other.0))
    }

    pub fn scaled_re(&self, c: f64) -> LieSeries {
        LieSeries(self.0.scaled_re(c))
    }

    pub fn scale_re(&self, t: f64) -> LieSeries {
        LieSeries(self.0.scale_re(t))
    }

    pub fn swap_letters(&self) -> LieSeries {
        LieSeries(self.0.swap_letters())
    }

    pub fn as_series(&self) -> &GradedSeries {
        &self.0
    }

    pub fn into_series(self) -> GradedSeries {
        self.0
    }
}

impl Deref for LieSeries {
    type Target = GradedSeries;

    fn deref(&self) -> &GradedSeries {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(n: usize, text: &str) -> GradedSeries {
        GradedSeries::parse(n, text).unwrap()
    }

    #[test]
    fn projector_on_small_words() {
        assert_eq!(dsw_project(&s(3, "X")), s(3, "X"));
        assert_eq!(dsw_project(&s(3, "XY")), s(3, "0.5XY - 0.5YX"));
    }

    #[test]
    fn right_nested_of_three_letters() {
        // [X,[Y,X]] = XYX - XXY - YXX + XYX
        let p = s(3, "XYX");
        let rn = right_nested(&p.grade(3));
        assert_eq!(GradedSeries::homogeneous(rn, 3), s(3, "2XYX - XXY - YXX"));
    }

    #[test]
    fn left_nested_of_three_letters() {
        // [[X,Y],X] = XYX - YXX - XXY + XYX
        let p = s(3, "XYX");
        let ln = left_nested(&p.grade(3));
        assert_eq!(GradedSeries::homogeneous(ln, 3), s(3, "2XYX - YXX - XXY"));
    }

    #[test]
    fn nested_expansions_match_brackets() {
        let x = GradedSeries::x(5);
        let y = GradedSeries::y(5);
        let word = s(5, "XYYXY");
        let rn = x.bracket(&y.bracket(&y.bracket(&x.bracket(&y))));
        assert_eq!(GradedSeries::homogeneous(right_nested(&word.grade(5)), 5), rn);
        let ln = x.bracket(&y).bracket(&y).bracket(&x).bracket(&y);
        assert_eq!(GradedSeries::homogeneous(left_nested(&word.grade(5)), 5), ln);
    }

    #[test]
    fn lie_detection() {
        assert!(is_lie(&s(3, "XY - YX"), 1e-12).is_lie);
        let r = is_lie(&s(3, "XY"), 1e-12);
        assert!(!r.is_lie);
        assert!((r.deviations[1] - 1.0).abs() < 1e-15);
        assert!(is_lie(&GradedSeries::zero(3), 1e-12).is_lie);
        assert!(LieSeries::new(s(3, "XY"), 1e-12).is_err());
    }
}
