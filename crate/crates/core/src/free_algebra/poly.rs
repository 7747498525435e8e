use num_complex::Complex64;

use super::word::{Word, MAX_DEGREE};

/// Relative threshold below which an accumulated coefficient is treated as
/// cancellation noise and dropped.
pub const DROP_TOL: f64 = 1e-15;

/// Homogeneous element of the free algebra: a sparse combination of words
/// that all have the same length.
///
/// Terms are kept sorted by word code and never hold a zero coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct WordPoly {
    degree: usize,
    terms: Vec<(u32, Complex64)>,
}

impl WordPoly {
    pub fn zero(degree: usize) -> WordPoly {
        assert!((1..=MAX_DEGREE).contains(&degree), "degree {degree} out of range");
        WordPoly {
            degree,
            terms: Vec::new(),
        }
    }

    /// Build from `(word, coefficient)` pairs; repeated words are summed.
    ///
    /// Panics if a word has the wrong length.
    pub fn from_terms<I>(degree: usize, terms: I) -> WordPoly
    where
        I: IntoIterator<Item = (Word, Complex64)>,
    {
        let mut acc = Accumulator::new(degree);
        for (w, c) in terms {
            assert_eq!(w.len(), degree, "word {w} does not have degree {degree}");
            acc.add(w.code(), c);
        }
        acc.finish()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of stored (nonzero) terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub(crate) fn raw_terms(&self) -> &[(u32, Complex64)] {
        &self.terms
    }

    pub fn terms(&self) -> impl Iterator<Item = (Word, Complex64)> + '_ {
        let d = self.degree;
        self.terms.iter().map(move |&(code, c)| (Word::from_raw(d, code), c))
    }

    pub fn coeff(&self, word: &Word) -> Complex64 {
        if word.len() != self.degree {
            return Complex64::new(0.0, 0.0);
        }
        match self.terms.binary_search_by_key(&word.code(), |t| t.0) {
            Ok(i) => self.terms[i].1,
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// Sum of absolute values of the coefficients.
    pub fn l1_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.1.norm()).sum()
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.terms.iter().map(|t| t.1.norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, c: Complex64) -> WordPoly {
        if c == Complex64::new(0.0, 0.0) {
            return WordPoly::zero(self.degree);
        }
        WordPoly {
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .map(|&(w, v)| (w, v * c))
                .filter(|t| t.1 != Complex64::new(0.0, 0.0))
                .collect(),
        }
    }

    /// `self + c * other`, merging the sorted term lists.
    pub fn add_scaled(&self, other: &WordPoly, c: Complex64) -> WordPoly {
        assert_eq!(self.degree, other.degree);
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.terms, &other.terms);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                out.push(a[i]);
                i += 1;
            } else if i == a.len() || b[j].0 < a[i].0 {
                let v = b[j].1 * c;
                if v != Complex64::new(0.0, 0.0) {
                    out.push((b[j].0, v));
                }
                j += 1;
            } else {
                let bv = b[j].1 * c;
                let v = a[i].1 + bv;
                let mag = a[i].1.norm().max(bv.norm());
                if v.norm() > DROP_TOL * mag {
                    out.push((a[i].0, v));
                }
                i += 1;
                j += 1;
            }
        }
        WordPoly {
            degree: self.degree,
            terms: out,
        }
    }

    pub fn map_codes<F: Fn(u32) -> u32>(&self, f: F) -> WordPoly {
        let mut acc = Accumulator::new(self.degree);
        for &(w, c) in &self.terms {
            acc.add(f(w), c);
        }
        acc.finish()
    }

    /// Largest coefficientwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &WordPoly) -> f64 {
        self.add_scaled(other, Complex64::new(-1.0, 0.0)).max_abs()
    }

    /// `l1(self - other)`.
    pub fn l1_distance(&self, other: &WordPoly) -> f64 {
        self.add_scaled(other, Complex64::new(-1.0, 0.0)).l1_norm()
    }
}

/// Dense scratch space for one grade, tracking both the running sum and the
/// sum of moduli of contributions so cancellation noise can be told apart
/// from genuine small coefficients.
pub(crate) struct Accumulator {
    degree: usize,
    vals: Vec<Complex64>,
    mags: Vec<f64>,
}

impl Accumulator {
    pub(crate) fn new(degree: usize) -> Accumulator {
        assert!((1..=MAX_DEGREE).contains(&degree), "degree {degree} out of range");
        let size = 1usize << degree;
        Accumulator {
            degree,
            vals: vec![Complex64::new(0.0, 0.0); size],
            mags: vec![0.0; size],
        }
    }

    #[inline]
    pub(crate) fn add(&mut self, code: u32, c: Complex64) {
        let k = code as usize;
        self.vals[k] += c;
        self.mags[k] += c.norm();
    }

    pub(crate) fn finish(self) -> WordPoly {
        let terms = self
            .vals
            .into_iter()
            .zip(self.mags)
            .enumerate()
            .filter(|(_, (v, m))| *v != Complex64::new(0.0, 0.0) && v.norm() > DROP_TOL * m)
            .map(|(k, (v, _))| (k as u32, v))
            .collect();
        WordPoly {
            degree: self.degree,
            terms,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn cancellation_drops_terms() {
        let xy: Word = "XY".parse().unwrap();
        let p = WordPoly::from_terms(2, [(xy, c(1.0))]);
        let q = p.add_scaled(&p, c(-1.0));
        assert!(q.is_zero());
    }

    #[test]
    fn tiny_but_genuine_coefficients_survive() {
        let xy: Word = "XY".parse().unwrap();
        let p = WordPoly::from_terms(2, [(xy, c(1e-20))]);
        assert_eq!(p.len(), 1);
        assert_eq!(p.scaled(c(1e-5)).len(), 1);
    }

    #[test]
    fn repeated_words_are_summed() {
        let w: Word = "YX".parse().unwrap();
        let p = WordPoly::from_terms(2, [(w, c(1.5)), (w, c(0.5))]);
        assert_eq!(p.coeff(&w), c(2.0));
        assert_eq!(p.l1_norm(), 2.0);
    }
}
