use num_complex::Complex64;

use super::poly::{Accumulator, WordPoly};
use super::word::{mask, Letter, Word, MAX_DEGREE};

/// Truncated element of the free non-unital algebra on `X`, `Y`.
///
/// Holds one homogeneous component per degree `1..=N`. Every product is cut
/// off above `N`.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedSeries {
    truncation: usize,
    grades: Vec<WordPoly>,
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

impl GradedSeries {
    pub fn zero(truncation: usize) -> GradedSeries {
        assert!(
            (1..=MAX_DEGREE).contains(&truncation),
            "truncation {truncation} out of range 1..={MAX_DEGREE}"
        );
        GradedSeries {
            truncation,
            grades: (1..=truncation).map(WordPoly::zero).collect(),
        }
    }

    pub fn generator(letter: Letter, truncation: usize) -> GradedSeries {
        GradedSeries::from_terms(truncation, [(Word::letter(letter), ONE)])
    }

    pub fn x(truncation: usize) -> GradedSeries {
        GradedSeries::generator(Letter::X, truncation)
    }

    pub fn y(truncation: usize) -> GradedSeries {
        GradedSeries::generator(Letter::Y, truncation)
    }

    /// Build from arbitrary `(word, coefficient)` pairs; words longer than
    /// the truncation are discarded.
    pub fn from_terms<I>(truncation: usize, terms: I) -> GradedSeries
    where
        I: IntoIterator<Item = (Word, Complex64)>,
    {
        let mut buckets: Vec<Vec<(Word, Complex64)>> = vec![Vec::new(); truncation];
        for (w, c) in terms {
            if w.len() <= truncation {
                buckets[w.len() - 1].push((w, c));
            }
        }
        let mut out = GradedSeries::zero(truncation);
        for (k, b) in buckets.into_iter().enumerate() {
            out.grades[k] = WordPoly::from_terms(k + 1, b);
        }
        out
    }

    /// Parse a sum like `"XY - YX + 0.5 XXY"`. Intended for tests and examples.
    pub fn parse(truncation: usize, text: &str) -> crate::Result<GradedSeries> {
        let cleaned = text.replace('-', "+-");
        let mut terms = Vec::new();
        for chunk in cleaned.split('+') {
            let chunk = chunk.trim();
            if chunk.is_empty() {
                continue;
            }
            let (sign, rest) = match chunk.strip_prefix('-') {
                Some(r) => (-1.0, r.trim()),
                None => (1.0, chunk),
            };
            let split = rest
                .find(['X', 'Y'])
                .ok_or_else(|| crate::Error::Format(format!("term {chunk:?} has no word")))?;
            let (num, word) = rest.split_at(split);
            let num = num.trim().trim_end_matches('*').trim();
            let coef = if num.is_empty() {
                1.0
            } else {
                num.parse::<f64>()
                    .map_err(|_| crate::Error::Format(format!("bad coefficient {num:?}")))?
            };
            terms.push((word.trim().parse::<Word>()?, Complex64::new(sign * coef, 0.0)));
        }
        Ok(GradedSeries::from_terms(truncation, terms))
    }

    /// Series with a single nonzero component.
    pub fn homogeneous(poly: WordPoly, truncation: usize) -> GradedSeries {
        let mut out = GradedSeries::zero(truncation);
        let d = poly.degree();
        if d <= truncation {
            out.grades[d - 1] = poly;
        }
        out
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// Homogeneous component of degree `n`; zero beyond the truncation.
    pub fn grade(&self, n: usize) -> WordPoly {
        assert!(n >= 1, "the algebra has no degree-0 part");
        if n <= self.truncation {
            self.grades[n - 1].clone()
        } else {
            WordPoly::zero(n.min(MAX_DEGREE))
        }
    }

    pub fn grades(&self) -> impl Iterator<Item = &WordPoly> {
        self.grades.iter()
    }

    pub fn set_grade(&mut self, poly: WordPoly) {
        let d = poly.degree();
        assert!(d <= self.truncation, "degree {d} exceeds truncation");
        self.grades[d - 1] = poly;
    }

    pub fn terms(&self) -> impl Iterator<Item = (Word, Complex64)> + '_ {
        self.grades.iter().flat_map(|g| g.terms())
    }

    pub fn coeff(&self, word: &Word) -> Complex64 {
        if word.len() > self.truncation {
            return ZERO;
        }
        self.grades[word.len() - 1].coeff(word)
    }

    pub fn is_zero(&self) -> bool {
        self.grades.iter().all(|g| g.is_zero())
    }

    /// Lowest degree with a nonzero component, if any.
    pub fn min_degree(&self) -> Option<usize> {
        self.grades.iter().position(|g| !g.is_zero()).map(|k| k + 1)
    }

    pub fn l1_norm(&self) -> f64 {
        self.grades.iter().map(|g| g.l1_norm()).sum()
    }

    pub fn grade_norm(&self, n: usize) -> f64 {
        if n == 0 || n > self.truncation {
            0.0
        } else {
            self.grades[n - 1].l1_norm()
        }
    }

    /// Keep only degrees `<= n`.
    pub fn truncate(&self, n: usize) -> GradedSeries {
        let n = n.clamp(1, MAX_DEGREE);
        let mut out = GradedSeries::zero(n);
        for k in 1..=n.min(self.truncation) {
            out.grades[k - 1] = self.grades[k - 1].clone();
        }
        out
    }

    pub fn add_scaled(&self, other: &GradedSeries, c: Complex64) -> GradedSeries {
        let n = self.truncation.min(other.truncation);
        GradedSeries {
            truncation: n,
            grades: (0..n).map(|k| self.grades[k].add_scaled(&other.grades[k], c)).collect(),
        }
    }

    pub fn add(&self, other: &GradedSeries) -> GradedSeries {
        self.add_scaled(other, ONE)
    }

    pub fn sub(&self, other: &GradedSeries) -> GradedSeries {
        self.add_scaled(other, -ONE)
    }

    pub fn neg(&self) -> GradedSeries {
        self.scaled(-ONE)
    }

    pub fn scaled(&self, c: Complex64) -> GradedSeries {
        GradedSeries {
            truncation: self.truncation,
            grades: self.grades.iter().map(|g| g.scaled(c)).collect(),
        }
    }

    pub fn scaled_re(&self, c: f64) -> GradedSeries {
        self.scaled(Complex64::new(c, 0.0))
    }

    /// Concatenation product truncated at the smaller truncation.
    pub fn mul(&self, other: &GradedSeries) -> GradedSeries {
        self.mul_trunc(other, self.truncation.min(other.truncation))
    }

    /// Concatenation product keeping degrees `<= n`.
    pub fn mul_trunc(&self, other: &GradedSeries, n: usize) -> GradedSeries {
        let n = n.min(self.truncation + other.truncation).clamp(1, MAX_DEGREE);
        let grades: Vec<WordPoly> = (1..=n).map(|d| product_grade(self, other, d)).collect();
        GradedSeries { truncation: n, grades }
    }

    /// `pq - qp`, truncated at the smaller truncation.
    pub fn bracket(&self, other: &GradedSeries) -> GradedSeries {
        let n = self.truncation.min(other.truncation);
        let grades: Vec<WordPoly> = (1..=n)
            .map(|d| {
                let mut acc = Accumulator::new(d);
                accumulate_product(&mut acc, self, other, d, ONE);
                accumulate_product(&mut acc, other, self, d, -ONE);
                acc.finish()
            })
            .collect();
        GradedSeries { truncation: n, grades }
    }

    /// The scaling automorphism: degree `n` is multiplied by `t^n`.
    pub fn scale(&self, t: Complex64) -> GradedSeries {
        let mut pow = ONE;
        GradedSeries {
            truncation: self.truncation,
            grades: self
                .grades
                .iter()
                .map(|g| {
                    pow *= t;
                    g.scaled(pow)
                })
                .collect(),
        }
    }

    pub fn scale_re(&self, t: f64) -> GradedSeries {
        self.scale(Complex64::new(t, 0.0))
    }

    /// Exchange `X` and `Y` in every word.
    pub fn swap_letters(&self) -> GradedSeries {
        GradedSeries {
            truncation: self.truncation,
            grades: self
                .grades
                .iter()
                .map(|g| {
                    let m = mask(g.degree());
                    g.map_codes(|c| c ^ m)
                })
                .collect(),
        }
    }

    /// Formal adjoint for the involution fixing `X`, `Y`: reverse every word
    /// and conjugate coefficients.
    pub fn star(&self) -> GradedSeries {
        GradedSeries {
            truncation: self.truncation,
            grades: self
                .grades
                .iter()
                .map(|g| {
                    let d = g.degree();
                    let terms = g.terms().map(|(w, c)| {
                        let rev: Vec<Letter> = (0..w.len()).rev().map(|i| w.at(i)).collect();
                        (Word::from_letters(&rev).expect("same length"), c.conj())
                    });
                    WordPoly::from_terms(d, terms)
                })
                .collect(),
        }
    }

    /// Largest coefficientwise modulus of `self - other` over common degrees.
    pub fn max_abs_diff(&self, other: &GradedSeries) -> f64 {
        self.sub(other).grades.iter().map(|g| g.max_abs()).fold(0.0, f64::max)
    }

    /// Per-degree `l1` distances, indexed from degree 1.
    pub fn grade_distances(&self, other: &GradedSeries) -> Vec<f64> {
        self.sub(other).grades.iter().map(|g| g.l1_norm()).collect()
    }
}

fn product_grade(p: &GradedSeries, q: &GradedSeries, d: usize) -> WordPoly {
    let mut acc = Accumulator::new(d);
    accumulate_product(&mut acc, p, q, d, ONE);
    acc.finish()
}

fn accumulate_product(acc: &mut Accumulator, p: &GradedSeries, q: &GradedSeries, d: usize, c: Complex64) {
    for i in 1..d {
        let j = d - i;
        if i > p.truncation || j > q.truncation {
            continue;
        }
        let a = p.grades[i - 1].raw_terms();
        let b = q.grades[j - 1].raw_terms();
        if a.is_empty() || b.is_empty() {
            continue;
        }
        for &(wa, ca) in a {
            let hi = wa << j;
            let ca = ca * c;
            for &(wb, cb) in b {
                acc.add(hi | wb, ca * cb);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(text: &str) -> GradedSeries {
        GradedSeries::parse(6, text).unwrap()
    }

    #[test]
    fn generators_multiply_to_words() {
        let xy = GradedSeries::x(4).mul(&GradedSeries::y(4));
        assert_eq!(xy, s("XY").truncate(4));
        let sum = GradedSeries::x(4).add(&GradedSeries::y(4));
        assert_eq!(sum.mul(&sum), GradedSeries::parse(4, "XX+XY+YX+YY").unwrap());
    }

    #[test]
    fn l1_is_multiplicative_on_monomials() {
        let p = GradedSeries::x(4).scaled_re(2.0);
        let q = GradedSeries::y(4).scaled_re(3.0);
        assert_eq!(p.mul(&q).l1_norm(), 6.0);
    }

    #[test]
    fn brackets() {
        let x = GradedSeries::x(6);
        let y = GradedSeries::y(6);
        assert!(x.bracket(&x).is_zero());
        assert_eq!(x.bracket(&y), s("XY - YX"));
        assert_eq!(x.bracket(&x.bracket(&y)), s("XXY - 2XYX + YXX"));
    }

    #[test]
    fn truncation_discards_high_words() {
        let x = GradedSeries::x(2);
        let xxx = x.mul(&x).mul(&x);
        assert!(xxx.is_zero());
    }

    #[test]
    fn scaling() {
        let p = s("X + XY");
        let q = p.scale_re(0.5);
        assert_eq!(q, s("0.5X + 0.25XY"));
    }

    #[test]
    fn swap_and_star() {
        let p = s("XXY - 2YX");
        assert_eq!(p.swap_letters(), s("YYX - 2XY"));
        assert_eq!(p.star(), s("YXX - 2XY"));
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(GradedSeries::parse(3, "2 Z").is_err());
        assert!(GradedSeries::parse(3, "a X").is_err());
    }
}
