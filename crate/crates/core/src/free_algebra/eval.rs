use num_complex::Complex64;

use super::series::GradedSeries;
use crate::error::Result;
use crate::matrix::MatrixElt;

/// Target of the substitution homomorphism `X -> x`, `Y -> y`.
///
/// `mul_within` may discard contributions above `budget` total degree; only
/// graded targets make use of it.
pub trait Substitution: Clone {
    fn zero_like(&self) -> Self;
    fn add_scaled_assign(&mut self, other: &Self, c: Complex64);
    fn mul_within(&self, other: &Self, budget: usize) -> Self;
    /// Largest degree worth computing. Unbounded targets return `usize::MAX`.
    fn degree_cap(&self) -> usize {
        usize::MAX
    }
}

impl Substitution for GradedSeries {
    fn zero_like(&self) -> Self {
        GradedSeries::zero(self.truncation())
    }

    fn add_scaled_assign(&mut self, other: &Self, c: Complex64) {
        *self = self.add_scaled(other, c);
    }

    fn mul_within(&self, other: &Self, budget: usize) -> Self {
        let n = self.truncation().min(other.truncation());
        self.mul_trunc(other, budget.min(n).max(1)).truncate(n)
    }

    fn degree_cap(&self) -> usize {
        self.truncation()
    }
}

#[derive(Default)]
struct Node {
    /// Coefficient of the word ending at the child reached by each letter.
    ends: [Complex64; 2],
    children: [Option<Box<Node>>; 2],
}

/// A series stored as a prefix trie so that it can be evaluated by nested
/// Horner steps, sharing work between words with common prefixes.
pub struct Horner {
    root: Node,
    max_len: usize,
}

impl Horner {
    pub fn new(p: &GradedSeries) -> Horner {
        let mut root = Node::default();
        let mut max_len = 0;
        for (w, c) in p.terms() {
            max_len = max_len.max(w.len());
            let mut node = &mut root;
            for i in 0..w.len() - 1 {
                let b = w.at(i) as usize;
                node = node.children[b].get_or_insert_with(Default::default);
            }
            node.ends[w.last() as usize] += c;
        }
        Horner { root, max_len }
    }

    /// Image of the stored series under `X -> x`, `Y -> y`.
    pub fn eval<T: Substitution>(&self, x: &T, y: &T) -> T {
        eval_node(&self.root, [x, y], x.degree_cap().min(y.degree_cap()))
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }
}

/// `g(w) = sum_a x_a * (c_{wa} + g(wa))` with the unit folded into the
/// scalar term so no identity element is needed.
fn eval_node<T: Substitution>(node: &Node, gens: [&T; 2], budget: usize) -> T {
    let mut out = gens[0].zero_like();
    for a in 0..2 {
        let c = node.ends[a];
        if c != Complex64::new(0.0, 0.0) {
            out.add_scaled_assign(gens[a], c);
        }
        if let Some(child) = &node.children[a] {
            if budget >= 2 {
                let inner = eval_node(child, gens, budget.saturating_sub(1));
                let prod = gens[a].mul_within(&inner, budget);
                out.add_scaled_assign(&prod, Complex64::new(1.0, 0.0));
            }
        }
    }
    out
}

/// Substitute `x`, `y` for the generators of `p`.
pub fn substitute<T: Substitution>(p: &GradedSeries, x: &T, y: &T) -> T {
    Horner::new(p).eval(x, y)
}

/// Image of `p` under `X -> u`, `Y -> v` in a matrix algebra.
pub fn evaluate(p: &GradedSeries, u: &MatrixElt, v: &MatrixElt) -> Result<MatrixElt> {
    u.check_same_dim(v)?;
    Ok(substitute(p, u, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::free_algebra::Letter;

    #[test]
    fn substitution_into_series() {
        let p = GradedSeries::parse(4, "XY - 2YX + YYY").unwrap();
        let x = GradedSeries::parse(4, "X + XY").unwrap();
        let y = GradedSeries::y(4);
        let got = substitute(&p, &x, &y);
        let direct = x.mul(&y).sub(&y.mul(&x).scaled_re(2.0)).add(&y.mul(&y).mul(&y));
        assert!(got.max_abs_diff(&direct) < 1e-15);
    }

    #[test]
    fn identity_substitution() {
        let p = GradedSeries::parse(5, "XYXYY + 3X - YX").unwrap();
        let got = substitute(&p, &GradedSeries::x(5), &GradedSeries::y(5));
        assert_eq!(got, p);
        let swapped = substitute(&p, &GradedSeries::generator(Letter::Y, 5), &GradedSeries::x(5));
        assert_eq!(swapped, p.swap_letters());
    }
}
