use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::MatrixElt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewriteKind {
    /// `[a [x1, x2] b, c]`.
    FormI,
    /// `[a pi_3(x1, ..., x8) b, c]`.
    FormII,
}

impl RewriteKind {
    pub fn arity(self) -> usize {
        match self {
            RewriteKind::FormI => 2,
            RewriteKind::FormII => 8,
        }
    }
}

/// Matrices bound to the variables `a, b, c, x_1, ...`.
#[derive(Clone, Debug)]
pub struct Bindings {
    pub a: MatrixElt,
    pub b: MatrixElt,
    pub c: MatrixElt,
    pub xs: Vec<MatrixElt>,
}

/// One summand; `i` indexes the bound `x` variables from zero.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Term {
    /// `sign [x_i, r]`.
    Bracket { sign: f64, i: usize, r: MatrixElt },
    /// `sign [[x_i, r], s]`.
    DoubleBracket {
        sign: f64,
        i: usize,
        r: MatrixElt,
        s: MatrixElt,
    },
    /// `sign [x_i, [r, s]]`.
    Nested {
        sign: f64,
        i: usize,
        r: MatrixElt,
        s: MatrixElt,
    },
    /// `sign [[x_i, [r, s]], [r2, s2]]`.
    NestedPair {
        sign: f64,
        i: usize,
        r: MatrixElt,
        s: MatrixElt,
        r2: MatrixElt,
        s2: MatrixElt,
    },
}

impl Term {
    pub fn index(&self) -> usize {
        match self {
            Term::Bracket { i, .. }
            | Term::DoubleBracket { i, .. }
            | Term::Nested { i, .. }
            | Term::NestedPair { i, .. } => *i,
        }
    }

    pub fn shape(&self) -> &'static str {
        match self {
            Term::Bracket { .. } => "[x_i, r]",
            Term::DoubleBracket { .. } => "[[x_i, r], s]",
            Term::Nested { .. } => "[x_i, [r, s]]",
            Term::NestedPair { .. } => "[[x_i, [r, s]], [r', s']]",
        }
    }

    pub fn value(&self, xs: &[MatrixElt]) -> MatrixElt {
        match self {
            Term::Bracket { sign, i, r } => xs[*i].commutator(r).scale_re(*sign),
            Term::DoubleBracket { sign, i, r, s } => xs[*i].commutator(r).commutator(s).scale_re(*sign),
            Term::Nested { sign, i, r, s } => xs[*i].commutator(&r.commutator(s)).scale_re(*sign),
            Term::NestedPair { sign, i, r, s, r2, s2 } => xs[*i]
                .commutator(&r.commutator(s))
                .commutator(&r2.commutator(s2))
                .scale_re(*sign),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Rewrite {
    pub kind: RewriteKind,
    pub terms: Vec<Term>,
    /// `||sum of terms - original||`.
    pub residual: f64,
}

/// Nine terms of shapes `[x_i, r]` and `[[x_i, r], s]` summing to `[a [x1, x2] b, c]`:
///
/// `a [x1, x2] b = ab [x1, x2] + a [x1, [x2, b]] - a [x2, [x1, b]]`,
/// then `y [u, v] = [u, y v] - [u, y] v` and `[y z, c] = [y, z c] + [z, c y]`.
pub fn form_i_terms(a: &MatrixElt, b: &MatrixElt, c: &MatrixElt, x1: &MatrixElt, x2: &MatrixElt) -> Vec<Term> {
    let ab = a * b;
    let dbl = |sign: f64, i: usize, r: MatrixElt, s: MatrixElt| Term::DoubleBracket { sign, i, r, s };
    let x1ab = x1.commutator(&ab);
    let x1a = x1.commutator(a);
    let x2a = x2.commutator(a);
    let x1b = x1.commutator(b);
    let x2b = x2.commutator(b);
    vec![
        dbl(1.0, 0, &ab * x2, c.clone()),
        dbl(-1.0, 0, ab.clone(), x2 * c),
        Term::Bracket {
            sign: -1.0,
            i: 1,
            r: c * &x1ab,
        },
        dbl(1.0, 0, a * &x2b, c.clone()),
        dbl(-1.0, 0, a.clone(), &x2b * c),
        dbl(-1.0, 1, b.clone(), c * &x1a),
        dbl(-1.0, 1, a * &x1b, c.clone()),
        dbl(1.0, 1, a.clone(), &x1b * c),
        dbl(1.0, 0, b.clone(), c * &x2a),
    ]
}

/// `pi_n` on `2^n` arguments.
pub fn pi(xs: &[MatrixElt]) -> MatrixElt {
    if xs.len() == 1 {
        return xs[0].clone();
    }
    let (l, r) = xs.split_at(xs.len() / 2);
    pi(l).commutator(&pi(r))
}

/// `[pi_2(y), r]` as terms `[y_i, [y_j, [u, v]]]`, with `[u, v]` kept unexpanded.
/// Entries are `(sign, i, j, u, v)`, indices relative to `y`.
fn pi2_bracket(y: &[MatrixElt], r: &MatrixElt) -> Vec<(f64, usize, usize, MatrixElt, MatrixElt)> {
    // [[y0,y1],[y2,y3]], r] = [[y0,y1], [[y2,y3], r]] - [[y2,y3], [[y0,y1], r]]
    // and [[yi,yj], w] = [yi, [yj, w]] - [yj, [yi, w]]
    let p01 = y[0].commutator(&y[1]);
    let p23 = y[2].commutator(&y[3]);
    vec![
        (1.0, 0, 1, p23.clone(), r.clone()),
        (-1.0, 1, 0, p23, r.clone()),
        (-1.0, 2, 3, p01.clone(), r.clone()),
        (1.0, 3, 2, p01, r.clone()),
    ]
}

fn form_ii_terms(bind: &Bindings) -> Vec<Term> {
    let groups = [&bind.xs[..4], &bind.xs[4..]];
    let p = [pi(groups[0]), pi(groups[1])];
    let mut out = Vec::with_capacity(68);
    for t in form_i_terms(&bind.a, &bind.b, &bind.c, &p[0], &p[1]) {
        match t {
            Term::Bracket { sign, i, r } => {
                for (sg, a, bj, u, v) in pi2_bracket(groups[i], &r) {
                    out.push(Term::Nested {
                        sign: sign * sg,
                        i: 4 * i + a,
                        r: groups[i][bj].clone(),
                        s: u.commutator(&v),
                    });
                }
            }
            Term::DoubleBracket { sign, i, r, s } => {
                // [[y_a, [y_b, w]], s] = [y_a, [[y_b, w], s]] - [[y_b, w], [y_a, s]]
                for (sg, a, bj, u, v) in pi2_bracket(groups[i], &r) {
                    let w = u.commutator(&v);
                    let yb_w = groups[i][bj].commutator(&w);
                    out.push(Term::Nested {
                        sign: sign * sg,
                        i: 4 * i + a,
                        r: yb_w,
                        s: s.clone(),
                    });
                    out.push(Term::NestedPair {
                        sign: -sign * sg,
                        i: 4 * i + bj,
                        r: u,
                        s: v,
                        r2: groups[i][a].clone(),
                        s2: s.clone(),
                    });
                }
            }
            _ => unreachable!("form (i) yields brackets and double brackets only"),
        }
    }
    out
}

/// Rewrite `[a x b, c]` for `x = [x1, x2]` or `x = pi_3(x1, ..., x8)`.
pub fn lie_rewrite(kind: RewriteKind, bind: &Bindings) -> Result<Rewrite> {
    if bind.xs.len() != kind.arity() {
        return Err(Error::Precondition(format!(
            "{kind:?} takes {} x-bindings, got {}",
            kind.arity(),
            bind.xs.len()
        )));
    }
    for m in [&bind.b, &bind.c].into_iter().chain(&bind.xs) {
        bind.a.check_same_dim(m)?;
    }
    let terms = match kind {
        RewriteKind::FormI => form_i_terms(&bind.a, &bind.b, &bind.c, &bind.xs[0], &bind.xs[1]),
        RewriteKind::FormII => form_ii_terms(bind),
    };
    let original = (&(&bind.a * &pi(&bind.xs)) * &bind.b).commutator(&bind.c);
    let mut sum = MatrixElt::zeros(bind.a.dim());
    for t in &terms {
        sum += &t.value(&bind.xs);
    }
    Ok(Rewrite {
        kind,
        residual: sum.dist(&original),
        terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{random_gaussian, InstanceRng};

    fn bindings(n: usize, k: usize, rng: &mut InstanceRng) -> Bindings {
        Bindings {
            a: random_gaussian(n, rng),
            b: random_gaussian(n, rng),
            c: random_gaussian(n, rng),
            xs: (0..k).map(|_| random_gaussian(n, rng)).collect(),
        }
    }

    #[test]
    fn form_i_random() {
        let mut rng = InstanceRng::new(1);
        let b = bindings(4, 2, &mut rng);
        let r = lie_rewrite(RewriteKind::FormI, &b).unwrap();
        assert_eq!(r.terms.len(), 9);
        assert!(r.residual < 1e-11, "{}", r.residual);
    }

    #[test]
    fn form_i_with_units_is_jacobi() {
        let mut rng = InstanceRng::new(2);
        let mut b = bindings(3, 2, &mut rng);
        b.a = MatrixElt::identity(3);
        b.b = MatrixElt::identity(3);
        let r = lie_rewrite(RewriteKind::FormI, &b).unwrap();
        let jacobi = &b.xs[0].commutator(&b.xs[1].commutator(&b.c)) - &b.xs[1].commutator(&b.xs[0].commutator(&b.c));
        let mut sum = MatrixElt::zeros(3);
        for t in &r.terms {
            sum += &t.value(&b.xs);
        }
        assert!(sum.dist(&jacobi) < 1e-12);
        assert!(r.residual < 1e-12);
    }

    #[test]
    fn form_ii_random() {
        let mut rng = InstanceRng::new(3);
        for _ in 0..5 {
            let b = bindings(4, 8, &mut rng);
            let scale: f64 =
                b.xs.iter().map(|x| x.op_norm()).product::<f64>() * b.a.op_norm() * b.b.op_norm() * b.c.op_norm();
            let r = lie_rewrite(RewriteKind::FormII, &b).unwrap();
            assert_eq!(r.terms.len(), 68);
            assert!(r.residual < 1e-13 * scale, "{} vs {scale}", r.residual);
            assert!(r
                .terms
                .iter()
                .all(|t| matches!(t, Term::Nested { .. } | Term::NestedPair { .. })));
        }
    }

    #[test]
    fn form_ii_unit_scale() {
        let mut rng = InstanceRng::new(4);
        let mut b = bindings(4, 8, &mut rng);
        for m in [&mut b.a, &mut b.b, &mut b.c].into_iter().chain(b.xs.iter_mut()) {
            *m = m.scale_re(1.0 / m.op_norm());
        }
        let r = lie_rewrite(RewriteKind::FormII, &b).unwrap();
        assert!(r.residual <= 1e-9);
    }

    #[test]
    fn zero_bindings() {
        let z = MatrixElt::zeros(2);
        let b = Bindings {
            a: z.clone(),
            b: z.clone(),
            c: z.clone(),
            xs: vec![z.clone(), z],
        };
        let r = lie_rewrite(RewriteKind::FormI, &b).unwrap();
        assert!(r.terms.iter().all(|t| t.value(&b.xs).op_norm() == 0.0));
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn arity_mismatch() {
        let mut rng = InstanceRng::new(5);
        let b = bindings(2, 3, &mut rng);
        assert!(lie_rewrite(RewriteKind::FormI, &b).is_err());
        assert!(lie_rewrite(RewriteKind::FormII, &b).is_err());
    }
}
