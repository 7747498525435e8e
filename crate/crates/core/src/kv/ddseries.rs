//! Real series in double-double precision, stored densely per grade.
//!
//! The factorization residual at radius `rho` contains a contribution of
//! order `eps * rho^3` from rounding the low-grade coefficients of `R`, `S`
//! to `f64`. Measuring the `rho^{N+1}` truncation error at small radii needs
//! coefficients to about 32 digits, which this module computes along the
//! same route as the `f64` solver.

use num_complex::Complex64;
use twofloat::TwoFloat;

use super::hiprec::DdMatrix;
use super::solve::KvSolution;
use crate::bch::SplitMode;
use crate::error::{Error, Result};
use crate::free_algebra::{GradedSeries, Word, MAX_DEGREE};

fn zero() -> TwoFloat {
    TwoFloat::from(0.0)
}

fn one() -> TwoFloat {
    TwoFloat::from(1.0)
}

/// Truncated real series; grade `d` holds `2^d` coefficients indexed by word code.
#[derive(Clone, Debug, PartialEq)]
pub struct DdSeries {
    n: usize,
    grades: Vec<Vec<TwoFloat>>,
}

impl DdSeries {
    pub fn zero(n: usize) -> DdSeries {
        DdSeries {
            n,
            grades: (1..=n).map(|d| vec![zero(); 1 << d]).collect(),
        }
    }

    fn generator(n: usize, code: usize) -> DdSeries {
        let mut s = DdSeries::zero(n);
        s.grades[0][code] = one();
        s
    }

    pub fn x(n: usize) -> DdSeries {
        DdSeries::generator(n, 0)
    }

    pub fn y(n: usize) -> DdSeries {
        DdSeries::generator(n, 1)
    }

    pub fn truncation(&self) -> usize {
        self.n
    }

    pub fn grade(&self, d: usize) -> &[TwoFloat] {
        &self.grades[d - 1]
    }

    /// Real parts of `p`.
    pub fn from_series(p: &GradedSeries) -> DdSeries {
        let mut s = DdSeries::zero(p.truncation());
        for (w, c) in p.terms() {
            s.grades[w.len() - 1][w.code() as usize] = TwoFloat::from(c.re);
        }
        s
    }

    /// Rounded to `f64`.
    pub fn to_series(&self) -> GradedSeries {
        let terms = self.grades.iter().enumerate().flat_map(|(k, g)| {
            g.iter()
                .enumerate()
                .filter(|(_, c)| **c != zero())
                .map(move |(code, c)| {
                    (
                        Word::new(k + 1, code as u32).expect("code fits the degree"),
                        Complex64::new(f64::from(*c), 0.0),
                    )
                })
        });
        GradedSeries::from_terms(self.n, terms)
    }

    pub fn truncate(&self, d: usize) -> DdSeries {
        DdSeries {
            n: d,
            grades: (1..=d)
                .map(|k| self.grades.get(k - 1).cloned().unwrap_or_else(|| vec![zero(); 1 << k]))
                .collect(),
        }
    }

    fn zip(&self, other: &DdSeries, f: impl Fn(TwoFloat, TwoFloat) -> TwoFloat) -> DdSeries {
        let n = self.n.min(other.n);
        DdSeries {
            n,
            grades: (0..n)
                .map(|k| {
                    self.grades[k]
                        .iter()
                        .zip(&other.grades[k])
                        .map(|(a, b)| f(*a, *b))
                        .collect()
                })
                .collect(),
        }
    }

    fn map(&self, f: impl Fn(TwoFloat) -> TwoFloat) -> DdSeries {
        DdSeries {
            n: self.n,
            grades: self.grades.iter().map(|g| g.iter().map(|c| f(*c)).collect()).collect(),
        }
    }

    pub fn add(&self, other: &DdSeries) -> DdSeries {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &DdSeries) -> DdSeries {
        self.zip(other, |a, b| a - b)
    }

    pub fn neg(&self) -> DdSeries {
        self.map(|a| -a)
    }

    pub fn scaled(&self, c: TwoFloat) -> DdSeries {
        self.map(|a| a * c)
    }

    /// Divide every coefficient by `d`.
    pub fn div_real(&self, d: f64) -> DdSeries {
        self.map(|a| a / d)
    }

    /// `self += c * other` in place.
    fn axpy(&mut self, c: TwoFloat, other: &DdSeries) {
        for (g, h) in self.grades.iter_mut().zip(&other.grades) {
            for (a, b) in g.iter_mut().zip(h) {
                *a += c * *b;
            }
        }
    }

    fn is_zero(&self) -> bool {
        self.grades.iter().all(|g| g.iter().all(|c| *c == zero()))
    }

    /// Truncated product.
    pub fn mul(&self, other: &DdSeries) -> DdSeries {
        let n = self.n.min(other.n);
        let mut out = DdSeries::zero(n);
        for i in 1..n {
            let a = &self.grades[i - 1];
            for j in 1..=n - i {
                let b = &other.grades[j - 1];
                let dst = &mut out.grades[i + j - 1];
                for (u, cu) in a.iter().enumerate() {
                    if *cu == zero() {
                        continue;
                    }
                    let base = u << j;
                    for (v, cv) in b.iter().enumerate() {
                        if *cv != zero() {
                            dst[base | v] += *cu * *cv;
                        }
                    }
                }
            }
        }
        out
    }

    pub fn bracket(&self, other: &DdSeries) -> DdSeries {
        self.mul(other).sub(&other.mul(self))
    }

    /// Exchange `X` and `Y`.
    pub fn swap_letters(&self) -> DdSeries {
        DdSeries {
            n: self.n,
            grades: self
                .grades
                .iter()
                .enumerate()
                .map(|(k, g)| {
                    let mask = (1usize << (k + 1)) - 1;
                    (0..g.len()).map(|code| g[!code & mask]).collect()
                })
                .collect(),
        }
    }

    /// Per-grade `l1` distance to an `f64` series.
    pub fn grade_distances(&self, p: &GradedSeries) -> Vec<f64> {
        let d = self.sub(&DdSeries::from_series(p).truncate(self.n));
        d.grades
            .iter()
            .map(|g| g.iter().map(|c| f64::from(*c).abs()).sum())
            .collect()
    }

    /// `live[d-1][code]`: some word with this prefix has a nonzero coefficient.
    fn live_prefixes(&self) -> Vec<Vec<bool>> {
        let mut live: Vec<Vec<bool>> = self
            .grades
            .iter()
            .map(|g| g.iter().map(|c| *c != zero()).collect())
            .collect();
        for d in (1..self.n).rev() {
            for code in 0..live[d - 1].len() {
                if live[d][code << 1] || live[d][(code << 1) | 1] {
                    live[d - 1][code] = true;
                }
            }
        }
        live
    }
}

/// Targets of the substitution `X -> u`, `Y -> v`.
pub(crate) trait DdRing: Clone {
    fn zero_like(&self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn axpy(&mut self, c: TwoFloat, other: &Self);
}

impl DdRing for DdSeries {
    fn zero_like(&self) -> Self {
        DdSeries::zero(self.n)
    }

    fn mul(&self, other: &Self) -> Self {
        DdSeries::mul(self, other)
    }

    fn axpy(&mut self, c: TwoFloat, other: &Self) {
        DdSeries::axpy(self, c, other)
    }
}

impl DdRing for DdMatrix {
    fn zero_like(&self) -> Self {
        DdMatrix::zeros(self.dim())
    }

    fn mul(&self, other: &Self) -> Self {
        DdMatrix::mul(self, other)
    }

    fn axpy(&mut self, c: TwoFloat, other: &Self) {
        self.axpy_real(c, other)
    }
}

/// `p(u, v)`, walking the word tree and sharing prefix products.
pub(crate) fn substitute<T: DdRing>(p: &DdSeries, u: &T, v: &T) -> T {
    fn walk<T: DdRing>(p: &DdSeries, live: &[Vec<bool>], len: usize, code: usize, m: &T, out: &mut T, uv: [&T; 2]) {
        let c = p.grades[len - 1][code];
        if c != zero() {
            out.axpy(c, m);
        }
        if len < p.n {
            for (a, l) in uv.iter().enumerate() {
                let next = (code << 1) | a;
                if live[len][next] {
                    walk(p, live, len + 1, next, &m.mul(l), out, uv);
                }
            }
        }
    }
    let live = p.live_prefixes();
    let mut out = u.zero_like();
    for (a, l) in [u, v].iter().enumerate() {
        if p.n >= 1 && live[0][a] {
            walk(p, &live, 1, a, *l, &mut out, [u, v]);
        }
    }
    out
}

/// Coefficients `c_0..c_n` of a power series in one variable.
type Coeffs = Vec<TwoFloat>;

/// `e^{s t}`.
fn exp_coeffs(s: f64, n: usize) -> Coeffs {
    let mut c = vec![one()];
    for k in 1..=n {
        let prev = c[k - 1];
        c.push(prev * s / k as f64);
    }
    c
}

/// `t / (e^{s t} - 1)` for `s = +-1`.
fn bernoulli_like(s: f64, n: usize) -> Coeffs {
    // (e^{st} - 1)/t has coefficients s^{k+1}/(k+1)!
    let den: Coeffs = exp_coeffs(s, n + 1)[1..].to_vec();
    let mut q: Coeffs = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let mut acc = if k == 0 { one() } else { zero() };
        for j in 1..=k {
            acc -= den[j] * q[k - j];
        }
        q.push(acc / s);
    }
    q
}

/// `sum_k c_k ad_z^k (w)`.
fn ad_apply(c: &Coeffs, z: &DdSeries, w: &DdSeries) -> DdSeries {
    let mut out = w.scaled(c[0]);
    let mut term = w.clone();
    for ck in &c[1..] {
        term = z.bracket(&term);
        if term.is_zero() {
            break;
        }
        out.axpy(*ck, &term);
    }
    out
}

/// `e^A - 1` for `A` without constant term.
fn expm1(a: &DdSeries) -> DdSeries {
    let mut out = a.clone();
    let mut term = a.clone();
    for k in 2..=a.n {
        term = term.mul(a).div_real(k as f64);
        out = out.add(&term);
    }
    out
}

/// `log(1 + C)` for `C` without constant term.
fn log1p(c: &DdSeries) -> DdSeries {
    let mut out = c.clone();
    let mut pow = c.clone();
    for k in 2..=c.n {
        pow = pow.mul(c);
        let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
        out = out.add(&pow.div_real(sign * k as f64));
    }
    out
}

/// `log(e^X e^Y)`.
pub fn dd_bch_series(n: usize) -> DdSeries {
    let a = expm1(&DdSeries::x(n));
    let b = expm1(&DdSeries::y(n));
    log1p(&a.add(&b).add(&a.mul(&b)))
}

/// Right-nested bracketing of a homogeneous component of degree `d`.
fn right_nested(g: &[TwoFloat], d: usize) -> Vec<TwoFloat> {
    if d == 1 {
        return g.to_vec();
    }
    let half = 1usize << (d - 1);
    let mut out = vec![zero(); 1 << d];
    for (letter, part) in [&g[..half], &g[half..]].into_iter().enumerate() {
        let inner = right_nested(part, d - 1);
        for (w, c) in inner.iter().enumerate() {
            if *c != zero() {
                // letter * w - w * letter
                out[(letter << (d - 1)) | w] += *c;
                out[(w << 1) | letter] -= *c;
            }
        }
    }
    out
}

/// Left-nested bracketing of a homogeneous component of degree `d`.
fn left_nested(g: &[TwoFloat], d: usize) -> Vec<TwoFloat> {
    if d == 1 {
        return g.to_vec();
    }
    let mut out = vec![zero(); 1 << d];
    for letter in 0..2 {
        let part: Vec<TwoFloat> = (0..1usize << (d - 1)).map(|w| g[(w << 1) | letter]).collect();
        let inner = left_nested(&part, d - 1);
        for (w, c) in inner.iter().enumerate() {
            if *c != zero() {
                // w * letter - letter * w
                out[(w << 1) | letter] += *c;
                out[(letter << (d - 1)) | w] -= *c;
            }
        }
    }
    out
}

/// `P`, `Q` with `Z = Z_1 + [X, P] + [Y, Q]`, normalized as in the `f64` split.
fn halfhalf(z: &DdSeries, mode: SplitMode) -> (DdSeries, DdSeries) {
    let n = z.n;
    let mut p = DdSeries::zero(n);
    let mut q = DdSeries::zero(n);
    for d in 2..=n {
        let g = &z.grades[d - 1];
        let half = 1usize << (d - 1);
        let scale = |v: Vec<TwoFloat>, s: f64| -> Vec<TwoFloat> { v.into_iter().map(|c| c / s).collect() };
        let mut pn = scale(right_nested(&g[..half], d - 1), d as f64);
        let mut qn = scale(right_nested(&g[half..], d - 1), d as f64);
        if mode == SplitMode::Symmetric {
            let lx: Vec<TwoFloat> = (0..half).map(|w| g[w << 1]).collect();
            let ly: Vec<TwoFloat> = (0..half).map(|w| g[(w << 1) | 1]).collect();
            let pl = scale(left_nested(&lx, d - 1), -(d as f64));
            let ql = scale(left_nested(&ly, d - 1), -(d as f64));
            pn = pn.iter().zip(&pl).map(|(a, b)| (*a + *b) / 2.0).collect();
            qn = qn.iter().zip(&ql).map(|(a, b)| (*a + *b) / 2.0).collect();
        }
        p.grades[d - 2] = pn;
        q.grades[d - 2] = qn;
    }
    (p, q)
}

/// `R`, `S` with double-double coefficients.
#[derive(Clone, Debug)]
pub struct DdSolution {
    pub degree: usize,
    pub split_mode: SplitMode,
    pub r: DdSeries,
    pub s: DdSeries,
}

impl DdSolution {
    /// Largest per-grade `l1` distance to an `f64` solution.
    pub fn deviation_from(&self, sol: &KvSolution) -> f64 {
        self.r
            .grade_distances(&sol.r)
            .into_iter()
            .chain(self.s.grade_distances(&sol.s))
            .fold(0.0, f64::max)
    }
}

/// The grade recursion of [`super::solve_rs`] in double-double arithmetic.
pub fn solve_rs_dd(n: usize, mode: SplitMode) -> Result<DdSolution> {
    if !(2..=MAX_DEGREE.min(12)).contains(&n) {
        return Err(Error::Precondition(format!("degree {n} must lie in [2, 12]")));
    }
    let v = dd_bch_series(n);
    let (a, b) = halfhalf(&v, mode);
    let x = DdSeries::x(n);
    let y = DdSeries::y(n);
    // phi(t) = t/(e^{-t} - 1), psi(t) = t/(e^t - 1)
    let phi = bernoulli_like(-1.0, n);
    let psi = bernoulli_like(1.0, n);
    let f = ad_apply(&phi, &x, &b.swap_letters());
    let g = ad_apply(&psi, &y, &a.swap_letters()).neg();
    let e = exp_coeffs(1.0, n);
    let mut r = DdSeries::zero(n);
    let mut s = DdSeries::zero(n);
    for d in 1..=n {
        let (rt, st) = (r.truncate(d), s.truncate(d));
        let xr = ad_apply(&e, &rt, &DdSeries::x(d));
        let ys = ad_apply(&e, &st, &DdSeries::y(d));
        let fr = substitute(&f.truncate(d), &xr, &ys);
        let gs = substitute(&g.truncate(d), &xr, &ys);
        let dr = ad_apply(&psi, &rt, &fr);
        let ds = ad_apply(&psi, &st, &gs);
        r.grades[d - 1] = dr.grades[d - 1].iter().map(|c| *c / d as f64).collect();
        s.grades[d - 1] = ds.grades[d - 1].iter().map(|c| *c / d as f64).collect();
    }
    Ok(DdSolution {
        degree: n,
        split_mode: mode,
        r,
        s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bch::bch_series;
    use crate::kv::solve_rs;
    use crate::matrix::MatrixElt;

    fn s(n: usize, text: &str) -> GradedSeries {
        GradedSeries::parse(n, text).unwrap()
    }

    #[test]
    fn nested_brackets() {
        let n = 3;
        let xxy = DdSeries::from_series(&s(n, "XXY"));
        let rn = right_nested(xxy.grade(3), 3);
        let want = DdSeries::from_series(&s(n, "XXY - 2 XYX + YXX"));
        assert_eq!(rn, want.grade(3));
        // [[X,Y],X] = 2 XYX - YXX - XXY
        let xyx = DdSeries::from_series(&s(n, "XYX"));
        let want = DdSeries::from_series(&s(n, "2 XYX - YXX - XXY"));
        assert_eq!(left_nested(xyx.grade(3), 3), want.grade(3));
        let xyy = DdSeries::from_series(&s(n, "XYY"));
        // [[X,Y],Y] = XYY - 2 YXY + YYX
        let want = DdSeries::from_series(&s(n, "XYY - 2 YXY + YYX"));
        assert_eq!(left_nested(xyy.grade(3), 3), want.grade(3));
    }

    #[test]
    fn bernoulli_values() {
        let psi = bernoulli_like(1.0, 4);
        let want = [1.0, -0.5, 1.0 / 12.0, 0.0, -1.0 / 720.0];
        for (c, w) in psi.iter().zip(want) {
            assert!((f64::from(*c) - w).abs() < 1e-17);
        }
        // phi(t) = -psi(-t)
        let phi = bernoulli_like(-1.0, 4);
        for (k, (a, b)) in phi.iter().zip(&psi).enumerate() {
            let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
            assert_eq!(f64::from(*a), sign * f64::from(*b));
        }
    }

    #[test]
    fn bch_matches_f64() {
        let v = bch_series(8);
        let d = dd_bch_series(8);
        let gaps = d.grade_distances(&v);
        assert!(gaps.iter().all(|e| *e < 1e-13), "{gaps:?}");
        let two_thirds = TwoFloat::from(2.0) / 3.0;
        // grade 3 coefficient of XXY is 1/12, resolved beyond f64
        let c = d.grade(3)[0b001];
        assert!(f64::from(c * 12.0 - one()).abs() < 1e-30, "{c:?}");
        assert!(f64::from(two_thirds * 3.0 - TwoFloat::from(2.0)).abs() < 1e-30);
    }

    #[test]
    fn solution_matches_f64() {
        for mode in SplitMode::ALL {
            let sol = solve_rs(6, mode).unwrap();
            let dd = solve_rs_dd(6, mode).unwrap();
            assert!(dd.deviation_from(&sol) < 1e-14, "{}", dd.deviation_from(&sol));
        }
    }

    #[test]
    fn substitution_into_matrices() {
        let p = s(3, "XY - 2 YXX + 0.5 Y");
        let dp = DdSeries::from_series(&p);
        let u = MatrixElt::from_real_rows(&[&[0.0, 1.0], &[2.0, 0.5]]);
        let v = MatrixElt::from_real_rows(&[&[1.0, 0.0], &[-1.0, 3.0]]);
        let got = substitute(&dp, &DdMatrix::from_matrix(&u), &DdMatrix::from_matrix(&v)).to_matrix();
        let want = crate::free_algebra::evaluate(&p, &u, &v).unwrap();
        assert!(got.dist(&want) < 1e-14);
    }
}
