use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::adseries::AdOperatorSeries;
use super::formal::bch_of;
use crate::error::{Error, Result};
use crate::free_algebra::{is_lie, left_nested, right_nested, GradedSeries, LieSeries, WordPoly};

/// Tolerance used to accept computed series as Lie elements.
pub const LIE_TOL: f64 = 1e-10;

/// How a Lie element `Z` is written as `Z_1 + [X, P] + [Y, Q]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitMode {
    /// Split words by their first letter and right-bracket the remainder.
    FirstLetter,
    /// Average of the first-letter and last-letter splits.
    Symmetric,
}

impl SplitMode {
    pub const ALL: [SplitMode; 2] = [SplitMode::FirstLetter, SplitMode::Symmetric];

    pub fn as_str(self) -> &'static str {
        match self {
            SplitMode::FirstLetter => "first-letter",
            SplitMode::Symmetric => "symmetric",
        }
    }

    /// Human-readable statement of the normalization.
    pub fn normalization(self) -> &'static str {
        match self {
            SplitMode::FirstLetter => {
                "Z_n = X P_n + Y Q_n by first letter; P = (1/n) rn(P_n), Q = (1/n) rn(Q_n) with rn the right-nested bracketing"
            }
            SplitMode::Symmetric => {
                "average of the first-letter split and the last-letter split Z_n = P'_n X + Q'_n Y with P = -(1/n) ln(P'_n), Q = -(1/n) ln(Q'_n), ln the left-nested bracketing"
            }
        }
    }
}

impl fmt::Display for SplitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SplitMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<SplitMode> {
        match s {
            "first-letter" | "first" => Ok(SplitMode::FirstLetter),
            "symmetric" => Ok(SplitMode::Symmetric),
            _ => Err(Error::Config(format!("unknown split mode {s:?}"))),
        }
    }
}

/// The series `log(e^X e^Y)`.
pub fn bch_series(n: usize) -> LieSeries {
    assert!(n >= 1, "degree must be positive");
    let v = bch_of(&GradedSeries::x(n), &GradedSeries::y(n));
    LieSeries::new(v, LIE_TOL).expect("the BCH series is a Lie element")
}

/// `Z = Z_1 + [X, P] + [Y, Q]`.
#[derive(Clone, Debug)]
pub struct HalfHalf {
    pub mode: SplitMode,
    pub z1: GradedSeries,
    pub p: LieSeries,
    pub q: LieSeries,
    /// `l1` of `Z - Z_1 - [X,P] - [Y,Q]` per degree.
    pub residuals: Vec<f64>,
    /// `l1(P_{n-1}) + l1(Q_{n-1})` divided by `l1(Z_n)`, where nonzero.
    pub norm_ratios: Vec<Option<f64>>,
}

impl HalfHalf {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().cloned().fold(0.0, f64::max)
    }
}

fn split_first(z: &WordPoly) -> (WordPoly, WordPoly) {
    let n = z.degree();
    let mask = (1u32 << (n - 1)) - 1;
    let mut px = Vec::new();
    let mut py = Vec::new();
    for (w, c) in z.terms() {
        let tail = crate::free_algebra::Word::new(n - 1, w.code() & mask).expect("valid suffix");
        if w.code() >> (n - 1) == 0 {
            px.push((tail, c));
        } else {
            py.push((tail, c));
        }
    }
    (WordPoly::from_terms(n - 1, px), WordPoly::from_terms(n - 1, py))
}

fn split_last(z: &WordPoly) -> (WordPoly, WordPoly) {
    let n = z.degree();
    let mut px = Vec::new();
    let mut py = Vec::new();
    for (w, c) in z.terms() {
        let head = crate::free_algebra::Word::new(n - 1, w.code() >> 1).expect("valid prefix");
        if w.code() & 1 == 0 {
            px.push((head, c));
        } else {
            py.push((head, c));
        }
    }
    (WordPoly::from_terms(n - 1, px), WordPoly::from_terms(n - 1, py))
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Write a Lie element as its linear part plus brackets with the generators.
pub fn halfhalf_decompose(z: &GradedSeries, mode: SplitMode) -> Result<HalfHalf> {
    let report = is_lie(z, LIE_TOL);
    if let Some((grade, deviation)) = report.first_failure() {
        return Err(Error::NotLie { grade, deviation });
    }
    let n = z.truncation();
    let mut p = GradedSeries::zero(n);
    let mut q = GradedSeries::zero(n);
    for g in z.grades().skip(1) {
        if g.is_zero() {
            continue;
        }
        let d = g.degree();
        let inv = 1.0 / d as f64;
        let (px, py) = split_first(g);
        let mut pn = right_nested(&px).scaled(c(inv));
        let mut qn = right_nested(&py).scaled(c(inv));
        if mode == SplitMode::Symmetric {
            let (lx, ly) = split_last(g);
            let pl = left_nested(&lx).scaled(c(-inv));
            let ql = left_nested(&ly).scaled(c(-inv));
            pn = pn.add_scaled(&pl, c(1.0)).scaled(c(0.5));
            qn = qn.add_scaled(&ql, c(1.0)).scaled(c(0.5));
        }
        p.set_grade(pn);
        q.set_grade(qn);
    }
    let mut z1 = GradedSeries::zero(n);
    z1.set_grade(z.grade(1));
    let x = GradedSeries::x(n);
    let y = GradedSeries::y(n);
    let rebuilt = z1.add(&x.bracket(&p)).add(&y.bracket(&q));
    let residuals = rebuilt.grade_distances(z);
    let norm_ratios = (1..=n)
        .map(|d| {
            let zn = z.grade_norm(d);
            if d == 1 || zn == 0.0 {
                None
            } else {
                Some((p.grade_norm(d - 1) + q.grade_norm(d - 1)) / zn)
            }
        })
        .collect();
    let p = LieSeries::new(p, LIE_TOL)?;
    let q = LieSeries::new(q, LIE_TOL)?;
    Ok(HalfHalf {
        mode,
        z1,
        p,
        q,
        residuals,
        norm_ratios,
    })
}

/// `V(X,Y) = X + Y + [X, A] + [Y, B]`.
#[derive(Clone, Debug)]
pub struct KvEasy {
    pub mode: SplitMode,
    pub v: LieSeries,
    pub a: LieSeries,
    pub b: LieSeries,
    pub residuals: Vec<f64>,
}

pub fn kveasy_ab(n: usize, mode: SplitMode) -> Result<KvEasy> {
    if n < 2 {
        return Err(Error::Precondition(format!("degree {n} must be at least 2")));
    }
    let v = bch_series(n);
    let h = halfhalf_decompose(&v, mode)?;
    Ok(KvEasy {
        mode,
        v,
        a: h.p,
        b: h.q,
        residuals: h.residuals,
    })
}

/// Series `F`, `G` of the first Kashiwara-Vergne equation.
#[derive(Clone, Debug)]
pub struct FgSeries {
    pub mode: SplitMode,
    pub f: LieSeries,
    pub g: LieSeries,
}

/// `F = phi(ad_X) B(Y,X)` and `G = -psi(ad_Y) A(Y,X)` with
/// `phi(t) = t/(e^{-t}-1)`, `psi(t) = t/(e^t-1)`.
pub fn fg_series(ab: &KvEasy) -> Result<FgSeries> {
    let n = ab.v.truncation();
    let x = GradedSeries::x(n);
    let y = GradedSeries::y(n);
    let phi = AdOperatorSeries::phi(n);
    let psi = AdOperatorSeries::psi(n);
    let f = phi.apply(&x, &ab.b.swap_letters());
    let g = psi.apply(&y, &ab.a.swap_letters()).neg();
    Ok(FgSeries {
        mode: ab.mode,
        f: LieSeries::new(f, LIE_TOL)?,
        g: LieSeries::new(g, LIE_TOL)?,
    })
}

/// Per-degree `l1` residual of
/// `V(Y,X) - [X + Y - (1 - e^{-ad X}) F - (e^{ad Y} - 1) G]`.
pub fn kv1_residual(v: &GradedSeries, f: &GradedSeries, g: &GradedSeries) -> Vec<f64> {
    let n = v.truncation().min(f.truncation()).min(g.truncation());
    let x = GradedSeries::x(n);
    let y = GradedSeries::y(n);
    // 1 - e^{-t} and e^t - 1
    let one_minus = AdOperatorSeries::exp(-1.0, n).scaled(-1.0);
    let mut one_minus = one_minus;
    one_minus.coeffs[0] = 0.0;
    let mut e_minus_one = AdOperatorSeries::exp(1.0, n);
    e_minus_one.coeffs[0] = 0.0;
    let rhs = x.add(&y).sub(&one_minus.apply(&x, f)).sub(&e_minus_one.apply(&y, g));
    v.swap_letters().truncate(n).grade_distances(&rhs)
}

#[derive(Clone, Debug, Serialize)]
pub struct Kv1Report {
    pub mode: SplitMode,
    pub degree: usize,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
}

pub fn kv1_check(n: usize, mode: SplitMode) -> Result<(KvEasy, FgSeries, Kv1Report)> {
    let ab = kveasy_ab(n, mode)?;
    let fg = fg_series(&ab)?;
    let residuals = kv1_residual(&ab.v, &fg.f, &fg.g);
    let max_residual = residuals.iter().cloned().fold(0.0, f64::max);
    let report = Kv1Report {
        mode,
        degree: n,
        residuals,
        max_residual,
    };
    Ok((ab, fg, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(n: usize, text: &str) -> GradedSeries {
        GradedSeries::parse(n, text).unwrap()
    }

    #[test]
    fn low_grades_of_bch() {
        let v = bch_series(3);
        assert_eq!(v.grade(1), s(3, "X + Y").grade(1));
        let g2 = GradedSeries::homogeneous(v.grade(2), 3);
        assert!(g2.max_abs_diff(&s(3, "0.5XY - 0.5YX")) < 1e-15);
        let x = GradedSeries::x(3);
        let y = GradedSeries::y(3);
        let want = x
            .bracket(&x.bracket(&y))
            .add(&y.bracket(&y.bracket(&x)))
            .scaled_re(1.0 / 12.0);
        let g3 = GradedSeries::homogeneous(v.grade(3), 3);
        assert!(g3.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn halfhalf_of_generator_and_bracket() {
        let h = halfhalf_decompose(&GradedSeries::x(3), SplitMode::FirstLetter).unwrap();
        assert_eq!(h.z1, GradedSeries::x(3));
        assert!(h.p.is_zero() && h.q.is_zero());

        let z = s(3, "XY - YX");
        for mode in SplitMode::ALL {
            let h = halfhalf_decompose(&z, mode).unwrap();
            assert!(h.max_residual() < 1e-15);
            assert!(h.p.max_abs_diff(&s(3, "0.5Y")) < 1e-15);
            assert!(h.q.max_abs_diff(&s(3, "-0.5X")) < 1e-15);
        }
    }

    #[test]
    fn halfhalf_rejects_non_lie() {
        assert!(matches!(
            halfhalf_decompose(&s(3, "XY"), SplitMode::FirstLetter),
            Err(Error::NotLie { grade: 2, .. })
        ));
    }

    #[test]
    fn kveasy_grade_one() {
        for mode in SplitMode::ALL {
            let ab = kveasy_ab(6, mode).unwrap();
            assert!(ab.residuals.iter().all(|r| *r < 1e-12));
            let a1 = GradedSeries::homogeneous(ab.a.grade(1), 6);
            let b1 = GradedSeries::homogeneous(ab.b.grade(1), 6);
            assert!(a1.max_abs_diff(&s(6, "0.25Y")) < 1e-15);
            assert!(b1.max_abs_diff(&s(6, "-0.25X")) < 1e-15);
        }
    }

    #[test]
    fn kv1_holds_in_both_modes() {
        for mode in SplitMode::ALL {
            let (_, fg, rep) = kv1_check(7, mode).unwrap();
            assert!(rep.max_residual < 1e-12, "{mode}: {:?}", rep.residuals);
            assert_eq!(rep.residuals[0], 0.0);
            let f1 = GradedSeries::homogeneous(fg.f.grade(1), 7);
            let g1 = GradedSeries::homogeneous(fg.g.grade(1), 7);
            assert!(f1.max_abs_diff(&s(7, "0.25Y")) < 1e-15);
            assert!(g1.max_abs_diff(&s(7, "-0.25X")) < 1e-15);
        }
    }

    #[test]
    fn kv1_detects_corruption() {
        let (ab, fg, _) = kv1_check(5, SplitMode::FirstLetter).unwrap();
        // ad_X raises degree, so a degree-2 error in F shows up at degree 3
        let bad_f = fg.f.as_series().add(&s(5, "0.1XY - 0.1YX"));
        let r = kv1_residual(&ab.v, &bad_f, &fg.g);
        assert!(r[1] < 1e-12);
        assert!(r[2] >= 0.05);
    }

    #[test]
    fn split_mode_parsing() {
        assert_eq!("symmetric".parse::<SplitMode>().unwrap(), SplitMode::Symmetric);
        assert!("other".parse::<SplitMode>().is_err());
    }
}
