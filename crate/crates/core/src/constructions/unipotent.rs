use num_complex::Complex64;
use serde::Serialize;

use super::certificate::{Atom, ClaimedIdentity, Factor, FactorCertificate};
use crate::error::{Error, Result};
use crate::matrix::{square_zero_canonical, MatrixElt, SquareZeroForm};

/// Residual bound advertised by [`unipotent_factor`].
pub const UNIPOTENT_TOL: f64 = 1e-9;

/// `x` with positive `e`, `f` such that `f x = x e = x` and `e f = 0`.
#[derive(Clone, Debug, Serialize)]
pub struct N2cWitness {
    pub x: MatrixElt,
    /// Projection onto `(ker x)^perp`.
    pub e: MatrixElt,
    /// Projection onto `range x`.
    pub f: MatrixElt,
}

impl N2cWitness {
    /// `[||f x - x||, ||x e - x||, ||e f||]`.
    pub fn defects(&self) -> [f64; 3] {
        [
            (&self.f * &self.x).dist(&self.x),
            (&self.x * &self.e).dist(&self.x),
            (&self.e * &self.f).op_norm(),
        ]
    }

    pub fn check(&self, tol: f64) -> Result<()> {
        let scale = self.x.op_norm().max(1.0);
        let d = self.defects();
        if d.iter().any(|v| !(*v <= tol * scale)) {
            return Err(Error::Precondition(format!("witness defects {d:?} exceed {tol:e}")));
        }
        Ok(())
    }
}

fn projection(vectors: &[nalgebra::DVector<Complex64>], n: usize) -> MatrixElt {
    let mut p = nalgebra::DMatrix::<Complex64>::zeros(n, n);
    for v in vectors {
        p += v * v.adjoint();
    }
    MatrixElt::from_dmatrix(p).expect("finite projection")
}

pub(crate) fn witness_from_form(x: &MatrixElt, form: &SquareZeroForm) -> N2cWitness {
    let n = x.dim();
    N2cWitness {
        x: x.clone(),
        e: projection(&form.corange_vectors, n),
        f: projection(&form.range_vectors, n),
    }
}

pub fn n2c_witness(x: &MatrixElt) -> Result<N2cWitness> {
    let form = square_zero_canonical(x)?;
    let w = witness_from_form(x, &form);
    w.check(1e-12)?;
    Ok(w)
}

fn re(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

fn m2(a: f64, b: f64, c: f64, d: f64) -> [[Complex64; 2]; 2] {
    [[re(a), re(b)], [re(c), re(d)]]
}

/// `diag(g, 1/g) = ([[g^{1/2}, h], [0, g^{-1/2}]], [[g^{-1/2}, 0], [h, g^{1/2}]])`
/// with `1 + h^2 = g`, for `g >= 1`.
pub fn diagonal_pair(g: f64) -> ([[Complex64; 2]; 2], [[Complex64; 2]; 2]) {
    let r = g.sqrt();
    let h = (g - 1.0).max(0.0).sqrt();
    (m2(r, h, 0.0, 1.0 / r), m2(1.0 / r, 0.0, h, r))
}

/// `[[1, t], [0, 1]] = (diag(g, 1/g), [[1, f], [0, 1]])` with
/// `f = t^{1/2}`, `g = (1 + t^{1/2})^{1/2}`.
pub fn unipotent_pair(t: f64) -> (f64, f64) {
    let f = t.sqrt();
    let g = (1.0 + f).sqrt();
    (g, f)
}

/// 2x2 blocks of the two-level factorization of `[[1, t], [0, 1]]`.
struct BlockFactors {
    u_left: [[Complex64; 2]; 2],
    u_right: [[Complex64; 2]; 2],
    v_left: [[Complex64; 2]; 2],
    v_right: [[Complex64; 2]; 2],
}

fn block_factors(t: f64) -> BlockFactors {
    let (g, f) = unipotent_pair(t);
    let (u_left, u_right) = diagonal_pair(g);
    // [[1, f], [0, 1]] by the same identity one level down
    let (g2, f2) = unipotent_pair(f);
    BlockFactors {
        u_left,
        u_right,
        v_left: m2(g2, 0.0, 0.0, 1.0 / g2),
        v_right: m2(1.0, f2, 0.0, 1.0),
    }
}

fn embed(n: usize, blocks: &[[[Complex64; 2]; 2]]) -> MatrixElt {
    let mut m = MatrixElt::identity(n);
    for (i, b) in blocks.iter().enumerate() {
        for (r, row) in b.iter().enumerate() {
            for (c, z) in row.iter().enumerate() {
                m.set(2 * i + r, 2 * i + c, *z);
            }
        }
    }
    m
}

/// Write `1 + x` for square-zero `x` as a single commutator `(u, v)` whose
/// entries are themselves commutators.
pub fn unipotent_factor(x: &MatrixElt) -> Result<FactorCertificate> {
    let n = x.dim();
    let form = square_zero_canonical(x)?;
    let target = &MatrixElt::identity(n) + x;
    if form.rank() == 0 {
        return Ok(FactorCertificate::seal(
            "unipotent",
            target,
            Vec::new(),
            ClaimedIdentity::ProductEqualsTarget,
            UNIPOTENT_TOL,
        )?
        .with_meta("rank", 0));
    }
    let blocks: Vec<BlockFactors> = form.singulars.iter().map(|&s| block_factors(s)).collect();
    let pick = |sel: fn(&BlockFactors) -> [[Complex64; 2]; 2]| embed(n, &blocks.iter().map(sel).collect::<Vec<_>>());
    let u = Factor::commutator(Factor::matrix(pick(|b| b.u_left)), Factor::matrix(pick(|b| b.u_right)));
    let v = Factor::commutator(Factor::matrix(pick(|b| b.v_left)), Factor::matrix(pick(|b| b.v_right)));
    let atom = Atom::Conjugate {
        g: form.w.clone(),
        inner: Box::new(Atom::Commutator { u, v }),
    };
    Ok(FactorCertificate::seal(
        "unipotent",
        target,
        vec![atom],
        ClaimedIdentity::ProductEqualsTarget,
        UNIPOTENT_TOL,
    )?
    .with_meta("rank", form.rank())
    .with_meta("depth", 2)
    .with_meta(
        "singulars",
        form.singulars
            .iter()
            .map(|s| format!("{s:.17e}"))
            .collect::<Vec<_>>()
            .join(","),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::verifier::verify_certificate;
    use crate::matrix::{random_square_zero, InstanceRng};

    fn mat(b: [[Complex64; 2]; 2]) -> MatrixElt {
        MatrixElt::from_fn(2, |i, j| b[i][j])
    }

    #[test]
    fn displayed_identity_at_t_one() {
        let (g, f) = unipotent_pair(1.0);
        assert_eq!(f, 1.0);
        assert!((g - 2f64.sqrt()).abs() < 1e-15);
        let (a, b) = diagonal_pair(g);
        let h = (2f64.sqrt() - 1.0).sqrt();
        assert!((a[0][1].re - h).abs() < 1e-15);
        let d = mat(a).group_commutator(&mat(b)).unwrap();
        let want = MatrixElt::from_real_rows(&[&[g, 0.0], &[0.0, 1.0 / g]]);
        assert!(d.dist(&want) < 1e-10);
        let top = want
            .group_commutator(&MatrixElt::from_real_rows(&[&[1.0, f], &[0.0, 1.0]]))
            .unwrap();
        assert!(top.dist(&MatrixElt::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]])) < 1e-10);
    }

    #[test]
    fn two_by_two() {
        let x = MatrixElt::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let c = unipotent_factor(&x).unwrap();
        assert!(c.residual < 1e-10);
        assert!(verify_certificate(&c).pass);
        match &c.atoms[0] {
            Atom::Conjugate { inner, .. } => match inner.as_ref() {
                Atom::Commutator { u, v } => {
                    assert_eq!(u.depth(), 1);
                    assert_eq!(v.depth(), 1);
                }
                a => panic!("unexpected {a:?}"),
            },
            a => panic!("unexpected {a:?}"),
        }
    }

    #[test]
    fn zero_gives_empty_certificate() {
        let c = unipotent_factor(&MatrixElt::zeros(3)).unwrap();
        assert!(c.is_empty());
        assert_eq!(c.target, MatrixElt::identity(3));
    }

    #[test]
    fn random_six_by_six() {
        let mut rng = InstanceRng::new(11);
        for _ in 0..10 {
            let x = random_square_zero(6, 3.0, &mut rng).unwrap();
            let c = unipotent_factor(&x).unwrap();
            let r = verify_certificate(&c);
            assert!(r.pass, "{r:?}");
            assert!(r.residual <= 1e-9);
        }
    }

    #[test]
    fn rejects_non_square_zero() {
        assert!(unipotent_factor(&MatrixElt::identity(2)).is_err());
    }

    #[test]
    fn witness() {
        let t = 2.5;
        let x = MatrixElt::from_real_rows(&[&[0.0, t], &[0.0, 0.0]]);
        let w = n2c_witness(&x).unwrap();
        assert!(w.e.dist(&MatrixElt::unit(2, 1, 1)) < 1e-15);
        assert!(w.f.dist(&MatrixElt::unit(2, 0, 0)) < 1e-15);
        let w = n2c_witness(&MatrixElt::zeros(3)).unwrap();
        assert_eq!(w.e, MatrixElt::zeros(3));
        assert_eq!(w.f, MatrixElt::zeros(3));
        let mut rng = InstanceRng::new(5);
        for _ in 0..20 {
            let x = random_square_zero(5, 2.0, &mut rng).unwrap();
            let w = n2c_witness(&x).unwrap();
            assert!(w.defects().iter().all(|d| *d < 1e-12), "{:?}", w.defects());
        }
    }
}
