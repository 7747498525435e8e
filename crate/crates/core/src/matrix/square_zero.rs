use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::MatrixElt;
use crate::error::{Error, Result};

/// Unitary normal form of a square-zero matrix: `x = W (B_1 + ... + B_r + 0) W^*`
/// with `B_i = [[0, s_i], [0, 0]]`.
#[derive(Clone, Debug)]
pub struct SquareZeroForm {
    pub w: MatrixElt,
    /// Descending, all positive.
    pub singulars: Vec<f64>,
    /// `W e_{2i}` spans the range side of block `i`.
    pub range_vectors: Vec<DVector<Complex64>>,
    /// `W e_{2i+1}` spans the co-kernel side of block `i`.
    pub corange_vectors: Vec<DVector<Complex64>>,
}

impl SquareZeroForm {
    pub fn rank(&self) -> usize {
        self.singulars.len()
    }

    pub fn dim(&self) -> usize {
        self.w.dim()
    }

    /// The block matrix `B_1 + ... + B_r + 0`.
    pub fn blocks(&self) -> MatrixElt {
        let mut b = MatrixElt::zeros(self.dim());
        for (i, s) in self.singulars.iter().enumerate() {
            b.set(2 * i, 2 * i + 1, Complex64::new(*s, 0.0));
        }
        b
    }

    pub fn reconstruct(&self) -> MatrixElt {
        &(&self.w * &self.blocks()) * &self.w.adjoint()
    }
}

/// Relative cutoff below which singular values are treated as zero.
pub const SINGULAR_CUTOFF: f64 = 1e-12;

pub fn square_zero_canonical(x: &MatrixElt) -> Result<SquareZeroForm> {
    if !x.is_finite() {
        return Err(Error::NonFinite);
    }
    let n = x.dim();
    let norm = x.op_norm();
    if norm == 0.0 {
        return Ok(SquareZeroForm {
            w: MatrixElt::identity(n),
            singulars: Vec::new(),
            range_vectors: Vec::new(),
            corange_vectors: Vec::new(),
        });
    }
    let sq = (x * x).op_norm();
    if sq > 1e-10 * norm * norm {
        return Err(Error::Precondition(format!(
            "not square-zero: ||x^2|| = {sq:e} vs ||x||^2 = {:e}",
            norm * norm
        )));
    }
    let svd = super::svd(x.as_dmatrix())?;
    let (u, v) = (&svd.u, &svd.v);
    let kept: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > SINGULAR_CUTOFF * norm)
        .collect();

    // x = sum s_k u_k v_k^*, so the block basis is (u_k, v_k)
    let mut basis: Vec<DVector<Complex64>> = Vec::with_capacity(n);
    let mut range_vectors = Vec::new();
    let mut corange_vectors = Vec::new();
    let mut singulars = Vec::new();
    for &k in &kept {
        let uk: DVector<Complex64> = u.column(k).into_owned();
        let vk: DVector<Complex64> = v.column(k).into_owned();
        let uk = orthonormalize(&uk, &basis)?;
        basis.push(uk.clone());
        let vk = orthonormalize(&vk, &basis)?;
        basis.push(vk.clone());
        range_vectors.push(uk);
        corange_vectors.push(vk);
        singulars.push(svd.singular_values[k]);
    }
    // complete with an orthonormal basis of the remaining space
    let mut p = DMatrix::<Complex64>::identity(n, n);
    for b in &basis {
        p -= b * b.adjoint();
    }
    let eig = SymmetricEigen::new(p);
    for (k, lambda) in eig.eigenvalues.iter().enumerate() {
        if *lambda > 0.5 {
            let e: DVector<Complex64> = eig.eigenvectors.column(k).into_owned();
            basis.push(orthonormalize(&e, &basis)?);
        }
    }
    if basis.len() != n {
        return Err(Error::Precondition(format!(
            "could not complete basis ({} of {n} vectors)",
            basis.len()
        )));
    }
    let w = MatrixElt::from_fn(n, |i, j| basis[j][i]);
    Ok(SquareZeroForm {
        w,
        singulars,
        range_vectors,
        corange_vectors,
    })
}

fn orthonormalize(v: &DVector<Complex64>, basis: &[DVector<Complex64>]) -> Result<DVector<Complex64>> {
    let mut w = v.clone();
    for _ in 0..2 {
        for b in basis {
            let c = b.dotc(&w);
            w -= b * c;
        }
    }
    let norm = w.norm();
    if norm < 1e-6 {
        return Err(Error::Precondition("degenerate block basis".into()));
    }
    Ok(w / Complex64::new(norm, 0.0))
}
