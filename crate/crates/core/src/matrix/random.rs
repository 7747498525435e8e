use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{MatrixElt, C0};
use crate::error::{Error, Result};

/// Seeded instance generator.
///
/// Independent substreams are obtained with [`InstanceRng::stream`], so a
/// batch of trials can be generated in any order or in parallel and still
/// reproduce bit for bit.
#[derive(Clone, Debug)]
pub struct InstanceRng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl InstanceRng {
    pub fn new(seed: u64) -> InstanceRng {
        InstanceRng::stream(seed, 0)
    }

    pub fn stream(seed: u64, stream: u64) -> InstanceRng {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        InstanceRng { seed, inner }
    }

    /// Substream derived from this generator's seed.
    pub fn split(&self, stream: u64) -> InstanceRng {
        InstanceRng::stream(self.seed, stream)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    pub fn complex_normal(&mut self) -> Complex64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Complex64::new(s * self.normal(), s * self.normal())
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.inner.random_range(lo..hi)
    }

    pub fn index(&mut self, lo: usize, hi_inclusive: usize) -> usize {
        self.inner.random_range(lo..=hi_inclusive)
    }
}

/// Matrix with independent standard complex Gaussian entries.
pub fn random_gaussian(dim: usize, rng: &mut InstanceRng) -> MatrixElt {
    MatrixElt::from_fn(dim, |_, _| rng.complex_normal())
}

/// Skew-adjoint matrix with operator norm exactly `radius`.
pub fn random_skew(dim: usize, radius: f64, rng: &mut InstanceRng) -> MatrixElt {
    let g = random_gaussian(dim, rng);
    let a = g.skew_part();
    if radius == 0.0 {
        return MatrixElt::zeros(dim);
    }
    let a = a.scale_re(radius / a.op_norm());
    // scaling breaks exact skewness only by rounding; restore it
    a.skew_part()
}

/// Matrix with operator norm drawn uniformly from `[1/2, 1]`.
pub fn random_contraction(dim: usize, rng: &mut InstanceRng) -> MatrixElt {
    let g = random_gaussian(dim, rng);
    let target = rng.uniform(0.5, 1.0);
    g.scale_re(target / g.op_norm())
}

/// Haar-distributed unitary from the QR factorization of a Gaussian matrix.
pub fn random_unitary(dim: usize, rng: &mut InstanceRng) -> MatrixElt {
    let g = random_gaussian(dim, rng).into_dmatrix();
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        if d != C0 {
            let phase = d / d.norm();
            for i in 0..dim {
                q[(i, j)] *= phase;
            }
        }
    }
    MatrixElt(q)
}

/// Square-zero matrix `u s v^*` with `range(u)` orthogonal to `range(v)`,
/// random rank between 1 and `dim/2` and operator norm exactly `radius`.
pub fn random_square_zero(dim: usize, radius: f64, rng: &mut InstanceRng) -> Result<MatrixElt> {
    if radius < 0.0 || !radius.is_finite() {
        return Err(Error::Precondition(format!(
            "radius {radius} must be finite and nonnegative"
        )));
    }
    if radius == 0.0 {
        return Ok(MatrixElt::zeros(dim.max(1)));
    }
    if dim < 2 {
        return Err(Error::Precondition(
            "square-zero matrices need dimension at least 2".into(),
        ));
    }
    let rank = rng.index(1, dim / 2);
    let w = random_unitary(dim, rng);
    let mut s: Vec<f64> = (0..rank).map(|_| rng.uniform(0.1, 1.0)).collect();
    s[0] = 1.0;
    let mut out = MatrixElt::zeros(dim);
    for (k, sk) in s.iter().enumerate() {
        let u = w.as_dmatrix().column(k);
        let v = w.as_dmatrix().column(rank + k);
        out.0 += (u * v.adjoint()) * Complex64::new(radius * sk, 0.0);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible() {
        let a = random_gaussian(3, &mut InstanceRng::stream(5, 2));
        let b = random_gaussian(3, &mut InstanceRng::stream(5, 2));
        let c = random_gaussian(3, &mut InstanceRng::stream(5, 3));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn skew_has_exact_radius() {
        let mut rng = InstanceRng::new(1);
        let a = random_skew(4, 0.3, &mut rng);
        assert_eq!(a.skew_defect(), 0.0);
        assert!((a.op_norm() - 0.3).abs() < 1e-14);
    }

    #[test]
    fn square_zero_generator() {
        let mut rng = InstanceRng::new(2);
        for dim in 2..7 {
            let a = random_square_zero(dim, 2.0, &mut rng).unwrap();
            assert!((&a * &a).op_norm() < 1e-14 * 4.0);
            assert!((a.op_norm() - 2.0).abs() < 1e-13);
        }
        assert!(random_square_zero(1, 1.0, &mut rng).is_err());
    }

    #[test]
    fn unitary_is_unitary() {
        let mut rng = InstanceRng::new(3);
        let u = random_unitary(5, &mut rng);
        assert!((&u.adjoint() * &u).dist(&MatrixElt::identity(5)) < 1e-14);
    }
}
