use super::MatrixElt;
use crate::error::Result;

#[derive(Clone, Debug)]
pub struct TrotterResult {
    pub product: MatrixElt,
    /// `||(e^{a/n} e^{b/n})^n - e^{a+b}||`.
    pub residual: f64,
}

/// `(e^{a/n} e^{b/n})^n` and its distance from `e^{a+b}`.
pub fn trotter_product(a: &MatrixElt, b: &MatrixElt, n: u64) -> Result<TrotterResult> {
    a.check_same_dim(b)?;
    let n = n.max(1);
    let inv = 1.0 / n as f64;
    let step = &a.scale_re(inv).exp()? * &b.scale_re(inv).exp()?;
    let product = step.pow(n);
    let exact = (a + b).exp()?;
    Ok(TrotterResult {
        residual: product.dist(&exact),
        product,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{random_gaussian, InstanceRng};
    use num_complex::Complex64;

    #[test]
    fn commuting_pair_is_exact() {
        let a = MatrixElt::diag(&[Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.0)]);
        let b = MatrixElt::diag(&[Complex64::new(0.5, 0.0), Complex64::new(0.0, 1.0)]);
        assert!(trotter_product(&a, &b, 1).unwrap().residual < 1e-12);
    }

    #[test]
    fn first_order_rate() {
        let mut rng = InstanceRng::new(8);
        let a = random_gaussian(4, &mut rng);
        let a = a.scale_re(1.0 / a.op_norm());
        let b = random_gaussian(4, &mut rng);
        let b = b.scale_re(1.0 / b.op_norm());
        let r: Vec<f64> = [10, 20, 40, 80]
            .iter()
            .map(|&n| trotter_product(&a, &b, n).unwrap().residual)
            .collect();
        for w in r.windows(2) {
            let ratio = w[1] / w[0];
            assert!((0.4..=0.6).contains(&ratio), "ratio {ratio}");
        }
        let r1 = trotter_product(&a, &b, 1).unwrap().residual;
        let r1024 = trotter_product(&a, &b, 1024).unwrap().residual;
        assert!(r1024 <= 1e-2 * r1);
    }
}
