use serde::Serialize;

use super::ddseries::{substitute, DdSolution};
use super::hiprec::DdMatrix;
use super::solve::KvSolution;
use crate::bch::KvEasy;
use crate::error::{Error, Result};
use crate::free_algebra::{evaluate, GradedSeries};
use crate::matrix::{mat_log, MatrixElt};

/// Default bound on `||X||`, `||Y||` for evaluating the flow series.
pub const DEFAULT_EVAL_RADIUS: f64 = 0.05;

/// `R`, `S` evaluated on a pair of matrices.
#[derive(Clone, Debug)]
pub struct RsMatrices {
    pub r: MatrixElt,
    pub s: MatrixElt,
}

pub fn evaluate_rs(sol: &KvSolution, xm: &MatrixElt, ym: &MatrixElt) -> Result<RsMatrices> {
    Ok(RsMatrices {
        r: evaluate(&sol.r, xm, ym)?,
        s: evaluate(&sol.s, xm, ym)?,
    })
}

/// `||e^{x+y} - e^R e^x e^{-R} e^S e^y e^{-S}||`.
pub fn factorization_residual(r: &MatrixElt, s: &MatrixElt, xm: &MatrixElt, ym: &MatrixElt) -> Result<f64> {
    let lhs = (xm + ym).exp()?;
    let rhs = &(&(&(&(&r.exp()? * &xm.exp()?) * &(-r).exp()?) * &s.exp()?) * &ym.exp()?) * &(-s).exp()?;
    Ok(lhs.dist(&rhs))
}

fn check_radius(xm: &MatrixElt, ym: &MatrixElt, eval_radius: f64) -> Result<()> {
    xm.check_same_dim(ym)?;
    let (nx, ny) = (xm.op_norm(), ym.op_norm());
    if nx > eval_radius * (1.0 + 1e-12) || ny > eval_radius * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!(
            "inputs of norm {nx:.3e}, {ny:.3e} exceed the evaluation radius {eval_radius}"
        )));
    }
    Ok(())
}

/// Residual of the conjugated-exponential factorization of `e^{x+y}`.
pub fn verify_factorization(sol: &KvSolution, xm: &MatrixElt, ym: &MatrixElt, eval_radius: f64) -> Result<f64> {
    check_radius(xm, ym, eval_radius)?;
    let rs = evaluate_rs(sol, xm, ym)?;
    factorization_residual(&rs.r, &rs.s, xm, ym)
}

/// Same residual computed entirely in double-double arithmetic.
pub fn verify_factorization_dd(sol: &DdSolution, xm: &MatrixElt, ym: &MatrixElt) -> Result<f64> {
    xm.check_same_dim(ym)?;
    let x = DdMatrix::from_matrix(xm);
    let y = DdMatrix::from_matrix(ym);
    let r = substitute(&sol.r, &x, &y);
    let s = substitute(&sol.s, &x, &y);
    let lhs = x.add(&y).exp();
    let rhs = r
        .exp()
        .mul(&x.exp())
        .mul(&r.neg().exp())
        .mul(&s.exp())
        .mul(&y.exp())
        .mul(&s.neg().exp());
    Ok(lhs.sub(&rhs).to_matrix().op_norm())
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub radii: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Least-squares slope of `log residual` against `log radius`.
    pub slope: f64,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.max(f64::MIN_POSITIVE).ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let var: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    cov / var
}

/// Factorization residual along `X = rho xdir`, `Y = rho ydir` for each
/// radius `rho`, in double-double arithmetic.
pub fn radius_sweep(sol: &DdSolution, xdir: &MatrixElt, ydir: &MatrixElt, radii: &[f64]) -> Result<SweepReport> {
    let xn = xdir.op_norm();
    let yn = ydir.op_norm();
    if xn == 0.0 && yn == 0.0 {
        return Err(Error::Precondition("sweep directions are both zero".into()));
    }
    let residuals = radii
        .iter()
        .map(|&rho| {
            let xm = xdir.scale_re(rho / xn.max(f64::MIN_POSITIVE));
            let ym = ydir.scale_re(rho / yn.max(f64::MIN_POSITIVE));
            verify_factorization_dd(sol, &xm, &ym)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(SweepReport {
        slope: loglog_slope(radii, &residuals),
        radii: radii.to_vec(),
        residuals,
    })
}

/// `||e^x e^y - e^{x + y + [x, a] + [y, b]}||`.
pub fn kveasy_residual(ab: &KvEasy, xm: &MatrixElt, ym: &MatrixElt) -> Result<f64> {
    xm.check_same_dim(ym)?;
    let a = evaluate(&ab.a, xm, ym)?;
    let b = evaluate(&ab.b, xm, ym)?;
    let exponent = &(&(xm + ym) + &xm.commutator(&a)) + &ym.commutator(&b);
    Ok((&xm.exp()? * &ym.exp()?).dist(&exponent.exp()?))
}

/// `||V(x, y) - log(e^x e^y)||`.
pub fn bch_residual(v: &GradedSeries, xm: &MatrixElt, ym: &MatrixElt) -> Result<f64> {
    xm.check_same_dim(ym)?;
    let series = evaluate(v, xm, ym)?;
    let exact = mat_log(&(&xm.exp()? * &ym.exp()?))?;
    Ok(series.dist(&exact))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bch::SplitMode;
    use crate::kv::{solve_rs, solve_rs_dd};
    use crate::matrix::{random_skew, InstanceRng};

    #[test]
    fn zero_inputs_give_zero_residual() {
        let sol = solve_rs(3, SplitMode::FirstLetter).unwrap();
        let z = MatrixElt::zeros(3);
        assert_eq!(verify_factorization(&sol, &z, &z, 0.05).unwrap(), 0.0);
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [1.0, 0.5, 0.25];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powi(5)).collect();
        assert!((loglog_slope(&xs, &ys) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn radius_precondition() {
        let sol = solve_rs(3, SplitMode::FirstLetter).unwrap();
        let big = MatrixElt::identity(2);
        assert!(verify_factorization(&sol, &big, &big, 0.05).is_err());
    }

    #[test]
    fn factorization_at_degree_eight() {
        let sol = solve_rs(8, SplitMode::FirstLetter).unwrap();
        let mut rng = InstanceRng::new(21);
        for _ in 0..5 {
            let x = random_skew(4, 0.02, &mut rng);
            let y = random_skew(4, 0.02, &mut rng);
            assert!(verify_factorization(&sol, &x, &y, 0.05).unwrap() < 1e-9);
        }
    }

    #[test]
    fn residual_decays_with_truncation_order() {
        let dd = solve_rs_dd(5, SplitMode::Symmetric).unwrap();
        let mut rng = InstanceRng::new(22);
        let x = random_skew(3, 1.0, &mut rng);
        let y = random_skew(3, 1.0, &mut rng);
        let sweep = radius_sweep(&dd, &x, &y, &[0.04, 0.02, 0.01]).unwrap();
        // the first omitted grade is 6
        assert!(sweep.slope > 5.5, "{}", sweep.slope);
    }

    #[test]
    fn kveasy_and_bch_residuals() {
        let mut rng = InstanceRng::new(23);
        let x = random_skew(3, 0.04, &mut rng);
        let y = random_skew(3, 0.04, &mut rng);
        let ab = crate::bch::kveasy_ab(8, SplitMode::FirstLetter).unwrap();
        assert!(kveasy_residual(&ab, &x, &y).unwrap() < 1e-9);
        let v = crate::bch::bch_series(10);
        assert!(bch_residual(&v, &x.scale_re(5.0), &y.scale_re(5.0)).unwrap() < 1e-8);
    }
}
