//! Small dense solves (K x K blocks) and block-tridiagonal elimination.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Factorization of one small square block.
#[derive(Debug, Clone)]
pub enum SmallFactor {
    Cholesky(nalgebra::linalg::Cholesky<f64, nalgebra::Dyn>),
    Lu(nalgebra::linalg::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl SmallFactor {
    /// Cholesky when the block is SPD, partial-pivot LU otherwise.
    pub fn new(mat: DMatrix<f64>) -> Result<Self> {
        if let Some(ch) = mat.clone().cholesky() {
            return Ok(SmallFactor::Cholesky(ch));
        }
        Self::lu(mat)
    }

    pub fn lu(mat: DMatrix<f64>) -> Result<Self> {
        let lu = mat.lu();
        if !lu.is_invertible() {
            return Err(Error::numerical("singular block in linear solve"));
        }
        Ok(SmallFactor::Lu(lu))
    }

    pub fn solve_slice(&self, rhs: &mut [f64]) -> Result<()> {
        let b = DVector::from_column_slice(rhs);
        let x = match self {
            SmallFactor::Cholesky(ch) => Some(ch.solve(&b)),
            SmallFactor::Lu(lu) => lu.solve(&b),
        }
        .ok_or_else(|| Error::numerical("singular block in linear solve"))?;
        rhs.copy_from_slice(x.as_slice());
        Ok(())
    }

    pub fn solve_matrix(&self, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        match self {
            SmallFactor::Cholesky(ch) => Some(ch.solve(rhs)),
            SmallFactor::Lu(lu) => lu.solve(rhs),
        }
        .ok_or_else(|| Error::numerical("singular block in linear solve"))
    }
}

/// Block-tridiagonal system with `n` rows of `k x k` blocks:
/// `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`.
/// `lower[0]` and `upper[n-1]` are ignored.
#[derive(Debug, Clone)]
pub struct BlockTridiagonal {
    pub lower: Vec<DMatrix<f64>>,
    pub diag: Vec<DMatrix<f64>>,
    pub upper: Vec<DMatrix<f64>>,
}

impl BlockTridiagonal {
    /// Block Thomas elimination; `rhs` is `n * k` values, row-major by block.
    pub fn solve(&self, rhs: &[f64], k: usize) -> Result<Vec<f64>> {
        let n = self.diag.len();
        assert_eq!(rhs.len(), n * k);
        let mut c_prime: Vec<DMatrix<f64>> = Vec::with_capacity(n);
        let mut d_prime: Vec<DVector<f64>> = Vec::with_capacity(n);
        for i in 0..n {
            let r = DVector::from_column_slice(&rhs[i * k..(i + 1) * k]);
            let (den, r) = if i == 0 {
                (self.diag[0].clone(), r)
            } else {
                (
                    &self.diag[i] - &self.lower[i] * &c_prime[i - 1],
                    r - &self.lower[i] * &d_prime[i - 1],
                )
            };
            let f = SmallFactor::lu(den)
                .map_err(|_| Error::numerical(format!("block-tridiagonal pivot {i} is singular")))?;
            let cp = if i + 1 < n {
                f.solve_matrix(&self.upper[i])?
            } else {
                DMatrix::zeros(k, k)
            };
            let mut dp = r.as_slice().to_vec();
            f.solve_slice(&mut dp)?;
            c_prime.push(cp);
            d_prime.push(DVector::from_vec(dp));
        }
        let mut x = vec![0.0; n * k];
        let mut next = d_prime[n - 1].clone();
        x[(n - 1) * k..].copy_from_slice(next.as_slice());
        for i in (0..n - 1).rev() {
            let xi = &d_prime[i] - &c_prime[i] * &next;
            x[i * k..(i + 1) * k].copy_from_slice(xi.as_slice());
            next = xi;
        }
        Ok(x)
    }

    /// `A x` for checking residuals.
    pub fn apply(&self, x: &[f64], k: usize) -> Vec<f64> {
        let n = self.diag.len();
        let block = |i: usize| DVector::from_column_slice(&x[i * k..(i + 1) * k]);
        let mut out = vec![0.0; n * k];
        for i in 0..n {
            let mut y = &self.diag[i] * block(i);
            if i > 0 {
                y += &self.lower[i] * block(i - 1);
            }
            if i + 1 < n {
                y += &self.upper[i] * block(i + 1);
            }
            out[i * k..(i + 1) * k].copy_from_slice(y.as_slice());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thomas_matches_residual() {
        let n = 12;
        let k = 3;
        let m = |s: f64| DMatrix::from_fn(k, k, |i, j| ((i * 3 + j) as f64 * s).sin() * 0.2);
        let sys = BlockTridiagonal {
            lower: (0..n).map(|i| m(0.3 + i as f64)).collect(),
            diag: (0..n)
                .map(|i| DMatrix::identity(k, k) * 3.0 + m(1.7 * i as f64))
                .collect(),
            upper: (0..n).map(|i| m(2.1 - i as f64)).collect(),
        };
        let rhs: Vec<f64> = (0..n * k).map(|i| (i as f64 * 0.37).cos()).collect();
        let x = sys.solve(&rhs, k).unwrap();
        let back = sys.apply(&x, k);
        for (a, b) in back.iter().zip(&rhs) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn singular_block_reports_numerical_error() {
        let k = 2;
        let sys = BlockTridiagonal {
            lower: vec![DMatrix::zeros(k, k); 2],
            diag: vec![DMatrix::zeros(k, k); 2],
            upper: vec![DMatrix::zeros(k, k); 2],
        };
        assert!(matches!(sys.solve(&[1.0; 4], k), Err(Error::Numerical(_))));
    }

    #[test]
    fn small_factor_prefers_cholesky_for_spd() {
        let a = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let f = SmallFactor::new(a.clone()).unwrap();
        assert!(matches!(f, SmallFactor::Cholesky(_)));
        let mut b = [1.0, 2.0];
        f.solve_slice(&mut b).unwrap();
        let r = &a * DVector::from_column_slice(&b);
        assert!((r[0] - 1.0).abs() < 1e-15 && (r[1] - 2.0).abs() < 1e-15);
        let ns = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(matches!(SmallFactor::new(ns).unwrap(), SmallFactor::Lu(_)));
    }
}
