//! Projected Keller-Segel operator `d/dx (D Mt dP/dx - chi G P)` in flux form.

use nalgebra::DMatrix;
use ndarray::{Array2, Array3, ArrayView2, ArrayView3};

use crate::error::Result;
use crate::linalg::BlockTridiagonal;

/// Conservative finite-volume discretization with zero flux at the walls.
///
/// The interface flux between cells `i` and `i+1` is
/// `(D/dx) Mt (P_{i+1} - P_i) - (chi/2) (G_i P_i + G_{i+1} P_{i+1})`.
#[derive(Debug, Clone)]
pub struct MacroOperator {
    pub d: f64,
    pub chi: f64,
    pub m_tilde: Array2<f64>,
    pub dx: f64,
}

impl MacroOperator {
    pub fn new(d: f64, chi: f64, m_tilde: Array2<f64>, dx: f64) -> Self {
        Self { d, chi, m_tilde, dx }
    }

    fn k(&self) -> usize {
        self.m_tilde.nrows()
    }

    /// Interface fluxes, `n + 1` rows; the first and last are zero.
    pub fn fluxes(&self, p: ArrayView2<f64>, g: ArrayView3<f64>) -> Array2<f64> {
        let (n, k) = p.dim();
        let mut f = Array2::zeros((n + 1, k));
        let dd = self.d / self.dx;
        let hc = 0.5 * self.chi;
        for i in 0..n - 1 {
            for a in 0..k {
                let mut acc = 0.0;
                for b in 0..k {
                    acc += dd * self.m_tilde[[a, b]] * (p[[i + 1, b]] - p[[i, b]])
                        - hc * (g[[i, a, b]] * p[[i, b]] + g[[i + 1, a, b]] * p[[i + 1, b]]);
                }
                f[[i + 1, a]] = acc;
            }
        }
        f
    }

    pub fn apply(&self, p: ArrayView2<f64>, g: ArrayView3<f64>) -> Array2<f64> {
        let (n, k) = p.dim();
        let f = self.fluxes(p, g);
        let mut out = Array2::zeros((n, k));
        for i in 0..n {
            for a in 0..k {
                out[[i, a]] = (f[[i + 1, a]] - f[[i, a]]) / self.dx;
            }
        }
        out
    }

    /// Solves `P - s L_G(P) = rhs` with `s = dt * a_kk * mu`.
    pub fn implicit_solve(&self, rhs: ArrayView2<f64>, g: ArrayView3<f64>, s: f64) -> Result<Array2<f64>> {
        if s == 0.0 {
            return Ok(rhs.to_owned());
        }
        let (n, k) = rhs.dim();
        assert_eq!(k, self.k());
        let dd = self.d / self.dx;
        let hc = 0.5 * self.chi;
        let sx = s / self.dx;
        let mt = DMatrix::from_fn(k, k, |a, b| self.m_tilde[[a, b]]);
        let gm = |i: usize| DMatrix::from_fn(k, k, |a, b| g[[i, a, b]]);
        let eye = DMatrix::<f64>::identity(k, k);
        let mut sys = BlockTridiagonal {
            lower: Vec::with_capacity(n),
            diag: Vec::with_capacity(n),
            upper: Vec::with_capacity(n),
        };
        for i in 0..n {
            let gi = gm(i);
            let mut coef_i = DMatrix::zeros(k, k);
            if i + 1 < n {
                coef_i -= &mt * dd + &gi * hc;
                sys.upper.push((&mt * dd - gm(i + 1) * hc) * (-sx));
            } else {
                sys.upper.push(DMatrix::zeros(k, k));
            }
            if i > 0 {
                coef_i -= &mt * dd - &gi * hc;
                sys.lower.push((&mt * dd + gm(i - 1) * hc) * (-sx));
            } else {
                sys.lower.push(DMatrix::zeros(k, k));
            }
            sys.diag.push(&eye - coef_i * sx);
        }
        let flat: Vec<f64> = rhs.iter().copied().collect();
        let x = sys.solve(&flat, k)?;
        Ok(Array2::from_shape_vec((n, k), x).expect("shape matches"))
    }
}

/// Zero drift field for `n` cells and `k` modes.
pub fn zero_drift(n: usize, k: usize) -> Array3<f64> {
    Array3::zeros((n, k, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array3;

    fn operator(k: usize, dx: f64) -> MacroOperator {
        let mt = Array2::from_shape_fn((k, k), |(a, b)| if a == b { 1.2 } else { 0.1 });
        MacroOperator::new(1.0 / 3.0, 1.0 / 3.0, mt, dx)
    }

    fn drift(n: usize, k: usize) -> Array3<f64> {
        Array3::from_shape_fn((n, k, k), |(i, a, b)| {
            let s = ((i as f64) * 0.13).sin();
            if a == b { s } else { 0.2 * s * (a + b) as f64 / k as f64 }
        })
    }

    #[test]
    fn trivial_cases_return_rhs() {
        let n = 20;
        let k = 3;
        let op = operator(k, 0.1);
        let rhs = Array2::from_shape_fn((n, k), |(i, a)| (i * 3 + a) as f64 * 0.01);
        let g = drift(n, k);
        assert_eq!(op.implicit_solve(rhs.view(), g.view(), 0.0).unwrap(), rhs);
        // constants are in the kernel of the diffusion stencil
        let c = Array2::from_shape_fn((n, k), |(_, a)| 1.0 + a as f64);
        let p = op.implicit_solve(c.view(), zero_drift(n, k).view(), 0.37).unwrap();
        for (x, y) in p.iter().zip(c.iter()) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn solve_inverts_operator() {
        let n = 50;
        let k = 2;
        let op = operator(k, 0.04);
        let g = drift(n, k);
        let rhs = Array2::from_shape_fn((n, k), |(i, a)| ((i as f64) * 0.2 + a as f64).cos());
        let s = 3e-3;
        let p = op.implicit_solve(rhs.view(), g.view(), s).unwrap();
        let back = &p - &(op.apply(p.view(), g.view()) * s);
        for (x, y) in back.iter().zip(rhs.iter()) {
            assert!((x - y).abs() < 1e-12, "{x} {y}");
        }
    }

    #[test]
    fn operator_conserves_every_mode() {
        let n = 64;
        let k = 3;
        let op = operator(k, 0.03);
        let g = drift(n, k);
        let p = Array2::from_shape_fn((n, k), |(i, a)| ((i + a) as f64 * 0.3).sin() + 2.0);
        let l = op.apply(p.view(), g.view());
        for a in 0..k {
            let tot: f64 = l.column(a).sum();
            assert!(tot.abs() < 1e-11, "mode {a}: {tot}");
        }
    }

    #[test]
    fn pure_diffusion_second_difference() {
        let n = 10;
        let dx = 0.5;
        let op = MacroOperator::new(2.0, 0.0, Array2::eye(1), dx);
        let p = Array2::from_shape_fn((n, 1), |(i, _)| (i * i) as f64);
        let l = op.apply(p.view(), zero_drift(n, 1).view());
        // interior: D (P_{i+1} - 2P_i + P_{i-1}) / dx^2 = 2 * 2 / 0.25
        for i in 1..n - 1 {
            assert!((l[[i, 0]] - 16.0).abs() < 1e-12);
        }
    }
}
