//! Orthonormal Legendre chaos in one uniform random variable `z ~ U[-1, 1]`.
//!
//! Everything here is expressed against the probability measure `dz / 2`, so
//! the stored z-weights sum to one and `<Phi_i Phi_j> = delta_ij`.

use ndarray::{Array1, Array2, Array3, ArrayView1};

use crate::error::{Error, Result};
use crate::grid::{gauss_legendre, legendre_with_derivative};

/// Default z-quadrature size for a basis with `k` modes.
pub fn default_z_nodes(k: usize) -> usize {
    2 * k + 8
}

#[derive(Debug, Clone)]
pub struct GpcBasis {
    pub order: usize,
    pub k: usize,
    pub z_nodes: Vec<f64>,
    /// Quadrature weights for the density `1/2` on `[-1, 1]`.
    pub z_weights: Vec<f64>,
    /// `eval[[k, j]] = Phi_k(z_j)`.
    pub eval: Array2<f64>,
    /// `triple[[k, i, j]] = <Phi_k Phi_i Phi_j>`.
    pub triple: Array3<f64>,
}

/// Normalized Legendre polynomial `sqrt(2k+1) P_k(z)`.
pub fn phi(k: usize, z: f64) -> f64 {
    let p = if z.abs() == 1.0 {
        z.powi(k as i32)
    } else {
        legendre_with_derivative(k, z).0
    };
    ((2 * k + 1) as f64).sqrt() * p
}

impl GpcBasis {
    pub fn new(order: usize, n_znodes: usize) -> Result<Self> {
        if n_znodes < order + 1 {
            return Err(Error::config(format!(
                "gPC order {order} needs at least {} z-nodes, got {n_znodes}",
                order + 1
            )));
        }
        let k = order + 1;
        let (z_nodes, mut z_weights) = gauss_legendre(n_znodes, -1.0, 1.0)?;
        z_weights.iter_mut().for_each(|w| *w *= 0.5);
        let eval = Array2::from_shape_fn((k, n_znodes), |(m, j)| phi(m, z_nodes[j]));
        let mut triple = Array3::zeros((k, k, k));
        for a in 0..k {
            for b in 0..k {
                for c in 0..k {
                    triple[[a, b, c]] = (0..n_znodes)
                        .map(|j| z_weights[j] * eval[[a, j]] * eval[[b, j]] * eval[[c, j]])
                        .sum();
                }
            }
        }
        Ok(Self {
            order,
            k,
            z_nodes,
            z_weights,
            eval,
            triple,
        })
    }

    /// Basis with the default quadrature size.
    pub fn with_order(order: usize) -> Result<Self> {
        Self::new(order, default_z_nodes(order + 1))
    }

    pub fn n_znodes(&self) -> usize {
        self.z_nodes.len()
    }

    /// `sum_k coeffs[k] Phi_k(z_j)` at every z-node.
    pub fn reconstruct(&self, coeffs: ArrayView1<f64>) -> Array1<f64> {
        debug_assert_eq!(coeffs.len(), self.k);
        coeffs.dot(&self.eval)
    }

    /// Galerkin quadrature projection of nodal values onto the `K` modes.
    pub fn project(&self, values: ArrayView1<f64>) -> Array1<f64> {
        assert_eq!(
            values.len(),
            self.n_znodes(),
            "nodal values must be given at every z-node"
        );
        let weighted = &values * &Array1::from(self.z_weights.clone());
        self.eval.dot(&weighted)
    }

    /// Orthonormality residual `max |<Phi_i Phi_j> - delta_ij|`.
    pub fn orthonormality_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.k {
            for j in 0..self.k {
                let ip: f64 = (0..self.n_znodes())
                    .map(|m| self.z_weights[m] * self.eval[[i, m]] * self.eval[[j, m]])
                    .sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((ip - target).abs());
            }
        }
        worst
    }
}

pub fn build_basis(order: usize, n_znodes: usize) -> Result<GpcBasis> {
    GpcBasis::new(order, n_znodes)
}

/// Affine random sensitivity `alpha(z) = a0 + a1 z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomCoefficient {
    pub a0: f64,
    pub a1: f64,
}

impl RandomCoefficient {
    pub fn new(a0: f64, a1: f64) -> Result<Self> {
        if !(a0 - a1.abs() > 0.0) {
            return Err(Error::config(format!(
                "alpha(z) = {a0} + {a1} z must stay positive on [-1, 1]"
            )));
        }
        Ok(Self { a0, a1 })
    }

    pub fn constant(a0: f64) -> Result<Self> {
        Self::new(a0, 0.0)
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.a0 + self.a1 * z
    }

    pub fn is_deterministic(&self) -> bool {
        self.a1 == 0.0
    }
}

/// `<w(z) Phi_i Phi_j>` by the basis quadrature.
pub fn assemble_weighted_matrix(weight: impl Fn(f64) -> f64, basis: &GpcBasis) -> Array2<f64> {
    let wz: Vec<f64> = basis
        .z_nodes
        .iter()
        .zip(&basis.z_weights)
        .map(|(&z, &w)| w * weight(z))
        .collect();
    let k = basis.k;
    let mut out = Array2::zeros((k, k));
    for i in 0..k {
        for j in i..k {
            let v: f64 = (0..basis.n_znodes())
                .map(|m| wz[m] * basis.eval[[i, m]] * basis.eval[[j, m]])
                .sum();
            out[[i, j]] = v;
            out[[j, i]] = v;
        }
    }
    out
}

pub fn project_function(values: ArrayView1<f64>, basis: &GpcBasis) -> Array1<f64> {
    basis.project(values)
}

/// Mean and standard deviation carried by a coefficient vector.
pub fn mean_std(coeffs: ArrayView1<f64>) -> (f64, f64) {
    let mean = coeffs[0];
    let var: f64 = coeffs.iter().skip(1).map(|c| c * c).sum();
    (mean, var.sqrt())
}

/// Static Galerkin matrices tied to the random sensitivity.
#[derive(Debug, Clone)]
pub struct SpectralStatic {
    /// `<alpha Phi_i Phi_j>`.
    pub m: Array2<f64>,
    /// `<Phi_i Phi_j / alpha>`.
    pub m_tilde: Array2<f64>,
    /// `<alpha Phi_k Phi_i Phi_j>`, used to turn projected sources into matrices.
    pub alpha_triple: Array3<f64>,
}

impl SpectralStatic {
    pub fn new(coeff: &RandomCoefficient, basis: &GpcBasis) -> Self {
        let m = assemble_weighted_matrix(|z| coeff.eval(z), basis);
        let m_tilde = assemble_weighted_matrix(|z| 1.0 / coeff.eval(z), basis);
        let k = basis.k;
        let n = basis.n_znodes();
        let wa: Vec<f64> = (0..n)
            .map(|j| basis.z_weights[j] * coeff.eval(basis.z_nodes[j]))
            .collect();
        let e = &basis.eval;
        let alpha_triple = Array3::from_shape_fn((k, k, k), |(a, b, c)| {
            (0..n).map(|j| wa[j] * e[[a, j]] * e[[b, j]] * e[[c, j]]).sum()
        });
        Self {
            m,
            m_tilde,
            alpha_triple,
        }
    }
}

/// Contract a coefficient vector against a triple tensor: `sum_k c_k T[k, i, j]`.
pub fn galerkin_matrix(coeffs: ArrayView1<f64>, triple: &Array3<f64>, out: &mut [f64]) {
    let k = coeffs.len();
    debug_assert_eq!(out.len(), k * k);
    out.iter_mut().for_each(|x| *x = 0.0);
    for (a, &c) in coeffs.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        for i in 0..k {
            for j in 0..k {
                out[i * k + j] += c * triple[[a, i, j]];
            }
        }
    }
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(mat: &Array2<f64>) -> f64 {
    let k = mat.nrows();
    let m = nalgebra::DMatrix::from_fn(k, k, |i, j| mat[[i, j]]);
    m.symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}
