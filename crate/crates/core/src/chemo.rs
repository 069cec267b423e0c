//! Chemoattractant `s = -(1/pi) log|x| * rho`, mode by mode.

use ndarray::{Array2, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::grid::SpatialGrid;

#[derive(Debug, Clone)]
pub struct ChemoField {
    /// `[n_cells, K]` coefficients of `s`.
    pub s_hat: Array2<f64>,
    /// `[n_cells, K]` coefficients of `d s / dx`.
    pub ds_hat: Array2<f64>,
}

/// Antiderivative of `log|u|`.
fn log_antiderivative(u: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        u * u.abs().ln() - u
    }
}

/// Cell-integrated log kernel `kappa[d] = int_{cell j} log|x_i - y| dy` for `|i - j| = d`.
pub fn log_kernel_weights(grid: &SpatialGrid) -> Vec<f64> {
    let h = grid.dx;
    (0..grid.n_cells)
        .map(|d| {
            let c = d as f64 * h;
            log_antiderivative(c + 0.5 * h) - log_antiderivative(c - 0.5 * h)
        })
        .collect()
}

/// Reusable convolution operator for a fixed grid.
#[derive(Debug, Clone)]
pub struct ChemoSolver {
    weights: Vec<f64>,
    dx: f64,
}

impl ChemoSolver {
    pub fn new(grid: &SpatialGrid) -> Self {
        Self {
            weights: log_kernel_weights(grid),
            dx: grid.dx,
        }
    }

    pub fn solve(&self, rho_hat: ArrayView2<f64>) -> Result<ChemoField> {
        if rho_hat.iter().any(|v| !v.is_finite()) {
            return Err(Error::numerical("non-finite density passed to chemoattractant solve"));
        }
        let (n, k) = rho_hat.dim();
        let mut s_hat = Array2::zeros((n, k));
        let scale = -1.0 / std::f64::consts::PI;
        for mode in 0..k {
            let rho = rho_hat.index_axis(Axis(1), mode);
            if rho.iter().all(|&v| v == 0.0) {
                continue;
            }
            let rho: Vec<f64> = rho.to_vec();
            for i in 0..n {
                let mut acc = 0.0;
                for (j, &r) in rho.iter().enumerate() {
                    acc += self.weights[i.abs_diff(j)] * r;
                }
                s_hat[[i, mode]] = scale * acc;
            }
        }
        let ds_hat = centered_derivative(&s_hat, self.dx);
        Ok(ChemoField { s_hat, ds_hat })
    }
}

/// Centered differences in the interior, zero at the two wall cells.
pub fn centered_derivative(s_hat: &Array2<f64>, dx: f64) -> Array2<f64> {
    let (n, k) = s_hat.dim();
    let mut ds = Array2::zeros((n, k));
    for i in 1..n - 1 {
        for m in 0..k {
            ds[[i, m]] = (s_hat[[i + 1, m]] - s_hat[[i - 1, m]]) / (2.0 * dx);
        }
    }
    ds
}

pub fn solve_chemoattractant(rho_hat: ArrayView2<f64>, grid: &SpatialGrid) -> Result<ChemoField> {
    ChemoSolver::new(grid).solve(rho_hat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_spatial_grid;
    use ndarray::Array2;

    #[test]
    fn zero_density_zero_field() {
        let g = make_spatial_grid(1.0, 16).unwrap();
        let f = solve_chemoattractant(Array2::zeros((16, 3)).view(), &g).unwrap();
        assert!(f.s_hat.iter().all(|&v| v == 0.0));
        assert!(f.ds_hat.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn singular_cell_weight() {
        let g = make_spatial_grid(1.0, 10).unwrap();
        let w = log_kernel_weights(&g);
        let h = g.dx;
        assert!((w[0] - h * ((h / 2.0).ln() - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn point_mass_far_field() {
        // odd cell count puts a cell center at x = 0
        let g = make_spatial_grid(1.0, 401).unwrap();
        let mass = 2.0;
        let mut rho = Array2::zeros((401, 1));
        rho[[200, 0]] = mass / g.dx;
        let f = solve_chemoattractant(rho.view(), &g).unwrap();
        for i in [0usize, 50, 120, 170, 300, 380] {
            let x = g.centers[i];
            let expect = -(mass / std::f64::consts::PI) * x.abs().ln();
            let rel = (f.s_hat[[i, 0]] - expect).abs() / expect.abs();
            assert!(rel <= 1e-3, "x={x} rel={rel}");
        }
    }

    #[test]
    fn even_density_gives_odd_drift() {
        let g = make_spatial_grid(1.0, 200).unwrap();
        let rho = Array2::from_shape_fn((200, 2), |(i, m)| {
            (m as f64 + 1.0) * (-80.0 * g.centers[i].powi(2)).exp()
        });
        let f = solve_chemoattractant(rho.view(), &g).unwrap();
        for i in 0..200 {
            for m in 0..2 {
                assert!((f.s_hat[[i, m]] - f.s_hat[[199 - i, m]]).abs() <= 1e-12);
                assert!((f.ds_hat[[i, m]] + f.ds_hat[[199 - i, m]]).abs() <= 1e-12);
            }
        }
        // attraction toward the peak
        assert!(f.ds_hat[[110, 0]] < 0.0);
        assert!(f.ds_hat[[89, 0]] > 0.0);
    }

    #[test]
    fn linear_and_mode_decoupled() {
        let g = make_spatial_grid(1.0, 64).unwrap();
        let r1 = Array2::from_shape_fn((64, 3), |(i, m)| ((i * 7 + m * 3) % 11) as f64 * 0.1);
        let r2 = Array2::from_shape_fn((64, 3), |(i, m)| (g.centers[i] * (m + 1) as f64).sin());
        let f1 = solve_chemoattractant(r1.view(), &g).unwrap();
        let f2 = solve_chemoattractant(r2.view(), &g).unwrap();
        let comb = &r1 * 2.0 - &r2 * 0.5;
        let fc = solve_chemoattractant(comb.view(), &g).unwrap();
        let expect = &f1.s_hat * 2.0 - &f2.s_hat * 0.5;
        let scale = expect.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for (a, b) in fc.s_hat.iter().zip(expect.iter()) {
            assert!((a - b).abs() <= 1e-13 * scale);
        }
        // zeroing mode 1 of the input only changes mode 1 of the output
        let mut r3 = r1.clone();
        r3.column_mut(1).fill(0.0);
        let f3 = solve_chemoattractant(r3.view(), &g).unwrap();
        assert_eq!(f3.s_hat.column(0), f1.s_hat.column(0));
        assert_eq!(f3.s_hat.column(2), f1.s_hat.column(2));
        assert!(f3.s_hat.column(1).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn non_finite_input_rejected() {
        let g = make_spatial_grid(1.0, 8).unwrap();
        let mut rho = Array2::zeros((8, 1));
        rho[[3, 0]] = f64::NAN;
        assert!(matches!(
            solve_chemoattractant(rho.view(), &g),
            Err(Error::Numerical(_))
        ));
    }
}
