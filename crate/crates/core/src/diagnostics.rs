//! Scalar time series and field statistics.

use ndarray::{Array1, ArrayView2};

use crate::chaos::mean_std;
use crate::grid::SpatialGrid;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarRow {
    pub t: f64,
    pub total_mass: f64,
    pub linf_mean_rho: f64,
    /// `max_i std(rho_i)`.
    pub std_linf: f64,
    /// `sum_i (x_i^2 / 2) E[rho_i] dx`.
    pub second_moment: f64,
}

pub const SCALAR_HEADER: [&str; 5] = ["t", "total_mass", "linf_mean_rho", "std_linf", "second_moment"];

impl ScalarRow {
    pub fn values(&self) -> [f64; 5] {
        [
            self.t,
            self.total_mass,
            self.linf_mean_rho,
            self.std_linf,
            self.second_moment,
        ]
    }

    pub fn from_fields(t: f64, mean: &[f64], std: &[f64], grid: &SpatialGrid) -> Self {
        let dx = grid.dx;
        Self {
            t,
            total_mass: mean.iter().sum::<f64>() * dx,
            linf_mean_rho: mean.iter().fold(0.0, |m, v| m.max(v.abs())),
            std_linf: std.iter().fold(0.0, |m: f64, v| m.max(*v)),
            second_moment: mean
                .iter()
                .zip(&grid.centers)
                .map(|(r, x)| 0.5 * x * x * r)
                .sum::<f64>()
                * dx,
        }
    }
}

/// Pointwise mean and standard deviation from chaos coefficients `[n, K]`.
pub fn mean_std_fields(rho_hat: ArrayView2<f64>) -> (Array1<f64>, Array1<f64>) {
    let n = rho_hat.nrows();
    let mut mean = Array1::zeros(n);
    let mut std = Array1::zeros(n);
    for (i, row) in rho_hat.rows().into_iter().enumerate() {
        let (m, s) = mean_std(row);
        mean[i] = m;
        std[i] = s;
    }
    (mean, std)
}

pub fn scalar_row(t: f64, rho_hat: ArrayView2<f64>, grid: &SpatialGrid) -> ScalarRow {
    let (mean, std) = mean_std_fields(rho_hat);
    ScalarRow::from_fields(
        t,
        mean.as_slice().expect("contiguous"),
        std.as_slice().expect("contiguous"),
        grid,
    )
}

/// Field snapshot in physical space, ready for CSV output.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSnapshot {
    pub t: f64,
    pub x: Vec<f64>,
    pub mean_rho: Vec<f64>,
    pub std_rho: Vec<f64>,
    /// `modes[m][i]`: chaos coefficient `m` at cell `i`.
    pub modes: Vec<Vec<f64>>,
    pub mean_s: Vec<f64>,
}
