//! Initial densities built from Gaussian peaks.

use ndarray::{Array1, Array2, Array3};

use crate::chaos::GpcBasis;
use crate::config::Peak;
use crate::grid::{SpatialGrid, VelocityQuad};
use crate::imex::KineticState;

/// Normalization making a unit-amplitude peak of width 80 carry mass `pi`.
pub fn peak_scale() -> f64 {
    4.0 * (5.0 * std::f64::consts::PI).sqrt()
}

/// `rho_I(x, z)` summed over all peaks.
pub fn peak_density(peaks: &[Peak], x: f64, z: f64) -> f64 {
    let s = peak_scale();
    peaks
        .iter()
        .map(|p| {
            let c = p.center0 + p.center1 * z;
            (p.amp0 + p.amp1 * z) * s * (-p.width * (x - c).powi(2)).exp()
        })
        .sum()
}

/// Chaos coefficients `[n_cells, K]` of `rho_I`, projected with the basis quadrature.
pub fn initial_density_hat(peaks: &[Peak], basis: &GpcBasis, grid: &SpatialGrid) -> Array2<f64> {
    let mut out = Array2::zeros((grid.n_cells, basis.k));
    for (i, &x) in grid.centers.iter().enumerate() {
        let vals: Array1<f64> = basis.z_nodes.iter().map(|&z| peak_density(peaks, x, z)).collect();
        out.row_mut(i).assign(&basis.project(vals.view()));
    }
    out
}

/// Single realization `rho_I(., z)` as a one-mode array `[n_cells, 1]`.
pub fn initial_density_at(peaks: &[Peak], z: f64, grid: &SpatialGrid) -> Array2<f64> {
    Array2::from_shape_fn((grid.n_cells, 1), |(i, _)| peak_density(peaks, grid.centers[i], z))
}

/// Equilibrium start: `r = Fbar rho`, `j = 0`.
pub fn equilibrium_state(rho_hat: &Array2<f64>, vel: &VelocityQuad) -> KineticState {
    let (n, k) = rho_hat.dim();
    let fbar = vel.equilibrium();
    let r_hat = Array3::from_shape_fn((n, vel.n_v, k), |(i, _, m)| fbar * rho_hat[[i, m]]);
    KineticState {
        j_hat: Array3::zeros(r_hat.raw_dim()),
        r_hat,
        t: 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::half_velocity_quadrature;
    use std::f64::consts::PI;

    fn unit(center0: f64) -> Peak {
        Peak {
            amp0: 1.0,
            amp1: 0.0,
            width: 80.0,
            center0,
            center1: 0.0,
        }
    }

    #[test]
    fn unit_peak_mass_is_pi() {
        let g = SpatialGrid::new(1.0, 400).unwrap();
        let b = GpcBasis::with_order(2).unwrap();
        let rho = initial_density_hat(&[unit(0.0)], &b, &g);
        let mass: f64 = rho.column(0).sum() * g.dx;
        assert!((mass - PI).abs() < 1e-10, "{mass}");
        assert!(rho.column(1).iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn random_amplitude_std_mass() {
        let g = SpatialGrid::new(1.0, 400).unwrap();
        let b = GpcBasis::with_order(3).unwrap();
        let p = Peak { amp1: 0.5, ..unit(0.0) };
        let rho = initial_density_hat(&[p], &b, &g);
        let m1: f64 = rho.column(1).sum() * g.dx;
        // Phi_1 = sqrt(3) z, so the first mode carries amp1 pi / sqrt(3).
        assert!((m1 - 0.5 * PI / 3f64.sqrt()).abs() < 1e-10, "{m1}");
    }

    #[test]
    fn equilibrium_state_recovers_density() {
        let g = SpatialGrid::new(1.0, 50).unwrap();
        let v = half_velocity_quadrature(8, 1.0).unwrap();
        let rho = initial_density_at(&[unit(0.2)], 0.0, &g);
        let st = equilibrium_state(&rho, &v);
        let back = st.density(&v);
        for (a, b) in back.iter().zip(rho.iter()) {
            assert!((a - b).abs() < 1e-12 * b.abs().max(1.0));
        }
    }
}
