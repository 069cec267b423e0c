//! Limiting Keller-Segel solver for the projected density and critical-mass analytics.

use ndarray::Array2;

use crate::chaos::{GpcBasis, RandomCoefficient, SpectralStatic};
use crate::chemo::ChemoSolver;
use crate::error::{Error, Result};
use crate::grid::{SpatialGrid, VelocityQuad};
use crate::imex::diffusion::MacroOperator;
use crate::imex::tableau::{ssp332, ButcherPair};
use crate::kernels::assemble_g_tilde;

/// `D = int_V v^2 Fbar dv` and `chi = (1/2) int_V v^2 dv` for the uniform equilibrium.
pub fn transport_coefficients(vel: &VelocityQuad) -> (f64, f64) {
    let fbar = vel.equilibrium();
    let d = vel.even_moment(|v| v * v * fbar);
    let chi = 0.5 * vel.even_moment(|v| v * v);
    (d, chi)
}

#[derive(Debug, Clone)]
pub struct CriticalMass {
    pub coeff: RandomCoefficient,
    pub d: f64,
    pub chi: f64,
    /// `E[M_c(z)]` for `z ~ U[-1, 1]`.
    pub mc_mean: f64,
}

impl CriticalMass {
    /// `M_c(z) = 2 pi D / (chi alpha(z))`.
    pub fn mc_of_z(&self, z: f64) -> f64 {
        2.0 * std::f64::consts::PI * self.d / (self.chi * self.coeff.eval(z))
    }
}

pub fn critical_mass(coeff: &RandomCoefficient, d: f64, chi: f64, basis: &GpcBasis) -> Result<CriticalMass> {
    if !(coeff.a0 - coeff.a1.abs() > 0.0) {
        return Err(Error::config(format!(
            "alpha = {} + {} z is not positive on [-1, 1]",
            coeff.a0, coeff.a1
        )));
    }
    if !(d > 0.0 && chi > 0.0) {
        return Err(Error::config("critical mass needs D > 0 and chi > 0"));
    }
    let mut cm = CriticalMass {
        coeff: *coeff,
        d,
        chi,
        mc_mean: 0.0,
    };
    cm.mc_mean = basis
        .z_nodes
        .iter()
        .zip(&basis.z_weights)
        .map(|(&z, &w)| w * cm.mc_of_z(z))
        .sum();
    Ok(cm)
}

/// Chaos coefficients of the limiting density.
#[derive(Debug, Clone, PartialEq)]
pub struct MacroState {
    /// `[n_cells, K]`.
    pub rho_hat: Array2<f64>,
    pub t: f64,
}

impl MacroState {
    pub fn is_finite(&self) -> bool {
        self.rho_hat.iter().all(|v| v.is_finite())
    }
}

/// Implicit RK solver for `d_t rho = d_x (D Mt d_x rho - chi G~ rho)` with no-flux walls.
#[derive(Debug, Clone)]
pub struct KsSolver {
    pub basis: GpcBasis,
    pub grid: SpatialGrid,
    pub op: MacroOperator,
    pub tableau: ButcherPair,
    chemo: ChemoSolver,
}

impl KsSolver {
    pub fn new(basis: GpcBasis, coeff: &RandomCoefficient, vel: &VelocityQuad, grid: SpatialGrid) -> Self {
        let (d, chi) = transport_coefficients(vel);
        Self::with_coefficients(basis, coeff, grid, d, chi)
    }

    pub fn with_coefficients(
        basis: GpcBasis,
        coeff: &RandomCoefficient,
        grid: SpatialGrid,
        d: f64,
        chi: f64,
    ) -> Self {
        let spectral = SpectralStatic::new(coeff, &basis);
        let op = MacroOperator::new(d, chi, spectral.m_tilde, grid.dx);
        Self {
            chemo: ChemoSolver::new(&grid),
            basis,
            grid,
            op,
            tableau: ssp332(),
        }
    }

    pub fn chemo_field(&self, rho_hat: &Array2<f64>) -> Result<crate::chemo::ChemoField> {
        self.chemo.solve(rho_hat.view())
    }

    fn drift(&self, rho: &Array2<f64>) -> Result<ndarray::Array3<f64>> {
        if self.op.chi == 0.0 {
            let (n, k) = rho.dim();
            return Ok(ndarray::Array3::zeros((n, k, k)));
        }
        let field = self.chemo.solve(rho.view())?;
        Ok(assemble_g_tilde(field.ds_hat.view(), &self.basis))
    }

    /// Stage `k` solves `P^k - dt a_kk L_{G^{k-1}}(P^k) = rho^n + dt sum_{l<k} a_kl L_{G^l}(P^l)`.
    pub fn step(&self, state: &MacroState, dt: f64) -> Result<MacroState> {
        let tab = &self.tableau;
        let mut g_prev = self.drift(&state.rho_hat)?;
        let mut ops: Vec<Array2<f64>> = Vec::with_capacity(tab.stages);
        for kk in 0..tab.stages {
            let mut rhs = state.rho_hat.clone();
            for (l, lp) in ops.iter().enumerate() {
                rhs.scaled_add(dt * tab.a_imp[kk][l], lp);
            }
            let p = self
                .op
                .implicit_solve(rhs.view(), g_prev.view(), dt * tab.a_imp[kk][kk])?;
            if !p.iter().all(|v| v.is_finite()) {
                return Err(Error::numerical(format!(
                    "non-finite limit stage at t = {} (stage {})",
                    state.t,
                    kk + 1
                )));
            }
            let g = self.drift(&p)?;
            ops.push(self.op.apply(p.view(), g.view()));
            g_prev = g;
        }
        let mut rho = state.rho_hat.clone();
        for (l, lp) in ops.iter().enumerate() {
            rho.scaled_add(dt * tab.b_imp[l], lp);
        }
        let out = MacroState {
            rho_hat: rho,
            t: state.t + dt,
        };
        if !out.is_finite() {
            return Err(Error::numerical(format!(
                "non-finite limit state at t = {}",
                out.t
            )));
        }
        Ok(out)
    }
}

/// Right side of the virial identity for one realization `z` with sensitivity `alpha`:
/// `-(D/alpha) x_max (rho(x_max) + rho(-x_max)) - (chi/2pi) M^2 (1 - M_c/M)`.
/// The wall values are taken from the two end cells.
pub fn second_moment_rate(rho: &[f64], alpha: f64, d: f64, chi: f64, grid: &SpatialGrid) -> f64 {
    let mass: f64 = rho.iter().sum::<f64>() * grid.dx;
    let n = rho.len();
    let walls = (d / alpha) * grid.x_max * (rho[0] + rho[n - 1]);
    let mc = 2.0 * std::f64::consts::PI * d / (chi * alpha);
    -walls - chi / (2.0 * std::f64::consts::PI) * (mass * mass - mc * mass)
}

/// Amplitude-ratio blow-up proxy: first time `max rho` exceeds `factor` times its start value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowUpMonitor {
    pub initial_max: f64,
    pub factor: f64,
    pub crossed_at: Option<f64>,
}

impl BlowUpMonitor {
    pub fn new(initial_max: f64, factor: f64) -> Self {
        Self {
            initial_max,
            factor,
            crossed_at: None,
        }
    }

    /// Records the crossing time; returns true once crossed.
    pub fn observe(&mut self, t: f64, current_max: f64) -> bool {
        if self.crossed_at.is_none() && current_max > self.factor * self.initial_max {
            self.crossed_at = Some(t);
        }
        self.crossed_at.is_some()
    }
}
