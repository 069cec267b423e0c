//! One penalized IMEX-RK step of the projected parity system.

use nalgebra::DMatrix;
use ndarray::{s, Array2, Array3, ArrayView3, Axis};

use crate::chaos::{GpcBasis, RandomCoefficient, SpectralStatic};
use crate::chemo::{ChemoField, ChemoSolver};
use crate::error::{Error, Result};
use crate::grid::{SpatialGrid, VelocityQuad};
use crate::imex::diffusion::MacroOperator;
use crate::imex::penalty::{penalties, PenaltySettings};
use crate::imex::tableau::{ssp332, ButcherPair};
use crate::imex::transport::{centered_even, transport_block};
use crate::kernels::{assemble_g_tilde, assemble_kernel_matrices, KernelContext, ModelKind};
use crate::limit::transport_coefficients;
use crate::linalg::SmallFactor;

/// Chaos coefficients of the even and odd parities on the `(x, v+, mode)` lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct KineticState {
    /// `[n_cells, n_v, K]`.
    pub r_hat: Array3<f64>,
    /// `[n_cells, n_v, K]`.
    pub j_hat: Array3<f64>,
    pub t: f64,
}

impl KineticState {
    pub fn zeros(n_cells: usize, n_v: usize, k: usize) -> Self {
        Self {
            r_hat: Array3::zeros((n_cells, n_v, k)),
            j_hat: Array3::zeros((n_cells, n_v, k)),
            t: 0.0,
        }
    }

    /// `rho_hat = 2 sum_q w_q r_hat(., v_q, .)`, shape `[n_cells, K]`.
    pub fn density(&self, vel: &VelocityQuad) -> Array2<f64> {
        moment(self.r_hat.view(), vel)
    }

    pub fn is_finite(&self) -> bool {
        self.r_hat.iter().chain(self.j_hat.iter()).all(|v| v.is_finite())
    }
}

pub(crate) fn moment(r: ArrayView3<f64>, vel: &VelocityQuad) -> Array2<f64> {
    let (n, nv, k) = r.dim();
    let mut rho = Array2::zeros((n, k));
    for i in 0..n {
        for q in 0..nv {
            let w = 2.0 * vel.weights[q];
            for m in 0..k {
                rho[[i, m]] += w * r[[i, q, m]];
            }
        }
    }
    rho
}

/// Everything needed to advance a kinetic state; immutable and shareable.
#[derive(Debug, Clone)]
pub struct KineticSolver {
    pub model: ModelKind,
    pub eps: f64,
    pub penalty: PenaltySettings,
    pub tableau: ButcherPair,
    pub basis: GpcBasis,
    pub spectral: SpectralStatic,
    pub vel: VelocityQuad,
    pub grid: SpatialGrid,
    pub macro_op: MacroOperator,
    chemo: ChemoSolver,
}

/// Stage quantities kept for the history sums.
struct Stage {
    f1r: Array3<f64>,
    f1j: Array3<f64>,
    f2r: Array3<f64>,
    f2j: Array3<f64>,
}

impl KineticSolver {
    pub fn new(
        model: ModelKind,
        eps: f64,
        basis: GpcBasis,
        coeff: &RandomCoefficient,
        vel: VelocityQuad,
        grid: SpatialGrid,
    ) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::config(format!(
                "kinetic models need eps > 0, got {eps}"
            )));
        }
        let spectral = SpectralStatic::new(coeff, &basis);
        let (d, chi) = transport_coefficients(&vel);
        let macro_op = MacroOperator::new(d, chi, spectral.m_tilde.clone(), grid.dx);
        Ok(Self {
            model,
            eps,
            penalty: penalties(eps, grid.dx),
            tableau: ssp332(),
            chemo: ChemoSolver::new(&grid),
            basis,
            spectral,
            vel,
            grid,
            macro_op,
        })
    }

    pub fn k(&self) -> usize {
        self.basis.k
    }

    pub fn zero_state(&self) -> KineticState {
        KineticState::zeros(self.grid.n_cells, self.vel.n_v, self.k())
    }

    pub fn chemo_field(&self, rho_hat: &Array2<f64>) -> Result<ChemoField> {
        self.chemo.solve(rho_hat.view())
    }

    fn kernel_ctx(&self) -> KernelContext<'_> {
        KernelContext {
            model: self.model,
            basis: &self.basis,
            spectral: &self.spectral,
            vel: &self.vel,
            grid: &self.grid,
            eps: self.eps,
        }
    }

    /// Advances `state` by `dt`.
    pub fn step(&self, state: &KineticState, dt: f64) -> Result<KineticState> {
        let (n, nv, k) = state.r_hat.dim();
        let tab = &self.tableau;
        let eps2 = self.eps * self.eps;
        let fbar = self.vel.equilibrium();
        let mu = self.penalty.mu;
        let phi = self.penalty.phi;
        let dx = self.grid.dx;
        let m = DMatrix::from_fn(k, k, |a, b| self.spectral.m[[a, b]]);

        let rho_n = state.density(&self.vel);
        let mut g_prev = assemble_g_tilde(self.chemo.solve(rho_n.view())?.ds_hat.view(), &self.basis);
        let mut stages: Vec<Stage> = Vec::with_capacity(tab.stages);

        for kk in 0..tab.stages {
            let mut rbar = state.r_hat.clone();
            let mut jbar = state.j_hat.clone();
            for (l, st) in stages.iter().enumerate() {
                let (ae, ai) = (tab.a_exp[kk][l], tab.a_imp[kk][l]);
                rbar.scaled_add(dt * ae, &st.f1r);
                rbar.scaled_add(dt * ai, &st.f2r);
                jbar.scaled_add(dt * ae, &st.f1j);
                jbar.scaled_add(dt * ai, &st.f2j);
            }
            let akk = tab.a_imp[kk][kk];
            let adt = akk * dt;
            let h = adt / eps2;

            // moment first: the stage density solves the penalized diffusion problem
            let rho_bar = moment(rbar.view(), &self.vel);
            let p = self.macro_op.implicit_solve(rho_bar.view(), g_prev.view(), adt * mu)?;
            let chemo = self.chemo.solve(p.view())?;
            let km = assemble_kernel_matrices(&self.kernel_ctx(), &chemo);
            let pen_lag = self.macro_op.apply(p.view(), g_prev.view()) * mu;
            let pen_new = self.macro_op.apply(p.view(), km.g_tilde.view()) * mu;

            let mut r_st = Array3::zeros((n, nv, k));
            let mut j_st = Array3::zeros((n, nv, k));
            let mut factors = Vec::with_capacity(n);
            let mut buf = vec![0.0; k];
            for i in 0..n {
                let c = DMatrix::from_fn(k, k, |a, b| km.c[[i, a, b]]);
                let a_mat = DMatrix::identity(k, k) + (&m + &c) * h;
                let f = SmallFactor::new(a_mat)?;
                let pi = p.row(i);
                for q in 0..nv {
                    for a in 0..k {
                        let mut src = 0.0;
                        for b in 0..k {
                            src += (fbar * m[(a, b)] + km.b[[i, q, a, b]]) * pi[b];
                        }
                        buf[a] = rbar[[i, q, a]] + h * src + adt * fbar * pen_lag[[i, a]];
                    }
                    f.solve_slice(&mut buf)?;
                    r_st.slice_mut(s![i, q, ..]).iter_mut().zip(&buf).for_each(|(d, s)| *d = *s);
                }
                factors.push(f);
            }

            let mut d0r = vec![0.0; n];
            let mut line = vec![0.0; n];
            let mut d0r_all = Array3::zeros((n, nv, k));
            for q in 0..nv {
                for a in 0..k {
                    line.iter_mut().enumerate().for_each(|(i, x)| *x = r_st[[i, q, a]]);
                    centered_even(&line, dx, &mut d0r);
                    for i in 0..n {
                        d0r_all[[i, q, a]] = d0r[i];
                    }
                }
            }
            let stream = 1.0 - eps2 * phi;
            for (i, f) in factors.iter().enumerate() {
                let pi = p.row(i);
                for q in 0..nv {
                    let v = self.vel.nodes[q];
                    for a in 0..k {
                        let mut ep = 0.0;
                        for b in 0..k {
                            ep += km.e[[i, q, a, b]] * pi[b];
                        }
                        buf[a] = jbar[[i, q, a]] - h * (stream * v * d0r_all[[i, q, a]] - ep);
                    }
                    f.solve_slice(&mut buf)?;
                    j_st.slice_mut(s![i, q, ..]).iter_mut().zip(&buf).for_each(|(d, s)| *d = *s);
                }
            }
            if !r_st.iter().chain(j_st.iter()).all(|v| v.is_finite()) {
                return Err(Error::numerical(format!(
                    "non-finite stage values at t = {} (stage {})",
                    state.t,
                    kk + 1
                )));
            }

            // stiff parts recovered from the stage relation instead of 1/eps^2 differences
            let mut f2r = (&r_st - &rbar) / adt;
            let f2j = (&j_st - &jbar) / adt;
            let pen_shift = (&pen_new - &pen_lag) * fbar;
            for mut plane in f2r.axis_iter_mut(Axis(1)) {
                plane += &pen_shift;
            }

            let mut f1r = Array3::zeros((n, nv, k));
            let mut f1j = Array3::zeros((n, nv, k));
            for q in 0..nv {
                transport_block(
                    r_st.slice(s![.., q, ..]),
                    j_st.slice(s![.., q, ..]),
                    self.vel.nodes[q],
                    phi,
                    dx,
                    &self.basis,
                    f1r.slice_mut(s![.., q, ..]),
                    f1j.slice_mut(s![.., q, ..]),
                );
            }
            for mut plane in f1r.axis_iter_mut(Axis(1)) {
                plane -= &(&pen_new * fbar);
            }

            g_prev = km.g_tilde;
            stages.push(Stage { f1r, f1j, f2r, f2j });
        }

        let mut r_new = state.r_hat.clone();
        let mut j_new = state.j_hat.clone();
        for (l, st) in stages.iter().enumerate() {
            r_new.scaled_add(dt * tab.b_exp[l], &st.f1r);
            r_new.scaled_add(dt * tab.b_imp[l], &st.f2r);
            j_new.scaled_add(dt * tab.b_exp[l], &st.f1j);
            j_new.scaled_add(dt * tab.b_imp[l], &st.f2j);
        }
        let out = KineticState {
            r_hat: r_new,
            j_hat: j_new,
            t: state.t + dt,
        };
        if !out.is_finite() {
            return Err(Error::numerical(format!(
                "non-finite state after step ending at t = {} (final combination)",
                out.t
            )));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaos::GpcBasis;
    use crate::grid::{half_velocity_quadrature, make_spatial_grid};

    fn solver(eps: f64, order: usize, coeff: RandomCoefficient, n: usize) -> KineticSolver {
        KineticSolver::new(
            ModelKind::Nonlocal,
            eps,
            GpcBasis::with_order(order).unwrap(),
            &coeff,
            half_velocity_quadrature(4, 1.0).unwrap(),
            make_spatial_grid(1.0, n).unwrap(),
        )
        .unwrap()
    }

    fn gaussian_state(s: &KineticSolver, amp: f64) -> KineticState {
        let mut st = s.zero_state();
        let fbar = s.vel.equilibrium();
        for (i, &x) in s.grid.centers.iter().enumerate() {
            let rho = amp * 4.0 * (5.0 * std::f64::consts::PI).sqrt() * (-80.0 * x * x).exp();
            for q in 0..s.vel.n_v {
                st.r_hat[[i, q, 0]] = fbar * rho;
            }
        }
        st
    }

    #[test]
    fn zero_state_is_fixed() {
        let s = solver(0.1, 2, RandomCoefficient::new(1.0, 0.5).unwrap(), 32);
        let z = s.zero_state();
        let mut st = z.clone();
        for _ in 0..3 {
            st = s.step(&st, 1e-3).unwrap();
        }
        assert!(st.r_hat.iter().chain(st.j_hat.iter()).all(|v| *v == 0.0));
        assert!((st.t - 3e-3).abs() < 1e-15);
    }

    #[test]
    fn rejects_zero_eps() {
        let r = KineticSolver::new(
            ModelKind::Nonlocal,
            0.0,
            GpcBasis::with_order(0).unwrap(),
            &RandomCoefficient::constant(1.0).unwrap(),
            half_velocity_quadrature(4, 1.0).unwrap(),
            make_spatial_grid(1.0, 16).unwrap(),
        );
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn deterministic_subcritical_mass_is_conserved() {
        let s = solver(1.0, 0, RandomCoefficient::constant(1.0).unwrap(), 80);
        let mut st = gaussian_state(&s, 1.0);
        let dx = s.grid.dx;
        let m0 = st.density(&s.vel).column(0).sum() * dx;
        assert!((m0 - std::f64::consts::PI).abs() < 1e-6);
        let dt = 0.02 * dx;
        for _ in 0..100 {
            st = s.step(&st, dt).unwrap();
        }
        let m1 = st.density(&s.vel).column(0).sum() * dx;
        assert!(((m1 - m0) / m0).abs() <= 1e-10, "{m0} {m1}");
    }
}
