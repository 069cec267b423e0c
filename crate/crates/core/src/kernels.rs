//! Turning-kernel sources and the state-dependent Galerkin matrices `B, C, E, G~`.
//!
//! Nonlinearities (the positive part of the nonlocal kernel, the modulus of the
//! local one) are evaluated pointwise at the z-nodes on the reconstructed
//! chemoattractant, projected back onto the chaos modes, and only then turned
//! into matrices through the triple products `<alpha Phi_k Phi_i Phi_j>`.

use ndarray::{s, Array1, Array2, Array3, Array4, ArrayView1, ArrayView2};

use crate::chaos::{galerkin_matrix, GpcBasis, SpectralStatic};
use crate::chemo::ChemoField;
use crate::grid::{SpatialGrid, VelocityQuad};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelKind {
    /// Finite-offset sensing `(s(x + eps v) - s(x))_+`.
    Nonlocal,
    /// Gradient sensing `eps (v ds/dx)_+`, with `c1 = (1/2) int_V |v| dv`.
    Local { c1: f64 },
}

impl ModelKind {
    pub fn local(vel: &VelocityQuad) -> Self {
        ModelKind::Local { c1: vel.c1() }
    }
}

/// Reflect a point back into `[-x_max, x_max]` (specular walls, any number of bounces).
pub fn reflect_into_domain(x: f64, x_max: f64) -> f64 {
    let period = 4.0 * x_max;
    let mut y = (x + x_max).rem_euclid(period);
    if y > 2.0 * x_max {
        y = period - y;
    }
    y - x_max
}

/// Three-point interpolation stencil centered on the nearest cell.
///
/// Neighbours past the outer cells are even-reflected, so the interpolant has
/// zero slope at the walls.
#[derive(Debug, Clone, Copy)]
struct Stencil {
    left: usize,
    center: usize,
    right: usize,
    /// Offset from the center in units of `dx`, within `[-1/2, 1/2]`.
    d: f64,
}

fn stencil(grid: &SpatialGrid, x: f64) -> Stencil {
    let x = reflect_into_domain(x, grid.x_max);
    let n = grid.n_cells;
    let t = (x - grid.centers[0]) / grid.dx;
    let center = (t.round().max(0.0) as usize).min(n - 1);
    Stencil {
        left: center.saturating_sub(1),
        center,
        right: (center + 1).min(n - 1),
        d: t - center as f64,
    }
}

impl Stencil {
    fn apply(&self, field: impl Fn(usize) -> f64) -> f64 {
        let c = field(self.center);
        let l = field(self.left);
        let r = field(self.right);
        let d = self.d;
        c + 0.5 * d * (r - l) + 0.5 * d * d * (r - 2.0 * c + l)
    }
}

/// `(s(x + eps v) - s(x))_+` at every cell center.
pub fn delta_eps_s(s: &[f64], eps: f64, v: f64, grid: &SpatialGrid) -> Vec<f64> {
    grid.centers
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let shifted = stencil(grid, x + eps * v).apply(|j| s[j]);
            (shifted - s[i]).max(0.0)
        })
        .collect()
}

/// Even parity `(g(v) + g(-v)) / 2`.
pub fn parity_r(g_plus: f64, g_minus: f64) -> f64 {
    0.5 * (g_plus + g_minus)
}

/// Scaled odd parity `(g(v) - g(-v)) / (2 eps)`.
pub fn parity_j(g_plus: f64, g_minus: f64, eps: f64) -> f64 {
    (g_plus - g_minus) / (2.0 * eps)
}

#[derive(Debug, Clone)]
pub struct KernelMatrices {
    /// `[n_cells, n_v, K, K]`
    pub b: Array4<f64>,
    /// `[n_cells, K, K]`
    pub c: Array3<f64>,
    /// `[n_cells, n_v, K, K]`
    pub e: Array4<f64>,
    /// `[n_cells, K, K]`
    pub g_tilde: Array3<f64>,
}

impl KernelMatrices {
    pub fn zeros(n_cells: usize, n_v: usize, k: usize) -> Self {
        Self {
            b: Array4::zeros((n_cells, n_v, k, k)),
            c: Array3::zeros((n_cells, k, k)),
            e: Array4::zeros((n_cells, n_v, k, k)),
            g_tilde: Array3::zeros((n_cells, k, k)),
        }
    }
}

/// `G~_ij(x) = <(ds_N/dx) Phi_i Phi_j>` at every cell.
pub fn assemble_g_tilde(ds_hat: ArrayView2<f64>, basis: &GpcBasis) -> Array3<f64> {
    let (n, k) = ds_hat.dim();
    let mut g = Array3::zeros((n, k, k));
    let mut buf = vec![0.0; k * k];
    for i in 0..n {
        galerkin_matrix(ds_hat.row(i), &basis.triple, &mut buf);
        g.slice_mut(s![i, .., ..])
            .iter_mut()
            .zip(&buf)
            .for_each(|(d, v)| *d = *v);
    }
    g
}

fn write_matrix(dst: ndarray::ArrayViewMut2<f64>, src: &[f64]) {
    dst.into_iter().zip(src).for_each(|(d, v)| *d = *v);
}

/// Everything the kernel assembly needs besides the chemoattractant.
#[derive(Debug, Clone, Copy)]
pub struct KernelContext<'a> {
    pub model: ModelKind,
    pub basis: &'a GpcBasis,
    pub spectral: &'a SpectralStatic,
    pub vel: &'a VelocityQuad,
    pub grid: &'a SpatialGrid,
    pub eps: f64,
}

pub fn assemble_kernel_matrices(ctx: &KernelContext<'_>, chemo: &ChemoField) -> KernelMatrices {
    let KernelContext {
        model,
        basis,
        spectral,
        vel,
        grid,
        eps,
    } = *ctx;
    let n = grid.n_cells;
    let k = basis.k;
    let nv = vel.n_v;
    let nz = basis.n_znodes();
    let mut out = KernelMatrices {
        b: Array4::zeros((n, nv, k, k)),
        c: Array3::zeros((n, k, k)),
        e: Array4::zeros((n, nv, k, k)),
        g_tilde: assemble_g_tilde(chemo.ds_hat.view(), basis),
    };
    let triple = &spectral.alpha_triple;
    let mut buf = vec![0.0; k * k];
    let mut avg = Array1::<f64>::zeros(k);

    match model {
        ModelKind::Nonlocal => {
            // s_N at every (cell, z-node)
            let s_nodes: Array2<f64> = chemo.s_hat.dot(&basis.eval);
            let mut d_plus = Array1::<f64>::zeros(nz);
            let mut d_minus = Array1::<f64>::zeros(nz);
            for i in 0..n {
                avg.fill(0.0);
                let x = grid.centers[i];
                for q in 0..nv {
                    let v = vel.nodes[q];
                    let sp = stencil(grid, x + eps * v);
                    let sm = stencil(grid, x - eps * v);
                    for m in 0..nz {
                        let here = s_nodes[[i, m]];
                        d_plus[m] = (sp.apply(|j| s_nodes[[j, m]]) - here).max(0.0);
                        d_minus[m] = (sm.apply(|j| s_nodes[[j, m]]) - here).max(0.0);
                    }
                    let hp = basis.project(d_plus.view());
                    let hm = basis.project(d_minus.view());
                    let r_src: Array1<f64> = (&hp + &hm) * 0.5;
                    let j_src: Array1<f64> = (&hp - &hm) / (2.0 * eps);
                    avg.scaled_add(vel.weights[q], &(&hp + &hm));
                    galerkin_matrix(r_src.view(), triple, &mut buf);
                    write_matrix(out.b.slice_mut(s![i, q, .., ..]), &buf);
                    galerkin_matrix(j_src.view(), triple, &mut buf);
                    write_matrix(out.e.slice_mut(s![i, q, .., ..]), &buf);
                }
                galerkin_matrix(avg.view(), triple, &mut buf);
                write_matrix(out.c.slice_mut(s![i, .., ..]), &buf);
            }
        }
        ModelKind::Local { c1 } => {
            let ds_nodes: Array2<f64> = chemo.ds_hat.dot(&basis.eval);
            for i in 0..n {
                let modulus: Array1<f64> = ds_nodes.row(i).mapv(f64::abs);
                let xi = basis.project(modulus.view());
                let ds: ArrayView1<f64> = chemo.ds_hat.row(i);
                for q in 0..nv {
                    let v = vel.nodes[q];
                    let r_src = &xi * (0.5 * eps * v);
                    let j_src = &ds * (0.5 * v);
                    galerkin_matrix(r_src.view(), triple, &mut buf);
                    write_matrix(out.b.slice_mut(s![i, q, .., ..]), &buf);
                    galerkin_matrix(j_src.view(), triple, &mut buf);
                    write_matrix(out.e.slice_mut(s![i, q, .., ..]), &buf);
                }
                avg.assign(&(&xi * (c1 * eps)));
                galerkin_matrix(avg.view(), triple, &mut buf);
                write_matrix(out.c.slice_mut(s![i, .., ..]), &buf);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaos::{RandomCoefficient, SpectralStatic};
    use crate::chemo::{centered_derivative, ChemoField};
    use crate::grid::{make_spatial_grid, VelocityQuad};
    use approx::assert_relative_eq;

    fn field_from(grid: &SpatialGrid, k: usize, f: impl Fn(f64, usize) -> f64) -> ChemoField {
        let s_hat = Array2::from_shape_fn((grid.n_cells, k), |(i, m)| f(grid.centers[i], m));
        let ds_hat = centered_derivative(&s_hat, grid.dx);
        ChemoField { s_hat, ds_hat }
    }

    #[test]
    fn reflection_folds_points() {
        assert_relative_eq!(reflect_into_domain(1.2, 1.0), 0.8, epsilon = 1e-15);
        assert_relative_eq!(reflect_into_domain(-1.3, 1.0), -0.7, epsilon = 1e-15);
        assert_relative_eq!(reflect_into_domain(0.4, 1.0), 0.4, epsilon = 1e-15);
        assert_relative_eq!(reflect_into_domain(3.5, 1.0), -0.5, epsilon = 1e-15);
    }

    #[test]
    fn delta_of_constant_is_zero() {
        let g = make_spatial_grid(1.0, 50).unwrap();
        let s = vec![3.7; 50];
        for v in [-1.0, -0.3, 0.2, 1.0] {
            assert!(delta_eps_s(&s, 0.3, v, &g).iter().all(|&d| d == 0.0));
        }
    }

    #[test]
    fn delta_of_linear_field() {
        let g = make_spatial_grid(1.0, 100).unwrap();
        let s: Vec<f64> = g.centers.clone();
        let d = delta_eps_s(&s, 0.1, 0.5, &g);
        for i in 20..80 {
            assert!((d[i] - 0.05).abs() < 1e-13);
        }
        let d = delta_eps_s(&s, 0.1, -0.5, &g);
        for i in 20..80 {
            assert_eq!(d[i], 0.0);
        }
    }

    #[test]
    fn quadratic_fields_are_interpolated_exactly() {
        let g = make_spatial_grid(1.0, 64).unwrap();
        let f = |x: f64| 0.3 - 1.1 * x + 2.5 * x * x;
        let s: Vec<f64> = g.centers.iter().map(|&x| f(x)).collect();
        for x in [-0.7, -0.2345, 0.0, 0.31, 0.9] {
            let got = stencil(&g, x).apply(|j| s[j]);
            assert!((got - f(x)).abs() < 1e-13, "{x}");
        }
    }

    #[test]
    fn interpolant_is_flat_at_the_walls() {
        let g = make_spatial_grid(1.0, 20).unwrap();
        let s: Vec<f64> = g.centers.iter().map(|x| x.powi(3) + x).collect();
        let h = 1e-7;
        for w in [-1.0, 1.0] {
            let inside = w * (1.0 - h);
            let slope = (stencil(&g, w).apply(|j| s[j]) - stencil(&g, inside).apply(|j| s[j])) / h;
            assert!(slope.abs() < 1e-5, "{slope}");
        }
    }

    #[test]
    fn small_offset_limit_is_the_centered_difference() {
        // as eps -> 0 the odd parity becomes (v/2) (s_{i+1} - s_{i-1}) / (2 dx)
        let g = make_spatial_grid(1.0, 50).unwrap();
        let s: Vec<f64> = g.centers.iter().map(|x| (3.0 * x).sin() + x * x).collect();
        let (eps, v) = (1e-7, 0.6);
        let dp = delta_eps_s(&s, eps, v, &g);
        let dm = delta_eps_s(&s, eps, -v, &g);
        for i in 1..49 {
            let d0 = (s[i + 1] - s[i - 1]) / (2.0 * g.dx);
            let j = parity_j(dp[i], dm[i], eps);
            assert!((j - 0.5 * v * d0).abs() < 1e-6 * (1.0 + d0.abs()), "i={i}");
        }
    }

    #[test]
    fn parity_examples() {
        assert_eq!(parity_j(2.0, 2.0, 0.1), 0.0);
        assert_eq!(parity_r(1.5, -1.5), 0.0);
        // linear s: delta(v) = eps v, delta(-v) = 0, so J = v/2
        let (eps, v) = (0.05, 0.8);
        assert_relative_eq!(parity_j(eps * v, 0.0, eps), v / 2.0, max_relative = 1e-15);
    }

    #[test]
    fn nonlocal_parities_approach_the_gradient_limit() {
        let g = make_spatial_grid(1.0, 400).unwrap();
        let s: Vec<f64> = g.centers.iter().map(|x| (2.0 * x).sin()).collect();
        let v = 0.7;
        let i = 230;
        let ds = 2.0 * (2.0 * g.centers[i]).cos();
        let mut prev_r = f64::INFINITY;
        for eps in [0.1, 0.05, 0.025] {
            let dp = delta_eps_s(&s, eps, v, &g)[i];
            let dm = delta_eps_s(&s, eps, -v, &g)[i];
            let r = parity_r(dp, dm);
            let j = parity_j(dp, dm, eps);
            assert!(r < prev_r);
            prev_r = r;
            // leading correction is (eps/4) v^2 s''
            assert!((j - 0.5 * v * ds).abs() <= 0.5 * eps + 1e-3);
        }
    }

    fn ctx<'a>(
        model: ModelKind,
        basis: &'a GpcBasis,
        spectral: &'a SpectralStatic,
        vel: &'a VelocityQuad,
        grid: &'a SpatialGrid,
        eps: f64,
    ) -> KernelContext<'a> {
        KernelContext {
            model,
            basis,
            spectral,
            vel,
            grid,
            eps,
        }
    }

    #[test]
    fn constant_chemoattractant_gives_zero_matrices() {
        let grid = make_spatial_grid(1.0, 40).unwrap();
        let basis = GpcBasis::with_order(3).unwrap();
        let coeff = RandomCoefficient::new(1.0, 0.5).unwrap();
        let spectral = SpectralStatic::new(&coeff, &basis);
        let vel = VelocityQuad::new(4, 1.0).unwrap();
        let chemo = field_from(&grid, 4, |_, m| [2.0, 0.3, -0.1, 0.05][m]);
        for model in [ModelKind::Nonlocal, ModelKind::local(&vel)] {
            let km = assemble_kernel_matrices(&ctx(model, &basis, &spectral, &vel, &grid, 0.1), &chemo);
            let all = km.b.iter().chain(km.e.iter()).chain(km.c.iter()).chain(km.g_tilde.iter());
            assert!(all.into_iter().all(|v| v.abs() < 1e-14));
        }
    }

    #[test]
    fn deterministic_reduction_matches_scalar_terms() {
        let grid = make_spatial_grid(1.0, 80).unwrap();
        let basis = GpcBasis::with_order(0).unwrap();
        let coeff = RandomCoefficient::constant(1.0).unwrap();
        let spectral = SpectralStatic::new(&coeff, &basis);
        let vel = VelocityQuad::new(4, 1.0).unwrap();
        let eps = 0.2;
        let chemo = field_from(&grid, 1, |x, _| (-3.0 * x * x).exp());
        let km = assemble_kernel_matrices(&ctx(ModelKind::Nonlocal, &basis, &spectral, &vel, &grid, eps), &chemo);
        let s: Vec<f64> = chemo.s_hat.column(0).to_vec();
        let mut avg = vec![0.0; 80];
        for q in 0..4 {
            let v = vel.nodes[q];
            let dp = delta_eps_s(&s, eps, v, &grid);
            let dm = delta_eps_s(&s, eps, -v, &grid);
            for i in 0..80 {
                assert!((km.b[[i, q, 0, 0]] - parity_r(dp[i], dm[i])).abs() <= 1e-12);
                assert!((km.e[[i, q, 0, 0]] - parity_j(dp[i], dm[i], eps)).abs() <= 1e-12);
                avg[i] += vel.weights[q] * (dp[i] + dm[i]);
            }
        }
        for i in 0..80 {
            assert!((km.c[[i, 0, 0]] - avg[i]).abs() <= 1e-12);
            assert!((km.g_tilde[[i, 0, 0]] - chemo.ds_hat[[i, 0]]).abs() <= 1e-12);
        }
    }

    #[test]
    fn local_model_separable_case() {
        let grid = make_spatial_grid(1.0, 30).unwrap();
        let basis = GpcBasis::with_order(1).unwrap();
        let coeff = RandomCoefficient::new(1.0, 0.5).unwrap();
        let spectral = SpectralStatic::new(&coeff, &basis);
        let vel = VelocityQuad::new(4, 1.0).unwrap();
        let chemo = field_from(&grid, 2, |x, m| if m == 0 { x.sin() } else { 0.0 });
        let km = assemble_kernel_matrices(
            &ctx(ModelKind::local(&vel), &basis, &spectral, &vel, &grid, 0.1),
            &chemo,
        );
        for i in 0..30 {
            let ds = chemo.ds_hat[[i, 0]];
            for a in 0..2 {
                for b in 0..2 {
                    let id = if a == b { 1.0 } else { 0.0 };
                    assert!((km.g_tilde[[i, a, b]] - ds * id).abs() < 1e-14);
                    for q in 0..4 {
                        let expect = 0.5 * vel.nodes[q] * ds * spectral.m[[a, b]];
                        assert!((km.e[[i, q, a, b]] - expect).abs() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn assembled_matrices_are_symmetric() {
        let grid = make_spatial_grid(1.0, 60).unwrap();
        let basis = GpcBasis::with_order(4).unwrap();
        let coeff = RandomCoefficient::new(1.0, 0.5).unwrap();
        let spectral = SpectralStatic::new(&coeff, &basis);
        let vel = VelocityQuad::new(6, 1.0).unwrap();
        let chemo = field_from(&grid, 5, |x, m| (-(3.0 + m as f64) * x * x).exp() / (1.0 + m as f64));
        for model in [ModelKind::Nonlocal, ModelKind::local(&vel)] {
            let km = assemble_kernel_matrices(&ctx(model, &basis, &spectral, &vel, &grid, 0.05), &chemo);
            for i in 0..60 {
                for a in 0..5 {
                    for b in 0..5 {
                        assert!((km.c[[i, a, b]] - km.c[[i, b, a]]).abs() <= 1e-13);
                        assert!((km.g_tilde[[i, a, b]] - km.g_tilde[[i, b, a]]).abs() <= 1e-13);
                        for q in 0..6 {
                            assert!((km.b[[i, q, a, b]] - km.b[[i, q, b, a]]).abs() <= 1e-13);
                            assert!((km.e[[i, q, a, b]] - km.e[[i, q, b, a]]).abs() <= 1e-13);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn nonlocal_b_and_c_scale_with_eps() {
        let grid = make_spatial_grid(1.0, 800).unwrap();
        let basis = GpcBasis::with_order(2).unwrap();
        let coeff = RandomCoefficient::new(1.0, 0.5).unwrap();
        let spectral = SpectralStatic::new(&coeff, &basis);
        let vel = VelocityQuad::new(4, 1.0).unwrap();
        let chemo = field_from(&grid, 3, |x, m| (1.5 * x + 0.3 * m as f64).sin());
        let norms = |eps: f64| {
            let km = assemble_kernel_matrices(&ctx(ModelKind::Nonlocal, &basis, &spectral, &vel, &grid, eps), &chemo);
            let n = |a: &mut dyn Iterator<Item = &f64>| a.map(|v| v * v).sum::<f64>().sqrt();
            (n(&mut km.b.iter()), n(&mut km.c.iter()), n(&mut km.e.iter()))
        };
        let (b1, c1, e1) = norms(0.08);
        let (b2, c2, e2) = norms(0.04);
        assert!((b2 / b1 - 0.5).abs() < 0.05, "{}", b2 / b1);
        assert!((c2 / c1 - 0.5).abs() < 0.05, "{}", c2 / c1);
        assert!((e2 / e1 - 1.0).abs() < 0.05, "{}", e2 / e1);
    }

    #[test]
    fn local_sources_have_velocity_parity() {
        // B is built from an even source, E from an odd one: B(v) ~ v, E(v) ~ v, both
        // linear in the positive node, so B/v and E/v are velocity independent
        let grid = make_spatial_grid(1.0, 40).unwrap();
        let basis = GpcBasis::with_order(2).unwrap();
        let coeff = RandomCoefficient::new(1.0, 0.3).unwrap();
        let spectral = SpectralStatic::new(&coeff, &basis);
        let vel = VelocityQuad::new(5, 1.0).unwrap();
        let chemo = field_from(&grid, 3, |x, m| (x + 0.2 * m as f64).cos());
        let km = assemble_kernel_matrices(
            &ctx(ModelKind::local(&vel), &basis, &spectral, &vel, &grid, 0.1),
            &chemo,
        );
        for i in 0..40 {
            for a in 0..3 {
                for b in 0..3 {
                    let b0 = km.b[[i, 0, a, b]] / vel.nodes[0];
                    let e0 = km.e[[i, 0, a, b]] / vel.nodes[0];
                    for q in 1..5 {
                        assert!((km.b[[i, q, a, b]] / vel.nodes[q] - b0).abs() < 1e-13);
                        assert!((km.e[[i, q, a, b]] / vel.nodes[q] - e0).abs() < 1e-13);
                    }
                }
            }
        }
    }
}
