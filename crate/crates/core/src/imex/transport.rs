//! Explicit upwind TVD transport of the parity pair on one velocity line.
//!
//! Works on the characteristic variables `w+ = r + phi^{-1/2} j` (right-moving)
//! and `w- = r - phi^{-1/2} j` (left-moving) with minmod-limited slopes.
//! With several chaos modes the limiter acts on z-node values, not on coefficients.

use ndarray::{s, Array2, ArrayView1, ArrayView2, ArrayViewMut2};

use crate::chaos::GpcBasis;

/// Number of ghost cells on each side.
pub const GHOSTS: usize = 2;

pub fn minmod(a: f64, b: f64) -> f64 {
    if a > 0.0 && b > 0.0 {
        a.min(b)
    } else if a < 0.0 && b < 0.0 {
        a.max(b)
    } else {
        0.0
    }
}

/// Extends a line by two ghost cells per side: even reflection for `sign = 1`,
/// odd reflection for `sign = -1`.
pub fn with_ghosts(line: &[f64], sign: f64) -> Vec<f64> {
    let n = line.len();
    let mut ext = Vec::with_capacity(n + 2 * GHOSTS);
    ext.push(sign * line[1]);
    ext.push(sign * line[0]);
    ext.extend_from_slice(line);
    ext.push(sign * line[n - 1]);
    ext.push(sign * line[n - 2]);
    ext
}

/// Minmod slopes of an extended line at every entry that has two neighbours.
/// The output has the same length as `ext`; the two end entries are zero.
pub fn minmod_slopes(ext: &[f64], dx: f64) -> Vec<f64> {
    let mut s = vec![0.0; ext.len()];
    for i in 1..ext.len() - 1 {
        s[i] = minmod(ext[i + 1] - ext[i], ext[i] - ext[i - 1]) / dx;
    }
    s
}

/// Transport right-hand sides `(T_r, T_j)` for one velocity node and one mode.
///
/// `T_r` discretizes `-v dj/dx` and `T_j` discretizes `-phi v dr/dx`, each with
/// the upwind numerical viscosity of the characteristic splitting. The mass
/// flux is zero at both walls.
pub fn transport_line(r: &[f64], j: &[f64], v: f64, phi: f64, dx: f64, tr: &mut [f64], tj: &mut [f64]) {
    let inv_sq = 1.0 / phi.sqrt();
    let re = with_ghosts(r, 1.0);
    let je = with_ghosts(j, -1.0);
    let wp: Vec<f64> = re.iter().zip(&je).map(|(r, j)| r + inv_sq * j).collect();
    let wm: Vec<f64> = re.iter().zip(&je).map(|(r, j)| r - inv_sq * j).collect();
    let gamma = minmod_slopes(&wp, dx);
    let beta = minmod_slopes(&wm, dx);
    characteristic_update(&wp, &wm, &gamma, &beta, v, phi, dx, tr, tj);
}

/// Upwind fluxes from extended characteristic variables and their slopes.
#[allow(clippy::too_many_arguments)]
fn characteristic_update(
    wp: &[f64],
    wm: &[f64],
    gamma: &[f64],
    beta: &[f64],
    v: f64,
    phi: f64,
    dx: f64,
    tr: &mut [f64],
    tj: &mut [f64],
) {
    let n = wp.len() - 2 * GHOSTS;
    let sq = phi.sqrt();
    let h = 0.5 * dx;
    // interface e sits between extended cells e and e+1; physical interfaces
    // i-1/2 for i in 0..=n are e = i + 1
    let mut fr = vec![0.0; n + 1];
    let mut fj = vec![0.0; n + 1];
    for (f, e) in (GHOSTS - 1..GHOSTS + n).enumerate() {
        let right = wp[e] + h * gamma[e];
        let left = wm[e + 1] - h * beta[e + 1];
        fr[f] = 0.5 * v * sq * (right - left);
        fj[f] = 0.5 * v * phi * (right + left);
    }
    fr[0] = 0.0;
    fr[n] = 0.0;
    for i in 0..n {
        tr[i] = -(fr[i + 1] - fr[i]) / dx;
        tj[i] = -(fj[i + 1] - fj[i]) / dx;
    }
}

/// Slopes of every chaos mode of an extended block `[len, K]`.
///
/// The one-sided differences are evaluated at the z-nodes, limited there with
/// minmod (the same limiter each realization would see) and projected back.
/// The two end rows are zero.
pub fn nodal_minmod_slopes(ext: ArrayView2<f64>, basis: &GpcBasis, dx: f64) -> Array2<f64> {
    let (len, k) = ext.dim();
    let diffs = &ext.slice(s![1.., ..]) - &ext.slice(s![..len - 1, ..]);
    let nodal = diffs.dot(&basis.eval);
    let nz = basis.n_znodes();
    let mut out = Array2::zeros((len, k));
    let mut lim = vec![0.0; nz];
    for e in 1..len - 1 {
        for (m, l) in lim.iter_mut().enumerate() {
            *l = basis.z_weights[m] * minmod(nodal[[e, m]], nodal[[e - 1, m]]);
        }
        for a in 0..k {
            out[[e, a]] = (0..nz).map(|m| basis.eval[[a, m]] * lim[m]).sum::<f64>() / dx;
        }
    }
    out
}

/// `transport_line` for all modes of one velocity node. `r`, `j`, `tr`, `tj` are `[n, K]`.
/// A single mode is limited directly; several modes go through [`nodal_minmod_slopes`].
#[allow(clippy::too_many_arguments)]
pub fn transport_block(
    r: ArrayView2<f64>,
    j: ArrayView2<f64>,
    v: f64,
    phi: f64,
    dx: f64,
    basis: &GpcBasis,
    mut tr: ArrayViewMut2<f64>,
    mut tj: ArrayViewMut2<f64>,
) {
    let (n, k) = r.dim();
    let mut out_r = vec![0.0; n];
    let mut out_j = vec![0.0; n];
    if k == 1 {
        let rl = r.column(0).to_vec();
        let jl = j.column(0).to_vec();
        transport_line(&rl, &jl, v, phi, dx, &mut out_r, &mut out_j);
        tr.column_mut(0).assign(&ArrayView1::from(&out_r));
        tj.column_mut(0).assign(&ArrayView1::from(&out_j));
        return;
    }
    let inv_sq = 1.0 / phi.sqrt();
    let len = n + 2 * GHOSTS;
    let mut wp = Array2::zeros((len, k));
    let mut wm = Array2::zeros((len, k));
    for a in 0..k {
        let re = with_ghosts(&r.column(a).to_vec(), 1.0);
        let je = with_ghosts(&j.column(a).to_vec(), -1.0);
        for e in 0..len {
            wp[[e, a]] = re[e] + inv_sq * je[e];
            wm[[e, a]] = re[e] - inv_sq * je[e];
        }
    }
    let gamma = nodal_minmod_slopes(wp.view(), basis, dx);
    let beta = nodal_minmod_slopes(wm.view(), basis, dx);
    for a in 0..k {
        characteristic_update(
            &wp.column(a).to_vec(),
            &wm.column(a).to_vec(),
            &gamma.column(a).to_vec(),
            &beta.column(a).to_vec(),
            v,
            phi,
            dx,
            &mut out_r,
            &mut out_j,
        );
        tr.column_mut(a).assign(&ArrayView1::from(&out_r));
        tj.column_mut(a).assign(&ArrayView1::from(&out_j));
    }
}

/// Centered difference `(u_{i+1} - u_{i-1}) / (2 dx)` with even-reflected ghosts.
pub fn centered_even(u: &[f64], dx: f64, out: &mut [f64]) {
    let n = u.len();
    for i in 0..n {
        let lo = if i == 0 { u[0] } else { u[i - 1] };
        let hi = if i + 1 == n { u[n - 1] } else { u[i + 1] };
        out[i] = (hi - lo) / (2.0 * dx);
    }
}
