//! Stochastic collocation at Gauss-Legendre nodes in `z`.

use crate::error::Result;
use crate::grid::gauss_legendre;

/// Nodes on `[-1, 1]` with weights summing to one (the uniform density is folded in).
#[derive(Debug, Clone, PartialEq)]
pub struct CollocationPlan {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl CollocationPlan {
    pub fn gauss(n: usize) -> Result<Self> {
        let (nodes, w) = gauss_legendre(n, -1.0, 1.0)?;
        Ok(Self {
            nodes,
            weights: w.iter().map(|v| 0.5 * v).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `sum_j w_j f(z_j)`.
    pub fn expectation(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&z, &w)| w * f(z)).sum()
    }
}

/// Pointwise ensemble statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Largest `max(0, -var_i) / max(mean_i^2, tiny)` clipped to zero.
    pub variance_clamp: f64,
}

/// Weighted mean and standard deviation of member fields, summed in node order.
pub fn ensemble_stats(plan: &CollocationPlan, members: &[&[f64]]) -> EnsembleStats {
    assert_eq!(members.len(), plan.len());
    let n = members.first().map_or(0, |m| m.len());
    let mut mean = vec![0.0; n];
    let mut second = vec![0.0; n];
    for (m, &w) in members.iter().zip(&plan.weights) {
        for i in 0..n {
            mean[i] += w * m[i];
            second[i] += w * m[i] * m[i];
        }
    }
    let mut clamp: f64 = 0.0;
    let std = (0..n)
        .map(|i| {
            let var = second[i] - mean[i] * mean[i];
            if var < 0.0 {
                clamp = clamp.max(-var / (mean[i] * mean[i]).max(f64::MIN_POSITIVE));
                0.0
            } else {
                var.sqrt()
            }
        })
        .collect();
    EnsembleStats {
        mean,
        std,
        variance_clamp: clamp,
    }
}

/// `sum_j w_j u_j Phi_m(z_j)` for each mode `m < k`.
pub fn project_members(plan: &CollocationPlan, members: &[&[f64]], k: usize) -> Vec<Vec<f64>> {
    let n = members.first().map_or(0, |m| m.len());
    (0..k)
        .map(|m| {
            let mut out = vec![0.0; n];
            for ((u, &w), &z) in members.iter().zip(&plan.weights).zip(&plan.nodes) {
                let c = w * crate::chaos::phi(m, z);
                for i in 0..n {
                    out[i] += c * u[i];
                }
            }
            out
        })
        .collect()
}
