//! Penalty weights for the macroscopic diffusion term and the transport splitting.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltySettings {
    /// Weight of the added-and-subtracted diffusion operator.
    pub mu: f64,
    /// Splitting parameter of the odd-parity transport.
    pub phi: f64,
}

/// `mu = exp(-eps^2/dx)`, `phi = min(1, 1/eps^2)`.
pub fn penalties(eps: f64, dx: f64) -> PenaltySettings {
    let mu = (-eps * eps / dx).exp();
    let phi = if eps == 0.0 { 1.0 } else { (1.0 / (eps * eps)).min(1.0) };
    PenaltySettings { mu, phi }
}
