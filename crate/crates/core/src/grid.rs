//! Spatial cell-centered grid and Gauss-Legendre velocity quadrature.

use crate::error::{Error, Result};

/// Uniform cell-centered grid on `[-x_max, x_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    pub x_max: f64,
    pub n_cells: usize,
    pub dx: f64,
    pub centers: Vec<f64>,
}

impl SpatialGrid {
    pub fn new(x_max: f64, n_cells: usize) -> Result<Self> {
        if !(x_max > 0.0) || !x_max.is_finite() {
            return Err(Error::config(format!("x_max must be > 0, got {x_max}")));
        }
        if n_cells < 4 {
            return Err(Error::config(format!(
                "n_cells must be at least 4, got {n_cells}"
            )));
        }
        let dx = 2.0 * x_max / n_cells as f64;
        let centers = (0..n_cells)
            .map(|i| -x_max + (i as f64 + 0.5) * dx)
            .collect();
        Ok(Self {
            x_max,
            n_cells,
            dx,
            centers,
        })
    }

    pub fn len(&self) -> usize {
        self.n_cells
    }

    pub fn is_empty(&self) -> bool {
        self.n_cells == 0
    }
}

pub fn make_spatial_grid(x_max: f64, n_cells: usize) -> Result<SpatialGrid> {
    SpatialGrid::new(x_max, n_cells)
}

/// Legendre polynomial `P_n(x)` and its derivative by the three-term recurrence.
pub(crate) fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 2..=n {
        let k = k as f64;
        let next = ((2.0 * k - 1.0) * x * p - (k - 1.0) * p_prev) / k;
        p_prev = p;
        p = next;
    }
    let n = n as f64;
    // P_n'(x) = n (x P_n - P_{n-1}) / (x^2 - 1); nodes never sit on +-1
    let dp = n * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// `n`-point Gauss-Legendre rule on `[a, b]`, nodes in ascending order.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::config("quadrature needs at least one node"));
    }
    if !(a < b) {
        return Err(Error::config(format!(
            "quadrature interval must satisfy a < b, got [{a}, {b}]"
        )));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = (b - a) / 2.0;
    let mid = (a + b) / 2.0;
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess for the i-th largest root
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() <= 1e-15 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // x is positive (or zero for the odd middle root)
        nodes[n - 1 - i] = mid + half * x;
        nodes[i] = mid - half * x;
        weights[n - 1 - i] = half * w;
        weights[i] = half * w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = mid;
    }
    Ok((nodes, weights))
}

/// Gauss-Legendre rule on the positive half `(0, v_max]` of the velocity interval.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityQuad {
    pub v_max: f64,
    pub n_v: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl VelocityQuad {
    pub fn new(n_v: usize, v_max: f64) -> Result<Self> {
        if n_v < 2 {
            return Err(Error::config(format!("n_v must be at least 2, got {n_v}")));
        }
        let (nodes, weights) = gauss_legendre(n_v, 0.0, v_max)?;
        Ok(Self {
            v_max,
            n_v,
            nodes,
            weights,
        })
    }

    /// `2 * sum_q w_q g(v_q)`, the full-interval integral of an even function.
    pub fn even_moment(&self, g: impl Fn(f64) -> f64) -> f64 {
        2.0 * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&v, &w)| w * g(v))
            .sum::<f64>()
    }

    /// Uniform equilibrium `1/|V|`.
    pub fn equilibrium(&self) -> f64 {
        1.0 / (2.0 * self.v_max)
    }

    /// `c1 = (1/2) int_V |v| dv`.
    pub fn c1(&self) -> f64 {
        0.5 * self.even_moment(|v| v)
    }
}

pub fn half_velocity_quadrature(n_v: usize, v_max: f64) -> Result<VelocityQuad> {
    VelocityQuad::new(n_v, v_max)
}
