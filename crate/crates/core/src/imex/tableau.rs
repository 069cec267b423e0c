//! Double Butcher tableau for IMEX Runge-Kutta.

#[derive(Debug, Clone, PartialEq)]
pub struct ButcherPair {
    pub stages: usize,
    /// Explicit matrix, strictly lower triangular.
    pub a_exp: Vec<Vec<f64>>,
    /// Implicit matrix, lower triangular with nonzero diagonal.
    pub a_imp: Vec<Vec<f64>>,
    pub b_exp: Vec<f64>,
    pub b_imp: Vec<f64>,
    pub c_exp: Vec<f64>,
    pub c_imp: Vec<f64>,
}

impl ButcherPair {
    /// Builds the pair and fills the abscissae from row sums.
    pub fn new(a_exp: Vec<Vec<f64>>, a_imp: Vec<Vec<f64>>, b_exp: Vec<f64>, b_imp: Vec<f64>) -> Self {
        let stages = b_exp.len();
        let c_exp = a_exp.iter().map(|row| row.iter().sum()).collect();
        let c_imp = a_imp.iter().map(|row| row.iter().sum()).collect();
        Self {
            stages,
            a_exp,
            a_imp,
            b_exp,
            b_imp,
            c_exp,
            c_imp,
        }
    }

    /// Largest violation of the first and second order conditions.
    pub fn order2_residual(&self) -> f64 {
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        [
            self.b_exp.iter().sum::<f64>() - 1.0,
            self.b_imp.iter().sum::<f64>() - 1.0,
            dot(&self.b_exp, &self.c_exp) - 0.5,
            dot(&self.b_imp, &self.c_imp) - 0.5,
        ]
        .iter()
        .fold(0.0f64, |m, r| m.max(r.abs()))
    }

    pub fn is_strictly_lower_explicit(&self) -> bool {
        (0..self.stages).all(|i| (i..self.stages).all(|j| self.a_exp[i][j] == 0.0))
    }

    /// Type A: the implicit matrix is lower triangular with a nonzero diagonal.
    pub fn is_type_a(&self) -> bool {
        (0..self.stages).all(|i| {
            self.a_imp[i][i] != 0.0 && (i + 1..self.stages).all(|j| self.a_imp[i][j] == 0.0)
        })
    }
}

/// Second order SSP(3,3,2) pair.
pub fn ssp332() -> ButcherPair {
    let third = 1.0 / 3.0;
    ButcherPair::new(
        vec![
            vec![0.0, 0.0, 0.0],
            vec![0.5, 0.0, 0.0],
            vec![0.5, 0.5, 0.0],
        ],
        vec![
            vec![0.25, 0.0, 0.0],
            vec![0.0, 0.25, 0.0],
            vec![third, third, third],
        ],
        vec![third; 3],
        vec![third; 3],
    )
}
