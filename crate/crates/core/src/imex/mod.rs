//! Penalized IMEX Runge-Kutta integrator for the projected parity system.

pub mod diffusion;
pub mod penalty;
pub mod stepper;
pub mod tableau;
pub mod transport;

pub use diffusion::MacroOperator;
pub use penalty::{penalties, PenaltySettings};
pub use stepper::{KineticSolver, KineticState};
pub use tableau::{ssp332, ButcherPair};
