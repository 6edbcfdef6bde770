//! Numerical laboratory for the sine-Gordon equation with a nonlinear
//! point impurity,
//!
//! ```text
//! u_tt - u_xx + (1 + q δ0(x)) sin u = 0,
//! ```
//!
//! covering stationary waves and their interface condition, symplectic time
//! integration (sharp and mollified impurity), the spectrum of the
//! linearized operator, and scripted stability, minimization and scattering
//! experiments.

pub mod dynamics;
pub mod energy;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod impurity;
pub mod spectrum;
pub mod validation;
pub mod waves;

pub use energy::{deviation_norm, energy, DeviationNorm, EnergyBreakdown};
pub use error::{Error, Result};
pub use grid::{FieldState, Grid1D};
pub use impurity::{DeltaMode, ImpurityParams, MollifierCoupling};
pub use waves::WaveKind;

/// Default half width of the computational domain.
pub const DEFAULT_HALF_WIDTH: f64 = 20.0;
/// Default node count (`dx = 0.01` on the default domain).
pub const DEFAULT_NODE_COUNT: usize = 4001;
