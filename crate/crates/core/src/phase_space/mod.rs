//! Velocity grid, mode fields, weights, derivatives and the macroscopic projection.

pub mod container;
pub mod field;
pub mod grid;
pub mod norms;
pub mod projection;
pub mod stencil;
pub mod weights;

pub use field::{velocity_average, ModeField};
pub use grid::{build_grid, japanese, norm_sq, VelocityGrid};
pub use norms::{dissipation_norm, dissipation_norm_with};
pub use projection::{collision_invariants, project_null, NullBasis};
pub use stencil::{fft_wavenumbers, Banded, DerivativeScheme, Differentiator};
pub use weights::{weighted_norm, WeightSpec, EXPONENT_BUDGET};
