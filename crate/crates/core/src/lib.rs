//! Fixed-mode linear Vlasov-Poisson-Landau laboratory.
//!
//! Velocity space is a cell-centred tensor grid. A [`ModeField`] holds one
//! spatial Fourier mode `h_k(v)`; it may carry a transport "twist" so that the
//! free-streaming phase `e^{-i k.v t}` never has to be sampled on the grid.

pub mod collision;
pub mod density;
pub mod energy;
pub mod error;
pub mod experiment;
pub mod phase_space;
pub mod semigroup;
pub mod util;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use phase_space::{build_grid, ModeField, VelocityGrid, WeightSpec};
