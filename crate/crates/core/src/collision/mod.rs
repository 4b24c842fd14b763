//! Coulomb-Landau collision fields and the linear and bilinear operators.

pub mod conv;
pub mod fft3;
pub mod fields;
pub mod kernel;
pub mod operators;
pub mod selftest;

pub use conv::{ConvolutionEngine, Symbol};
pub use fields::{compute_sigma, sigma_at_points, CollisionFields};
pub use kernel::{phi_kernel, truncated_symbol};
pub use operators::{
    apply_a, apply_fokker_planck, apply_gamma, apply_k, apply_l, CollisionOperator, FokkerPlanck,
    Gradient, LandauOperator, PreparedLandau, PreparedOperator,
};
pub use selftest::{
    invariant_floor, rayleigh_quotient, sigma_checks, symmetry_probe, FloorReport, SigmaReport,
    SymmetryReport,
};
