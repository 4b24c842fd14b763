//! Time evolution of one spatial Fourier mode of the linear Landau equation
//! `d_t h + i k.v h + nu L h = 0`, the commuting vector field
//! `Y_{k,eta} = grad_v + i(eta + k t)` and decay-rate fitting.

mod config;
mod evolve;
mod fit;
mod krylov;
mod vector_field;

pub use config::{EvolutionConfig, OperatorChoice, StepScheme};
pub(crate) use evolve::{collision_step, csv_err};
pub use evolve::{evolve_mode, evolve_with, exact_free_semigroup, Snapshot, Trajectory};
pub use fit::{decay_fit, e_fold_time, DecayModel, FitResult};
pub use krylov::{conjugate_gradient, CgOutcome};
pub use vector_field::{apply_y, y_decay_bound_check, YBoundReport};
