//! The closed density equation of one mode, `rho + K * rho = N`: the kernel
//! `K_k`, its Laplace transform and Penrose margin, the resolvent kernel
//! `G_k`, and three independent routes to `rho_k(t)`.

mod direct;
mod kernel;
mod laplace;
mod resolvent;
mod routes;
mod series;
mod source;
mod volterra;

pub use direct::{linear_vpl_mode, linear_vpl_mode_with, DirectOptions};
pub use kernel::{
    analytic_kernel_series, analytic_kernel_vp, compute_kernel, compute_kernel_with, kernel_datum,
    KERNEL_IMAG_TOL,
};
pub use laplace::{
    laplace_transform, penrose_margin, symmetric_tau_grid, LaplaceEvaluator, LaplaceSamples,
    LaplaceValue, PenroseReport, PENROSE_MAX_SPACING,
};
pub use resolvent::{resolvent_kernel, ResolventKernel, ResolventOptions, TAU_TRUNCATION_TOL};
pub use routes::{three_way, RouteOptions, ThreeWay};
pub use series::{write_density_csv, DensitySolution, KernelSeries, Provenance, TimeSeries};
pub use source::{source_from_data, source_with, Forcing, MAX_FORCING_SNAPSHOTS};
pub use volterra::{apply_resolvent, convolve, solve_volterra};
