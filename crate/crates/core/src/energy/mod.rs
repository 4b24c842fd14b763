//! Hypocoercive energy functionals of a single mode, the monitor that reads
//! the hypocoercivity constant off a trajectory, the combined norm and the
//! Strain–Guo interpolation check.

mod combined;
mod functional;
mod monitor;
mod params;
mod strain_guo;

pub use functional::{
    linear_dissipation, linear_energy, mode_dissipation, mode_energy, mode_energy_parts, EnergyParts,
};
pub use combined::{combined_energy_norm, g_norm, CombinedNorm, CombinedTerm, Selector};
pub use monitor::{hypocoercivity_monitor, MonitorReport, MonitorSeries, MONITOR_TOL, NO_DISSIPATION};
pub use params::{DefinitenessReport, EnergyParams};
pub use strain_guo::{
    exact_construct, input_from_trajectory, poly_constant, poly_construct, sg_proof_bound, strain_guo_check,
    strain_guo_poly_check, PolyInput, PolyReport, StrainGuoInput, StrainGuoReport, SG_TOL,
};

/// Velocity derivatives a single energy term may spend: its own `d^beta Y^omega`
/// plus the one or two inside the energy form.
pub const DERIVATIVE_BUDGET: usize = 3;
