use serde::{Deserialize, Serialize};

use super::combined::Selector;
use super::functional::{linear_dissipation, linear_energy};
use super::params::EnergyParams;
use crate::collision::CollisionFields;
use crate::error::{Error, Result};
use crate::semigroup::Trajectory;

/// Relative slack granted to the discrete energy inequality.
pub const MONITOR_TOL: f64 = 1e-6;

/// Reported instead of a number when the run demands no dissipation (`nu = 0`).
pub const NO_DISSIPATION: &str = "no dissipation demanded";

/// Outcome of [`hypocoercivity_monitor`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorReport {
    /// Largest `theta >= 0` with `E' + theta nu^{1/3} D <= tol` at every interior
    /// snapshot; `None` when the run carries no dissipation.
    pub theta_hat: Option<f64>,
    /// Snapshot time at which the bound on `theta` is attained.
    pub binding_time: Option<f64>,
    #[serde(rename = "A0")]
    pub a0: f64,
    pub nu: f64,
    pub k: [i64; 3],
    pub selector: Selector,
    /// `max |E_i / E_0 - 1|` over the snapshots.
    pub energy_drift: f64,
    pub note: Option<String>,
}

/// Per-snapshot energy, dissipation and their ratio bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorSeries {
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub dissipation: Vec<f64>,
    /// `theta_i` at interior samples, NaN at the endpoints.
    pub theta: Vec<f64>,
}

/// Evaluates the linear energy and dissipation on every snapshot of `traj`
/// and reads off the hypocoercivity constant
/// `d/dt |h|^2_E + theta nu^{1/3} |h|^2_D <= 0`.
///
/// `E'` is the second-order centred difference of the snapshot energies, so the
/// endpoints are never tested. Each interior sample gives the bound
/// `theta_i = (tol * scale_i - E'_i) / (nu^{1/3} D_i)` with
/// `scale_i = max(|E'_i|, nu^{1/3} D_i)`; `theta_hat` is their minimum clipped at 0.
/// The run's own `nu` replaces `params.nu`.
pub fn hypocoercivity_monitor(
    traj: &Trajectory,
    params: &EnergyParams,
    cf: &CollisionFields,
) -> Result<(MonitorReport, MonitorSeries)> {
    let params = params.clone().with_nu(traj.nu);
    params.validate()?;
    let snaps = &traj.snapshots;
    if snaps.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "the monitor needs at least 3 snapshots, got {}",
            snaps.len()
        )));
    }
    let dt = snaps[1].time - snaps[0].time;
    if !(dt > 0.0) || snaps.windows(2).any(|w| ((w[1].time - w[0].time) - dt).abs() > 1e-9 * dt.max(1.0)) {
        return Err(Error::InvalidArgument("snapshots must be uniformly spaced in time".into()));
    }
    let k = traj.k;
    let mut series = MonitorSeries {
        times: snaps.iter().map(|s| s.time).collect(),
        energy: Vec::with_capacity(snaps.len()),
        dissipation: Vec::with_capacity(snaps.len()),
        theta: vec![f64::NAN; snaps.len()],
    };
    for s in snaps {
        series.energy.push(linear_energy(&s.field, k, s.time, &params)?);
        series.dissipation.push(linear_dissipation(&s.field, k, s.time, &params, cf)?);
    }
    let e0 = series.energy[0];
    let energy_drift = series
        .energy
        .iter()
        .map(|e| if e0 > 0.0 { (e / e0 - 1.0).abs() } else { 0.0 })
        .fold(0.0, f64::max);
    let mut report = MonitorReport {
        theta_hat: None,
        binding_time: None,
        a0: params.a0,
        nu: params.nu,
        k,
        selector: Selector::linear(params.n_omega),
        energy_drift,
        note: None,
    };
    let rate = params.nu.cbrt();
    if rate == 0.0 {
        report.note = Some(NO_DISSIPATION.into());
        return Ok((report, series));
    }
    let mut best: Option<(f64, f64)> = None;
    for i in 1..snaps.len() - 1 {
        let de = (series.energy[i + 1] - series.energy[i - 1]) / (2.0 * dt);
        let d = rate * series.dissipation[i];
        if d <= 0.0 {
            continue;
        }
        let scale = de.abs().max(d);
        let theta = (MONITOR_TOL * scale - de) / d;
        series.theta[i] = theta;
        if best.map_or(true, |(b, _)| theta < b) {
            best = Some((theta, series.times[i]));
        }
    }
    match best {
        Some((theta, t)) => {
            report.theta_hat = Some(theta.max(0.0));
            report.binding_time = Some(t);
        }
        None => report.note = Some(NO_DISSIPATION.into()),
    }
    Ok((report, series))
}
