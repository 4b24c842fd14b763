//! The computations behind each experiment, callable without the CLI. Every
//! report knows the checks it must pass.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{EnhancedConfig, StrainGuoConfig};
use super::output::Check;
use crate::collision::{
    compute_sigma, invariant_floor, sigma_checks, symmetry_probe, CollisionFields, FloorReport, SigmaReport,
    SymmetryReport,
};
use crate::density::{
    analytic_kernel_series, compute_kernel, laplace_transform, linear_vpl_mode, penrose_margin, symmetric_tau_grid,
    DirectOptions, KernelSeries, PenroseReport,
};
use crate::energy::{
    exact_construct, hypocoercivity_monitor, input_from_trajectory, poly_construct, sg_proof_bound,
    strain_guo_check, strain_guo_poly_check, DefinitenessReport, EnergyParams, MonitorReport, MonitorSeries,
    PolyReport, StrainGuoReport,
};
use crate::error::{Error, Result};
use crate::phase_space::{build_grid, norm_sq, project_null, ModeField, VelocityGrid};
use crate::semigroup::{decay_fit, e_fold_time, evolve_mode, DecayModel, EvolutionConfig};
use crate::util::random_smooth_field;
use crate::C64;

/// Relative asymmetry allowed of `L` on random pairs.
pub const SYMMETRY_TOL: f64 = 1e-8;
/// Most negative admissible `<L g, g> / |g|^2`.
pub const COERCIVITY_TOL: f64 = 1e-8;
/// Admissible relative error of `sigma(0)`.
pub const SIGMA_ORIGIN_TOL: f64 = 1e-3;
/// Admissible relative spread of the `lambda` plateaus.
pub const PLATEAU_TOL: f64 = 0.03;
/// Relative L-infinity tolerance of the collisionless kernel against its closed form.
pub const KERNEL_ORACLE_TOL: f64 = 1e-3;
/// Window `[0, 10]` of that comparison.
pub const KERNEL_ORACLE_WINDOW: f64 = 10.0;
/// Relative tolerance of `L[K^0](0) = 2 pi^{3/2} / |k|^2`.
pub const LAPLACE_ANCHOR_TOL: f64 = 1e-3;
/// Admissible relative change of a Penrose margin when its frequency grid is halved.
pub const PENROSE_STABILITY_TOL: f64 = 0.01;
/// Admissible range of the fitted slope of `sup |K^nu - K^0|` against `nu`.
pub const CONTINUITY_SLOPE: (f64, f64) = (0.8, 1.2);
/// Time by which the collisionless density must have dropped.
pub const DAMPING_TIME: f64 = 12.0;
/// Fraction of its maximum that the density must drop below.
pub const DAMPING_RATIO: f64 = 1e-3;
/// Smallest admissible power-law exponent of the density envelope.
pub const DAMPING_EXPONENT: f64 = 3.0;
/// Admissible range of the enhanced-dissipation exponent for `k != 0`.
pub const ENHANCED_RANGE: (f64, f64) = (0.28, 0.38);
/// Admissible range of the decay exponent for `k = 0`.
pub const ZERO_MODE_RANGE: (f64, f64) = (0.9, 1.1);
/// Largest admissible relative spread `(max - min) / max` of `theta_hat` across a sweep.
pub const THETA_SPREAD_TOL: f64 = 0.5;

fn k_sq(k: [i64; 3]) -> f64 {
    k.iter().map(|&x| (x * x) as f64).sum()
}

fn k_label(k: [i64; 3]) -> String {
    format!("k=({},{},{})", k[0], k[1], k[2])
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).map(|(a, b)| (a.ln(), b.ln())).collect();
    let n = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0 / n, b + p.1 / n));
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// `sqrt(mu) (1 + v_1)`: a density perturbation plus a momentum perturbation.
pub fn mode_datum(grid: &Arc<VelocityGrid>, k: [i64; 3]) -> ModeField {
    ModeField::from_fn(grid.clone(), k, |v| C64::new(1.0 + v[0], 0.0) * (-0.5 * norm_sq(v)).exp())
}

/// `v_1 v_2 sqrt(mu)`: orthogonal to the collision invariants.
pub fn shear_datum(grid: &Arc<VelocityGrid>) -> ModeField {
    ModeField::from_fn(grid.clone(), [0; 3], |v| C64::new(v[0] * v[1], 0.0) * (-0.5 * norm_sq(v)).exp())
}

pub fn collision_fields(half_width: f64, n: usize) -> Result<Arc<CollisionFields>> {
    Ok(Arc::new(compute_sigma(Arc::new(build_grid(half_width, n)?))?))
}

// ---------------------------------------------------------------- self-test

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SelftestReport {
    pub half_width: f64,
    pub n: usize,
    pub symmetry: SymmetryReport,
    pub sigma: SigmaReport,
    /// Invariant floors in increasing `N`.
    pub floors: Vec<FloorReport>,
}

impl SelftestReport {
    /// Whether the floors strictly decrease under refinement.
    pub fn floors_decrease(&self) -> bool {
        self.floors.windows(2).all(|w| w[1].floor < w[0].floor) && self.floors.iter().all(|f| f.floor.is_finite())
    }

    pub fn operator_checks(&self) -> Vec<Check> {
        let mut out = vec![
            Check::at_most("L symmetry on random pairs", self.symmetry.max_asymmetry, SYMMETRY_TOL),
            Check::at_least("min <Lg,g>/|g|^2", self.symmetry.min_coercivity, -COERCIVITY_TOL),
        ];
        for f in &self.floors {
            let worst = f.ratios.iter().cloned().fold(0.0, f64::max);
            out.push(Check::holds(
                format!("invariants within floor at N={}", f.n),
                f.floor,
                "max_b |Lb|/|b| <= floor",
                worst <= f.floor && f.floor.is_finite(),
            ));
        }
        let grids: Vec<String> = self.floors.iter().map(|f| f.n.to_string()).collect();
        out.push(Check::holds(
            format!("floor decreases over N={}", grids.join(",")),
            self.floors.last().map_or(f64::NAN, |f| f.floor) / self.floors.first().map_or(f64::NAN, |f| f.floor),
            "strictly decreasing",
            self.floors_decrease(),
        ));
        out
    }

    pub fn sigma_checks(&self) -> Vec<Check> {
        vec![
            Check::at_most("sigma(0) vs (4pi/3) I", self.sigma.origin_error, SIGMA_ORIGIN_TOL),
            Check::below("lambda_1 |v|^3 plateau spread", self.sigma.lambda1_spread, PLATEAU_TOL),
            Check::below("lambda_2 |v| plateau spread", self.sigma.lambda2_spread, PLATEAU_TOL),
        ]
    }

    pub fn checks(&self) -> Vec<Check> {
        let mut c = self.operator_checks();
        c.extend(self.sigma_checks());
        c
    }
}

/// Symmetry and sign of `L` on `pairs` seeded pairs and the `sigma` checks on
/// the grid `(half_width, n)`, plus the invariant floor on each of `floor_grids`.
pub fn operator_selftest(
    half_width: f64,
    n: usize,
    floor_grids: &[usize],
    pairs: usize,
    seed: u64,
) -> Result<SelftestReport> {
    let cf = collision_fields(half_width, n)?;
    let symmetry = symmetry_probe(&cf, pairs, seed)?;
    let sigma = sigma_checks(&cf)?;
    let mut grids = floor_grids.to_vec();
    grids.sort_unstable();
    grids.dedup();
    let floors = grids
        .par_iter()
        .map(|&m| {
            if m == n {
                invariant_floor(&cf)
            } else {
                invariant_floor(&collision_fields(half_width, m)?)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SelftestReport {
        half_width,
        n,
        symmetry,
        sigma,
        floors,
    })
}

// ------------------------------------------------------ kernel convergence

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContinuityPoint {
    pub nu: f64,
    /// `sup_t |K^nu(t) - K^0(t)|` on the run window.
    pub sup_difference: f64,
    pub kernel: KernelSeries,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContinuityReport {
    pub k: [i64; 3],
    pub t_final: f64,
    pub reference: KernelSeries,
    pub points: Vec<ContinuityPoint>,
    /// Slope of `ln sup |K^nu - K^0|` against `ln nu`.
    pub slope: f64,
}

impl ContinuityReport {
    pub fn checks(&self) -> Vec<Check> {
        vec![Check::within(
            format!("{} slope of sup|K^nu - K^0| vs nu", k_label(self.k)),
            self.slope,
            CONTINUITY_SLOPE.0,
            CONTINUITY_SLOPE.1,
        )]
    }
}

/// Kernels at each `nu` and at `nu = 0` on the same grid and time steps, and
/// the rate at which they converge.
pub fn kernel_convergence(
    cf: &Arc<CollisionFields>,
    k: [i64; 3],
    nus: &[f64],
    t_final: f64,
    dt: f64,
) -> Result<ContinuityReport> {
    let mut all = vec![0.0];
    all.extend_from_slice(nus);
    let kernels = all
        .par_iter()
        .map(|&nu| compute_kernel(k, nu, t_final, dt, cf))
        .collect::<Result<Vec<_>>>()?;
    let reference = kernels[0].clone();
    let points: Vec<ContinuityPoint> = nus
        .iter()
        .zip(kernels.into_iter().skip(1))
        .map(|(&nu, kernel)| ContinuityPoint {
            nu,
            sup_difference: kernel
                .series
                .values
                .iter()
                .zip(&reference.series.values)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max),
            kernel,
        })
        .collect();
    let slope = loglog_slope(
        &points.iter().map(|p| p.nu).collect::<Vec<_>>(),
        &points.iter().map(|p| p.sup_difference).collect::<Vec<_>>(),
    );
    Ok(ContinuityReport {
        k,
        t_final,
        reference,
        points,
        slope,
    })
}

// ------------------------------------------------------------ penrose scan

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PenrosePoint {
    pub k: [i64; 3],
    pub nu: f64,
    pub coarse: PenroseReport,
    /// The same scan on a frequency grid of half the spacing.
    pub fine: PenroseReport,
    /// `|kappa_coarse - kappa_fine| / kappa_fine`.
    pub relative_change: f64,
    /// `L[K](0)`.
    pub laplace_at_zero: f64,
    /// Relative L-infinity distance to the closed-form kernel on `[0, 10]`
    /// when `nu = 0`.
    pub oracle_error: Option<f64>,
    pub kernel: KernelSeries,
}

impl PenrosePoint {
    /// `L[K^0](0) = int pi^{3/2} t e^{-|k|^2 t^2 / 4} dt = 2 pi^{3/2} / |k|^2`.
    pub fn laplace_anchor(&self) -> f64 {
        2.0 * std::f64::consts::PI.powf(1.5) / k_sq(self.k)
    }

    pub fn margin_checks(&self) -> Vec<Check> {
        let tag = format!("{} nu={}", k_label(self.k), self.nu);
        vec![
            Check::above(format!("penrose margin {tag}"), self.fine.kappa, 0.0),
            Check::below(format!("margin change under tau halving {tag}"), self.relative_change, PENROSE_STABILITY_TOL),
        ]
    }

    pub fn oracle_checks(&self) -> Vec<Check> {
        let mut out = vec![];
        if let Some(e) = self.oracle_error {
            out.push(Check::at_most(
                format!("kernel vs pi^(3/2) t exp(-|k|^2 t^2/4) {}", k_label(self.k)),
                e,
                KERNEL_ORACLE_TOL,
            ));
            let anchor = self.laplace_anchor();
            out.push(Check::at_most(
                format!("L[K^0](0) vs 2pi^(3/2)/|k|^2 {}", k_label(self.k)),
                (self.laplace_at_zero - anchor).abs() / anchor,
                LAPLACE_ANCHOR_TOL,
            ));
        }
        out
    }

    pub fn checks(&self) -> Vec<Check> {
        let mut c = self.oracle_checks();
        c.extend(self.margin_checks());
        c
    }
}

/// Kernel, Laplace anchor and Penrose margin of one `(k, nu)`, with the margin
/// recomputed on a frequency grid of half the spacing.
pub fn penrose_point(
    cf: &Arc<CollisionFields>,
    k: [i64; 3],
    nu: f64,
    t_final: f64,
    dt: f64,
    tau_max: f64,
    spacing: f64,
) -> Result<PenrosePoint> {
    let kernel = compute_kernel(k, nu, t_final, dt, cf)?;
    let coarse = penrose_margin(&kernel, &symmetric_tau_grid(tau_max, spacing))?;
    let fine = penrose_margin(&kernel, &symmetric_tau_grid(tau_max, spacing / 2.0))?;
    let laplace_at_zero = laplace_transform(&kernel, C64::new(0.0, 0.0))?.value.re;
    let oracle_error = if nu == 0.0 {
        let len = ((KERNEL_ORACLE_WINDOW.min(t_final) / dt).round() as usize + 1).min(kernel.series.len());
        let exact = analytic_kernel_series(k, dt, len)?;
        let window = crate::density::TimeSeries::new(dt, kernel.series.values[..len].to_vec())?;
        Some(window.relative_linf(&exact.series)?)
    } else {
        None
    };
    Ok(PenrosePoint {
        k,
        nu,
        relative_change: (coarse.kappa - fine.kappa).abs() / fine.kappa,
        coarse,
        fine,
        laplace_at_zero,
        oracle_error,
        kernel,
    })
}

// ---------------------------------------------------------- Landau damping

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DampingReport {
    pub k: [i64; 3],
    pub times: Vec<f64>,
    pub rho: Vec<C64>,
    /// `max_{s >= t} |rho(s)|`.
    pub envelope: Vec<f64>,
    pub peak: f64,
    /// `max_{t >= 12} |rho| / max |rho|`; NaN when the run ends before `t = 12`.
    pub late_ratio: f64,
    /// Power-law exponent fitted to the envelope for `t >= 2 / |k|`.
    pub exponent: f64,
}

impl DampingReport {
    pub fn checks(&self) -> Vec<Check> {
        let tag = k_label(self.k);
        vec![
            Check::at_most(format!("|rho(t>=12)|/max|rho| {tag}"), self.late_ratio, DAMPING_RATIO),
            Check::at_least(format!("envelope power-law exponent {tag}"), self.exponent, DAMPING_EXPONENT),
        ]
    }
}

/// The collisionless coupled mode started from `f0 = sqrt(mu)`.
pub fn landau_damping(cf: &Arc<CollisionFields>, k: [i64; 3], t_final: f64, dt: f64) -> Result<DampingReport> {
    let f0 = ModeField::sqrt_maxwellian(cf.grid().clone(), k);
    let sol = linear_vpl_mode(&f0, k, 0.0, t_final, dt, cf, &DirectOptions::default())?;
    let times = sol.rho.times();
    let rho = sol.rho.values.clone();
    let mut envelope: Vec<f64> = rho.iter().map(|z| z.norm()).collect();
    for i in (0..envelope.len().saturating_sub(1)).rev() {
        envelope[i] = envelope[i].max(envelope[i + 1]);
    }
    let peak = envelope.first().copied().unwrap_or(0.0);
    let late_ratio = match times.iter().position(|&t| t >= DAMPING_TIME - 1e-9) {
        Some(i) if peak > 0.0 => envelope[i] / peak,
        _ => f64::NAN,
    };
    let exponent = decay_fit(&times, &envelope, DecayModel::Power, 2.0 / k_sq(k).sqrt())?.rate;
    Ok(DampingReport {
        k,
        times,
        rho,
        envelope,
        peak,
        late_ratio,
        exponent,
    })
}

// --------------------------------------------------- enhanced dissipation

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayPoint {
    pub k: [i64; 3],
    pub nu: f64,
    pub t_final: f64,
    pub dt: f64,
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    /// First time at which `|h|` has dropped by `e`.
    pub e_fold: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RateFit {
    pub k: [i64; 3],
    /// Exponent `a` in `tau ~ nu^{-a}`.
    pub a: f64,
    pub points: usize,
    /// Sweep points whose run ended before the e-fold.
    pub missing: usize,
}

impl RateFit {
    pub fn check(&self) -> Check {
        let (lo, hi) = if self.k == [0; 3] { ZERO_MODE_RANGE } else { ENHANCED_RANGE };
        let mut c = Check::within(format!("e-fold exponent {}", k_label(self.k)), self.a, lo, hi);
        if self.missing > 0 {
            c.passed = false;
            c.criterion = format!("{}; {} runs never e-folded", c.criterion, self.missing);
        }
        c
    }
}

/// Step and horizon of one sweep point. A `k != 0` run lasts
/// `horizon nu^{-1/3}` rounded up to whole steps; a `k = 0` run lasts
/// `zero_mode_horizon / nu` in `zero_mode_steps` steps.
pub fn decay_schedule(k: [i64; 3], nu: f64, dt: f64, t_final: Option<f64>, s: &EnhancedConfig) -> (f64, f64) {
    if k == [0; 3] {
        let t = s.zero_mode_horizon / nu;
        (t, t / s.zero_mode_steps as f64)
    } else {
        let t = t_final.unwrap_or_else(|| (s.horizon * nu.powf(-1.0 / 3.0) / dt).ceil() * dt);
        (t, dt)
    }
}

/// `|h(t)|` of the linear Landau mode: from [`mode_datum`] when `k != 0` and
/// from [`shear_datum`] when `k = 0`.
pub fn decay_point(cf: &Arc<CollisionFields>, k: [i64; 3], nu: f64, t_final: f64, dt: f64) -> Result<DecayPoint> {
    let h0 = if k == [0; 3] { shear_datum(cf.grid()) } else { mode_datum(cf.grid(), k) };
    let cfg = EvolutionConfig::new(k, nu, t_final, dt)?.with_snapshot_stride(0).without_dissipation();
    let traj = evolve_mode(&h0, &cfg, cf)?;
    Ok(DecayPoint {
        k,
        nu,
        t_final,
        dt,
        e_fold: e_fold_time(&traj.times, &traj.norm_l2),
        times: traj.times,
        norms: traj.norm_l2,
    })
}

/// Fits `tau ~ nu^{-a}` per mode over the points that e-folded.
pub fn fit_rates(points: &[DecayPoint]) -> Vec<RateFit> {
    let mut modes: Vec<[i64; 3]> = vec![];
    for p in points {
        if !modes.contains(&p.k) {
            modes.push(p.k);
        }
    }
    modes
        .into_iter()
        .map(|k| {
            let of_mode: Vec<&DecayPoint> = points.iter().filter(|p| p.k == k).collect();
            let done: Vec<(f64, f64)> = of_mode.iter().filter_map(|p| p.e_fold.map(|t| (p.nu, t))).collect();
            let a = if done.len() >= 2 {
                -loglog_slope(
                    &done.iter().map(|d| d.0).collect::<Vec<_>>(),
                    &done.iter().map(|d| d.1).collect::<Vec<_>>(),
                )
            } else {
                f64::NAN
            };
            RateFit {
                k,
                a,
                points: done.len(),
                missing: of_mode.len() - done.len(),
            }
        })
        .collect()
}

// --------------------------------------------------------- hypocoercivity

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HypocoercivityReport {
    pub definiteness: DefinitenessReport,
    pub runs: Vec<(MonitorReport, MonitorSeries)>,
}

impl HypocoercivityReport {
    /// `(max - min) / max` of `theta_hat` over the sweep.
    pub fn theta_spread(&self) -> f64 {
        let th: Vec<f64> = self.runs.iter().map(|r| r.0.theta_hat.unwrap_or(f64::NAN)).collect();
        let hi = th.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = th.iter().cloned().fold(f64::INFINITY, f64::min);
        if th.iter().any(|t| t.is_nan()) {
            f64::NAN
        } else {
            (hi - lo) / hi
        }
    }

    pub fn checks(&self) -> Vec<Check> {
        let mut out = vec![Check::above(
            format!("energy definite on {} probes (min E/E_free)", self.definiteness.probes),
            self.definiteness.min_ratio,
            0.0,
        )];
        for (r, _) in &self.runs {
            out.push(Check::above(
                format!("theta_hat {} nu={}", k_label(r.k), r.nu),
                r.theta_hat.unwrap_or(f64::NAN),
                0.0,
            ));
        }
        out.push(Check::below("theta_hat spread across nu", self.theta_spread(), THETA_SPREAD_TOL));
        out
    }
}

/// The monitor on one linear Landau run from [`mode_datum`], sampled every step.
pub fn hypocoercivity_point(
    cf: &Arc<CollisionFields>,
    k: [i64; 3],
    nu: f64,
    t_final: f64,
    dt: f64,
    params: &EnergyParams,
) -> Result<(MonitorReport, MonitorSeries)> {
    let cfg = EvolutionConfig::new(k, nu, t_final, dt)?.with_snapshot_stride(1);
    let traj = evolve_mode(&mode_datum(cf.grid(), k), &cfg, cf)?;
    hypocoercivity_monitor(&traj, params, cf)
}

/// Definiteness of the energy on seeded probes, then the monitor at every `nu`.
#[allow(clippy::too_many_arguments)]
pub fn hypocoercivity_sweep(
    cf: &Arc<CollisionFields>,
    k: [i64; 3],
    nus: &[f64],
    t_final: f64,
    dt: f64,
    params: &EnergyParams,
    probes: usize,
    seed: u64,
) -> Result<HypocoercivityReport> {
    let definiteness = params.check_definite(cf.grid(), k, probes, seed)?;
    let runs = nus
        .par_iter()
        .map(|&nu| hypocoercivity_point(cf, k, nu, t_final, dt, params))
        .collect::<Result<Vec<_>>>()?;
    Ok(HypocoercivityReport { definiteness, runs })
}

// ------------------------------------------------------------ Strain-Guo

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstructCase {
    pub m: f64,
    pub report: StrainGuoReport,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolyCase {
    pub m: f64,
    pub report: PolyReport,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrajectoryCase {
    pub k: [i64; 3],
    pub nu: f64,
    /// Rate measured on the trajectory.
    pub c: f64,
    pub report: StrainGuoReport,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StrainGuoSuite {
    pub exact: Vec<ConstructCase>,
    pub poly: Vec<PolyCase>,
    pub trajectory: Option<TrajectoryCase>,
}

impl StrainGuoSuite {
    pub fn construct_checks(&self) -> Vec<Check> {
        let mut out = vec![];
        for e in &self.exact {
            out.push(Check::holds(
                format!("closed-form construct m={} C (proof bound {:.4})", e.m, e.report.proof_bound),
                e.report.c_const,
                "finite and <= proof bound",
                e.report.c_const.is_finite() && e.report.c_const <= e.report.proof_bound,
            ));
        }
        out
    }

    pub fn poly_checks(&self) -> Vec<Check> {
        self.poly
            .iter()
            .map(|p| Check::at_most(format!("poly variant m={} <ct>^3 int g^2 / C", p.m), p.report.ratio, p.report.bound))
            .collect()
    }

    pub fn checks(&self) -> Vec<Check> {
        let mut out = self.construct_checks();
        out.extend(self.poly_checks());
        if let Some(t) = &self.trajectory {
            out.push(Check::holds(
                format!("Landau trajectory {} nu={} C", k_label(t.k), t.nu),
                t.report.c_const,
                "hypotheses hold, C finite",
                t.report.c_const.is_finite() && t.report.hypothesis_residual <= 0.0,
            ));
        }
        out
    }
}

/// Smooth random datum of mode `k` with its collision-invariant part removed.
pub fn relaxing_datum(grid: &Arc<VelocityGrid>, k: [i64; 3], seed: u64) -> Result<ModeField> {
    let g = random_smooth_field(grid, seed, 0, false);
    let g = g.sub(&project_null(&g)?)?;
    ModeField::new(grid.clone(), g.into_values(), k)
}

/// Lemma data read off a linear Landau run from [`relaxing_datum`], sampled
/// every `stride` steps.
#[allow(clippy::too_many_arguments)]
pub fn strain_guo_trajectory(
    cf: &Arc<CollisionFields>,
    k: [i64; 3],
    nu: f64,
    t_final: f64,
    dt: f64,
    stride: usize,
    sg: &StrainGuoConfig,
    seed: u64,
) -> Result<TrajectoryCase> {
    let m = *sg
        .m
        .first()
        .ok_or_else(|| Error::InvalidArgument("no moment loss m configured".into()))?;
    let cfg = EvolutionConfig::new(k, nu, t_final, dt)?.with_snapshot_stride(stride).without_dissipation();
    let traj = evolve_mode(&relaxing_datum(cf.grid(), k, seed)?, &cfg, cf)?;
    let input = input_from_trajectory(&traj, m, sg.q, sg.p)?;
    Ok(TrajectoryCase {
        k,
        nu,
        c: input.c,
        report: strain_guo_check(&input)?,
    })
}

/// The closed-form constructs for every `m`, the polynomial variant and,
/// when `run` is given, the lemma on a linear Landau trajectory.
pub fn strain_guo_suite(
    sg: &StrainGuoConfig,
    run: Option<(&Arc<CollisionFields>, [i64; 3], f64, f64, f64, u64)>,
) -> Result<StrainGuoSuite> {
    let times: Vec<f64> = (0..sg.samples)
        .map(|i| sg.t_final * i as f64 / (sg.samples - 1) as f64)
        .collect();
    let exact = sg
        .m
        .iter()
        .map(|&m| {
            let report = strain_guo_check(&exact_construct(sg.c, m, sg.q, sg.p, &times)?)?;
            debug_assert_eq!(report.proof_bound, sg_proof_bound(sg.q, m));
            Ok(ConstructCase { m, report })
        })
        .collect::<Result<Vec<_>>>()?;
    let poly = sg
        .m
        .iter()
        .map(|&m| {
            Ok(PolyCase {
                m,
                report: strain_guo_poly_check(&poly_construct(sg.c, m, &times))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let trajectory = match run {
        Some((cf, k, nu, t_final, dt, seed)) => Some(strain_guo_trajectory(cf, k, nu, t_final, dt, 1, sg, seed)?),
        None => None,
    };
    Ok(StrainGuoSuite {
        exact,
        poly,
        trajectory,
    })
}
