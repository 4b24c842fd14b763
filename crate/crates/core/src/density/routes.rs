use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::direct::{linear_vpl_mode_with, DirectOptions};
use super::kernel::compute_kernel_with;
use super::resolvent::{resolvent_kernel, ResolventOptions};
use super::series::{DensitySolution, KernelSeries};
use super::source::source_with;
use super::volterra::{apply_resolvent, solve_volterra};
use super::PenroseReport;
use crate::collision::{CollisionFields, LandauOperator};
use crate::error::Result;
use crate::phase_space::ModeField;
use crate::semigroup::EvolutionConfig;

/// Settings shared by the three density routes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RouteOptions {
    /// Cubic Hermite refinement of `K` and `N` before the Volterra marching.
    pub refine: usize,
    pub resolvent: ResolventOptions,
    pub direct: DirectOptions,
}

impl Default for RouteOptions {
    fn default() -> Self {
        Self {
            refine: 20,
            resolvent: ResolventOptions::default(),
            direct: DirectOptions::default(),
        }
    }
}

/// `rho_k` by the direct coupled solve, the Volterra equation and the
/// resolvent representation, all on the outer time grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ThreeWay {
    pub kernel: KernelSeries,
    pub penrose: PenroseReport,
    pub direct: DensitySolution,
    pub volterra: DensitySolution,
    pub resolvent: DensitySolution,
    /// Pairwise relative L-infinity differences: direct/volterra,
    /// direct/resolvent, volterra/resolvent.
    pub differences: [f64; 3],
}

impl ThreeWay {
    pub fn max_difference(&self) -> f64 {
        self.differences.iter().copied().fold(0.0, f64::max)
    }
}

/// Runs the three routes for initial datum `f0` with the run parameters of `cfg`.
pub fn three_way(
    f0: &ModeField,
    cfg: &EvolutionConfig,
    cf: &Arc<CollisionFields>,
    opts: &RouteOptions,
) -> Result<ThreeWay> {
    let op = LandauOperator::new(cf.clone())?;
    let quiet = cfg.clone().with_snapshot_stride(0).without_dissipation();
    let kernel = compute_kernel_with(&quiet, &op)?;
    let source = source_with(f0, None, &quiet, &op)?;
    let direct = linear_vpl_mode_with(f0, &quiet, &op, &opts.direct)?;

    let r = opts.refine.max(1);
    let fine_kernel = kernel.refined(r);
    let fine_source = source.refine(r);
    let mut volterra = solve_volterra(&fine_kernel, &fine_source)?;
    let g = resolvent_kernel(&kernel, &opts.resolvent)?;
    let mut resolvent = apply_resolvent(&g.series.refine(r), &fine_source)?;
    for sol in [&mut volterra, &mut resolvent] {
        sol.rho = sol.rho.subsample(r);
        sol.source = Some(source.clone());
    }
    let differences = [
        direct.rho.relative_linf(&volterra.rho)?,
        direct.rho.relative_linf(&resolvent.rho)?,
        volterra.rho.relative_linf(&resolvent.rho)?,
    ];
    Ok(ThreeWay {
        kernel,
        penrose: g.penrose,
        direct,
        volterra,
        resolvent,
        differences,
    })
}
