//! Weighted norms, the macroscopic projection and the spectral velocity
//! derivative on a `[-6, 6]^3` grid with 24 cells per axis.

use std::sync::Arc;

use vpl_landau::phase_space::{norm_sq, project_null, weighted_norm, DerivativeScheme, Differentiator};
use vpl_landau::{build_grid, ModeField, WeightSpec, C64};

fn main() -> vpl_landau::Result<()> {
    let grid = Arc::new(build_grid(6.0, 24)?);
    let h = ModeField::sqrt_maxwellian(grid.clone(), [1, 0, 0]);

    // |sqrt(mu)|^2 = pi^{3/2}; the Gaussian weight with q = 1/2 gives (2 pi)^{3/2}
    let plain = weighted_norm(&h, &WeightSpec::polynomial(0.0))?;
    let gauss = weighted_norm(&h, &WeightSpec::new(0.0, 2, 0.5)?)?;
    println!("|sqrt(mu)|       = {plain:.10} (exact {:.10})", std::f64::consts::PI.powf(0.75));
    println!("|sqrt(mu)|_q=1/2 = {gauss:.10} (exact {:.10})", (2.0 * std::f64::consts::PI).powf(0.75));

    // a field with a non-conserved part: (1 + v1 + v1 v2) sqrt(mu)
    let g = ModeField::from_fn(grid.clone(), [0; 3], |v| {
        C64::new(1.0 + v[0] + v[0] * v[1], 0.0) * (-0.5 * norm_sq(v)).exp()
    });
    let p = project_null(&g)?;
    println!("|P g| / |g| = {:.6}, |(I - P) g| / |g| = {:.6}", p.norm() / g.norm(), g.sub(&p)?.norm() / g.norm());

    // d/dv1 sqrt(mu) = -v1 sqrt(mu), with the spectral and the fourth-order stencil
    let exact: Vec<C64> = grid.sample(|v| C64::new(-v[0] * (-0.5 * norm_sq(v)).exp(), 0.0));
    for scheme in [DerivativeScheme::Spectral, DerivativeScheme::Fd4] {
        let d = Differentiator::new(&grid, scheme).derivative(h.values(), 0, 0.0);
        let err = d.iter().zip(&exact).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        println!("{scheme:?} derivative max error {err:.2e}");
    }
    Ok(())
}
