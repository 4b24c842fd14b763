//! The collision matrix sigma and the linearised Landau operator: closed-form
//! checks, symmetry, sign and the residual on the collision invariants.

use vpl_landau::collision::{invariant_floor, sigma_checks, symmetry_probe};
use vpl_landau::experiment::pipelines::collision_fields;

fn main() -> vpl_landau::Result<()> {
    let cf = collision_fields(6.0, 24)?;
    let s = sigma_checks(&cf)?;
    println!("sigma(0) relative error vs (4 pi/3) I: {:.2e}", s.origin_error);
    println!(
        "plateau spreads on 4 <= |v| <= 5.5: lambda_1 |v|^3 {:.2e}, lambda_2 |v| {:.2e} ({} nodes)",
        s.lambda1_spread, s.lambda2_spread, s.shell_nodes
    );
    let (c0, c1) = cf.bound_constants();
    println!("|sigma| <= {c0:.3} <v>^-1, |d sigma| <= {c1:.3} <v>^-2");

    let sym = symmetry_probe(&cf, 10, 1)?;
    println!(
        "10 random pairs: asymmetry {:.2e}, smallest <Lg,g>/|g|^2 {:.4}",
        sym.max_asymmetry, sym.min_coercivity
    );
    let floor = invariant_floor(&cf)?;
    let ratios: Vec<String> = floor.ratios.iter().map(|r| format!("{r:.2e}")).collect();
    println!("|L b|/|b| on the invariants at N = {}: [{}]", floor.n, ratios.join(", "));
    Ok(())
}
