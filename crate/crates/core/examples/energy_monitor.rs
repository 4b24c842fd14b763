//! The hypocoercive energy along a linear Landau run: definiteness on random
//! probes, then the largest theta with `E' + theta nu^{1/3} D <= 0`.

use vpl_landau::energy::EnergyParams;
use vpl_landau::experiment::pipelines::{collision_fields, hypocoercivity_point};

fn main() -> vpl_landau::Result<()> {
    let cf = collision_fields(6.0, 16)?;
    let k = [1, 0, 0];
    let params = EnergyParams::default();
    let def = params.check_definite(cf.grid(), k, 50, 7)?;
    println!("E / E_free on 50 probes: [{:.3}, {:.3}]", def.min_ratio, def.max_ratio);
    for nu in [1e-2, 1e-3] {
        let (report, series) = hypocoercivity_point(&cf, k, nu, 4.0, 0.05, &params)?;
        println!(
            "nu = {nu:e}: theta_hat = {:.4} at t = {:.2}; E(4)/E(0) = {:.4}",
            report.theta_hat.unwrap_or(f64::NAN),
            report.binding_time.unwrap_or(f64::NAN),
            series.energy.last().unwrap() / series.energy[0]
        );
    }
    Ok(())
}
