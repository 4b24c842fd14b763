//! The density of one mode by three independent routes: the coupled
//! Vlasov-Poisson-Landau solve, the Volterra equation `rho + K * rho = N`
//! and the resolvent representation. A coarse grid keeps this quick.

use vpl_landau::density::{three_way, RouteOptions};
use vpl_landau::experiment::pipelines::collision_fields;
use vpl_landau::semigroup::EvolutionConfig;
use vpl_landau::ModeField;

fn main() -> vpl_landau::Result<()> {
    let cf = collision_fields(6.0, 24)?;
    let k = [2, 0, 0];
    let f0 = ModeField::sqrt_maxwellian(cf.grid().clone(), k);
    let cfg = EvolutionConfig::new(k, 1e-3, 8.0, 0.05)?;
    let r = three_way(&f0, &cfg, &cf, &RouteOptions::default())?;
    println!("Penrose margin {:.4} at tau = {:.3}", r.penrose.kappa, r.penrose.argmin_tau);
    println!(
        "relative Linf differences: direct/Volterra {:.2e}, direct/resolvent {:.2e}, Volterra/resolvent {:.2e}",
        r.differences[0], r.differences[1], r.differences[2]
    );
    for i in (0..r.direct.rho.len()).step_by(20) {
        println!("t = {:4.1}  |rho| = {:.4e}", r.direct.rho.time(i), r.direct.rho.values[i].norm());
    }
    Ok(())
}
