//! One Fourier mode of the linear Landau equation: the norm of `h_k` and its
//! e-folding time for a few collision frequencies, compared with `nu^{-1/3}`.

use std::sync::Arc;

use vpl_landau::experiment::pipelines::{collision_fields, mode_datum};
use vpl_landau::semigroup::{e_fold_time, evolve_mode, EvolutionConfig};

fn main() -> vpl_landau::Result<()> {
    let cf = collision_fields(6.0, 24)?;
    let k = [1, 0, 0];
    let h0 = mode_datum(cf.grid(), k);
    for nu in [1e-2, 1e-3] {
        let cfg = EvolutionConfig::new(k, nu, 30.0, 0.1)?.with_snapshot_stride(0);
        let traj = evolve_mode(&h0, &cfg, &Arc::clone(&cf))?;
        let tau = e_fold_time(&traj.times, &traj.norm_l2)
            .map_or_else(|| "beyond T".to_string(), |t| format!("{t:.2}"));
        println!(
            "nu = {nu:e}: |h(30)|/|h(0)| = {:.4}, e-fold time {tau}, nu^(-1/3) = {:.2}",
            traj.norm_l2.last().unwrap() / traj.norm_l2[0],
            nu.powf(-1.0 / 3.0)
        );
    }
    Ok(())
}
