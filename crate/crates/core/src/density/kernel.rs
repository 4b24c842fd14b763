use std::sync::Arc;

use super::series::{KernelSeries, TimeSeries};
use crate::collision::{CollisionFields, CollisionOperator, LandauOperator};
use crate::error::{Error, Result};
use crate::phase_space::{norm_sq, ModeField, VelocityGrid};
use crate::semigroup::{evolve_with, EvolutionConfig};
use crate::C64;

/// Largest tolerated `max |Im K| / max |K|` before the kernel is rejected.
pub const KERNEL_IMAG_TOL: f64 = 1e-6;

fn k_sq(k: [i64; 3]) -> f64 {
    k.iter().map(|&x| (x * x) as f64).sum()
}

fn require_nonzero(k: [i64; 3]) -> Result<()> {
    if k == [0; 3] {
        return Err(Error::InvalidArgument("the density kernel needs k != 0".into()));
    }
    Ok(())
}

/// `(k.v) sqrt(mu)` as a field of mode `k`.
pub fn kernel_datum(grid: &Arc<VelocityGrid>, k: [i64; 3]) -> ModeField {
    let kf = k.map(|x| x as f64);
    ModeField::from_fn(grid.clone(), k, |v| {
        C64::new(
            (kf[0] * v[0] + kf[1] * v[1] + kf[2] * v[2]) * (-0.5 * norm_sq(v)).exp(),
            0.0,
        )
    })
}

/// The collisionless kernel `pi^{3/2} t e^{-|k|^2 t^2 / 4}`.
pub fn analytic_kernel_vp(k: [i64; 3], t: f64) -> Result<f64> {
    require_nonzero(k)?;
    Ok(std::f64::consts::PI.powf(1.5) * t * (-k_sq(k) * t * t / 4.0).exp())
}

/// `K_k(t) = (2 i / |k|^2) int S_k(t)[(k.v) sqrt(mu)] sqrt(mu) dv` with the
/// Landau operator built from `cf`.
pub fn compute_kernel(
    k: [i64; 3],
    nu: f64,
    t_final: f64,
    dt: f64,
    cf: &Arc<CollisionFields>,
) -> Result<KernelSeries> {
    let cfg = EvolutionConfig::new(k, nu, t_final, dt)?
        .with_snapshot_stride(0)
        .without_dissipation();
    compute_kernel_with(&cfg, &LandauOperator::new(cf.clone())?)
}

/// [`compute_kernel`] for an arbitrary run configuration and operator.
///
/// The kernel of an even background is real; the imaginary part left by the
/// discretisation is measured, rejected above [`KERNEL_IMAG_TOL`] and dropped.
pub fn compute_kernel_with(cfg: &EvolutionConfig, op: &dyn CollisionOperator) -> Result<KernelSeries> {
    require_nonzero(cfg.k)?;
    let grid = op.grid();
    let traj = evolve_with(&kernel_datum(grid, cfg.k), cfg, op)?;
    let factor = C64::new(0.0, 2.0 / k_sq(cfg.k));
    let raw: Vec<C64> = traj.rho.iter().map(|r| r * factor).collect();
    let max = raw.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let max_im = raw.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let imag_residue = if max > 0.0 { max_im / max } else { 0.0 };
    if imag_residue > KERNEL_IMAG_TOL {
        return Err(Error::KernelNotReal { ratio: imag_residue });
    }
    let values = raw.iter().map(|z| C64::new(z.re, 0.0)).collect();
    Ok(KernelSeries {
        k: cfg.k,
        nu: cfg.nu,
        series: TimeSeries::new(cfg.dt, values)?,
        imag_residue,
        grid_half_width: grid.half_width(),
        grid_n: grid.n(),
        scheme: op.scheme(),
    })
}

/// The collisionless kernel sampled like a computed one (no grid attached).
pub fn analytic_kernel_series(k: [i64; 3], dt: f64, len: usize) -> Result<KernelSeries> {
    require_nonzero(k)?;
    let c = std::f64::consts::PI.powf(1.5);
    let ks = k_sq(k);
    Ok(KernelSeries {
        k,
        nu: 0.0,
        series: TimeSeries::from_fn(dt, len, |t| C64::new(c * t * (-ks * t * t / 4.0).exp(), 0.0)),
        imag_residue: 0.0,
        grid_half_width: f64::INFINITY,
        grid_n: 0,
        scheme: Default::default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collision::compute_sigma;
    use crate::phase_space::build_grid;
    use std::f64::consts::PI;

    #[test]
    fn analytic_values() {
        assert_eq!(analytic_kernel_vp([1, 0, 0], 0.0).unwrap(), 0.0);
        let t = 2f64.sqrt();
        let expected = PI.powf(1.5) * t * (-0.5f64).exp();
        assert!((analytic_kernel_vp([1, 0, 0], t).unwrap() - expected).abs() < 1e-14);
        // K_{2k}(t) = K_k(2t) / 2
        for t in [0.3, 1.1, 2.5] {
            let a = analytic_kernel_vp([2, 0, 0], t).unwrap();
            let b = analytic_kernel_vp([1, 0, 0], 2.0 * t).unwrap() / 2.0;
            assert!((a - b).abs() < 1e-14);
        }
        assert!(analytic_kernel_vp([0, 0, 0], 1.0).is_err());
    }

    #[test]
    fn peak_location_and_height() {
        // maximum at t* = sqrt(2)/|k|, height pi^{3/2} sqrt(2/e) / |k|
        let t_star = 2f64.sqrt();
        let peak = analytic_kernel_vp([1, 0, 0], t_star).unwrap();
        assert!((peak - PI.powf(1.5) * (2.0 / std::f64::consts::E).sqrt()).abs() < 1e-13);
        for dt in [-1e-3, 1e-3] {
            assert!(analytic_kernel_vp([1, 0, 0], t_star + dt).unwrap() < peak);
        }
    }

    #[test]
    fn collisionless_kernel_matches_formula() {
        let g = Arc::new(build_grid(6.0, 24).unwrap());
        let cf = Arc::new(compute_sigma(g).unwrap());
        for k in [[1, 0, 0], [2, 0, 0], [0, 1, 1]] {
            // the grid sum aliases at the twist 2 pi / h - |k| t, so |k| t stays small
            let ks = compute_kernel(k, 0.0, 2.5, 0.1, &cf).unwrap();
            let scale = ks.series.max_abs();
            for (i, z) in ks.values().iter().enumerate() {
                let exact = analytic_kernel_vp(k, ks.series.time(i)).unwrap();
                assert!((z.re - exact).abs() < 1e-4 * scale, "k {k:?} t {}", ks.series.time(i));
            }
            assert!(ks.imag_residue < 1e-12);
            assert_eq!(ks.values()[0], C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn collisional_kernel_starts_at_zero() {
        let g = Arc::new(build_grid(6.0, 16).unwrap());
        let cf = Arc::new(compute_sigma(g).unwrap());
        let ks = compute_kernel([1, 0, 0], 1e-3, 2.0, 0.1, &cf).unwrap();
        assert!(ks.values()[0].norm() < 1e-12);
        assert!(ks.imag_residue <= KERNEL_IMAG_TOL);
    }
}
