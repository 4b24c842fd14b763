use std::io::Write;
use std::sync::Arc;

use log::warn;

use super::config::{EvolutionConfig, OperatorChoice, StepScheme};
use super::krylov::conjugate_gradient;
use crate::collision::{CollisionFields, CollisionOperator, FokkerPlanck, LandauOperator, PreparedOperator};
use crate::error::{Error, Result};
use crate::phase_space::field::check_finite;
use crate::phase_space::ModeField;
use crate::C64;

/// `S_k(t) h = e^{-i k.v t} h`, applied by advancing the twist.
pub fn exact_free_semigroup(h0: &ModeField, k: [i64; 3], t: f64) -> ModeField {
    let tw = h0.twist();
    let twist = std::array::from_fn(|a| tw[a] + k[a] as f64 * t);
    h0.clone().with_twist(twist)
}

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub time: f64,
    pub field: ModeField,
}

/// Sampled output of [`evolve_mode`]; scalar series are recorded every step.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub k: [i64; 3],
    pub nu: f64,
    pub times: Vec<f64>,
    pub norm_l2: Vec<f64>,
    /// `int h sqrt(mu) dv`.
    pub rho: Vec<C64>,
    /// `|h|^2`.
    pub energy: Vec<f64>,
    /// `2 nu Re<L h, h>`, so that `d/dt |h|^2 = -dissipation` (NaN when not recorded).
    pub dissipation: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    /// Krylov iterations of each collision solve.
    pub solver_iterations: Vec<usize>,
    pub last: ModeField,
}

impl Trajectory {
    /// CSV with columns `t, norm_l2, re_rho, im_rho, energy, dissipation`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "norm_l2", "re_rho", "im_rho", "energy", "dissipation"])
            .map_err(csv_err)?;
        for i in 0..self.times.len() {
            out.write_record(&[
                self.times[i].to_string(),
                self.norm_l2[i].to_string(),
                self.rho[i].re.to_string(),
                self.rho[i].im.to_string(),
                self.energy[i].to_string(),
                self.dissipation[i].to_string(),
            ])
            .map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Format(format!("csv: {e}"))
}

/// Evolves `h0` with the operator named in `cfg`.
pub fn evolve_mode(h0: &ModeField, cfg: &EvolutionConfig, cf: &Arc<CollisionFields>) -> Result<Trajectory> {
    if !h0.grid().same_as(cf.grid()) {
        return Err(Error::GridMismatch);
    }
    match cfg.operator {
        OperatorChoice::Landau => evolve_with(h0, cfg, &LandauOperator::new(cf.clone())?),
        OperatorChoice::FokkerPlanck => evolve_with(h0, cfg, &FokkerPlanck::new(cf.grid().clone())?),
    }
}

/// One implicit collision sub-step at a frozen twist: Crank-Nicolson
/// `(I + a L) x = (I - a L) g` with `a = nu dt / 2`, or backward Euler
/// `(I + nu dt L) x = g`. Returns the new values and the Krylov iterations.
pub(crate) fn collision_step(
    prepared: &dyn PreparedOperator,
    g: &[C64],
    nu_dt: f64,
    scheme: StepScheme,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<C64>, usize)> {
    let (a, rhs) = match scheme {
        StepScheme::StrangCn => {
            let a = 0.5 * nu_dt;
            let lg = prepared.apply(g);
            (a, g.iter().zip(&lg).map(|(x, y)| x - y * a).collect::<Vec<_>>())
        }
        StepScheme::StrangImplicitEuler => (nu_dt, g.to_vec()),
    };
    let out = conjugate_gradient(|x| prepared.apply(x), a, &rhs, g.to_vec(), tol, max_iter)?;
    Ok((out.solution, out.iterations))
}

/// Strang splitting: exact transport over `dt/2` (a twist shift), implicit
/// collision step at the frozen twist, exact transport over `dt/2`.
pub fn evolve_with(h0: &ModeField, cfg: &EvolutionConfig, op: &dyn CollisionOperator) -> Result<Trajectory> {
    cfg.validate()?;
    if !h0.grid().same_as(op.grid()) {
        return Err(Error::GridMismatch);
    }
    if h0.k() != cfg.k {
        return Err(Error::InvalidArgument(format!(
            "field is mode {:?} but the run is for k = {:?}",
            h0.k(),
            cfg.k
        )));
    }
    let grid = h0.grid_arc().clone();
    let steps = cfg.steps();
    let dt = cfg.dt;
    let kf = cfg.k.map(|x| x as f64);
    let tw0 = h0.twist();
    let twist_at = |s: f64| -> [f64; 3] { std::array::from_fn(|a| tw0[a] + kf[a] * s * dt) };
    let mut traj = Trajectory {
        k: cfg.k,
        nu: cfg.nu,
        times: Vec::with_capacity(steps + 1),
        norm_l2: Vec::with_capacity(steps + 1),
        rho: Vec::with_capacity(steps + 1),
        energy: Vec::with_capacity(steps + 1),
        dissipation: Vec::with_capacity(steps + 1),
        snapshots: vec![],
        solver_iterations: Vec::with_capacity(steps),
        last: h0.clone(),
    };
    let record = |traj: &mut Trajectory, t: f64, g: &ModeField, step: usize| {
        let norm = g.norm();
        traj.times.push(t);
        traj.norm_l2.push(norm);
        traj.rho.push(g.velocity_average());
        traj.energy.push(norm * norm);
        let diss = if cfg.nu == 0.0 {
            0.0
        } else if cfg.record_dissipation {
            let lg = op.prepare(g.twist()).apply(g.values());
            2.0 * cfg.nu * crate::phase_space::field::inner(&lg, g.values()).re * g.grid().weight()
        } else {
            f64::NAN
        };
        traj.dissipation.push(diss);
        if cfg.snapshot_stride > 0 && step % cfg.snapshot_stride == 0 {
            traj.snapshots.push(Snapshot { time: t, field: g.clone() });
        }
    };

    let mut g = h0.clone();
    record(&mut traj, 0.0, &g, 0);
    let mut warned = false;
    for n in 0..steps {
        let mid = twist_at(n as f64 + 0.5);
        let values = if cfg.nu > 0.0 {
            let prepared = op.prepare(mid);
            let (x, iters) = collision_step(
                prepared.as_ref(),
                g.values(),
                cfg.nu * dt,
                cfg.scheme,
                cfg.solver_tol,
                cfg.solver_max_iter,
            )?;
            traj.solver_iterations.push(iters);
            x
        } else {
            g.values().to_vec()
        };
        check_finite(&grid, &values, "evolve_mode step")?;
        // transport only moves the twist, so the stored values change through collisions alone
        if !warned && cfg.nu > 0.0 {
            let change: f64 = values
                .iter()
                .zip(g.values())
                .map(|(x, y)| (x - y).norm_sqr())
                .sum::<f64>()
                .sqrt();
            let base = g.values().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if change > 0.2 * base {
                warn!("dt = {dt} changes the field by {:.2} of its norm in one step", change / base);
                warned = true;
            }
        }
        g = g.with_values(values).with_twist(twist_at(n as f64 + 1.0));
        record(&mut traj, (n + 1) as f64 * dt, &g, n + 1);
    }
    traj.last = g;
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collision::compute_sigma;
    use crate::phase_space::build_grid;
    use crate::util::random_smooth_field;
    use std::f64::consts::PI;

    #[test]
    fn free_semigroup_average() {
        let g = Arc::new(build_grid(6.0, 24).unwrap());
        let h = ModeField::sqrt_maxwellian(g, [1, 0, 0]);
        assert!((exact_free_semigroup(&h, [1, 0, 0], 0.0).velocity_average() - h.velocity_average()).norm() < 1e-14);
        let s = exact_free_semigroup(&h, [1, 0, 0], 3.7);
        assert!((s.norm() - h.norm()).abs() < 1e-13);
        let avg = exact_free_semigroup(&h, [1, 0, 0], 2.0).velocity_average();
        assert!((avg.re - PI.powf(1.5) * (-1.0f64).exp()).abs() < 1e-10 && avg.im.abs() < 1e-12);
    }

    #[test]
    fn collisionless_run_is_free_transport() {
        let g = Arc::new(build_grid(6.0, 16).unwrap());
        let cf = Arc::new(compute_sigma(g.clone()).unwrap());
        let h = ModeField::new(g.clone(), random_smooth_field(&g, 2, 0, false).into_values(), [1, 2, 0]).unwrap();
        let cfg = EvolutionConfig::new([1, 2, 0], 0.0, 1.0, 0.1).unwrap().with_snapshot_stride(1);
        let traj = evolve_mode(&h, &cfg, &cf).unwrap();
        for snap in &traj.snapshots {
            let exact = exact_free_semigroup(&h, [1, 2, 0], snap.time).to_physical();
            let got = snap.field.to_physical();
            assert!(got.sub(&exact).unwrap().max_abs() < 1e-12);
        }
    }

    #[test]
    fn mass_conserved_and_norm_monotone() {
        let g = Arc::new(build_grid(6.0, 16).unwrap());
        let cf = Arc::new(compute_sigma(g.clone()).unwrap());
        let h = random_smooth_field(&g, 4, 0, true);
        let cfg = EvolutionConfig::new([0, 0, 0], 1e-2, 2.0, 0.2).unwrap();
        let traj = evolve_mode(&h, &cfg, &cf).unwrap();
        let m0 = traj.rho[0];
        assert!(traj.rho.iter().all(|m| (m - m0).norm() < 1e-8 * m0.norm()));
        let h1 = ModeField::new(g.clone(), h.values().to_vec(), [1, 0, 0]).unwrap();
        let cfg = EvolutionConfig::new([1, 0, 0], 1e-2, 2.0, 0.2).unwrap();
        let traj = evolve_mode(&h1, &cfg, &cf).unwrap();
        assert!(traj.norm_l2.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
        // discrete energy balance: the drop over one step ~ dissipation * dt
        let drop = (traj.energy[0] - traj.energy[1]) / 0.2;
        let mean = 0.5 * (traj.dissipation[0] + traj.dissipation[1]);
        assert!((drop - mean).abs() < 0.05 * mean, "{drop} vs {mean}");
    }

    #[test]
    fn rejects_mode_mismatch() {
        let g = Arc::new(build_grid(6.0, 8).unwrap());
        let cf = Arc::new(compute_sigma(g.clone()).unwrap());
        let h = ModeField::sqrt_maxwellian(g, [1, 0, 0]);
        let cfg = EvolutionConfig::new([2, 0, 0], 0.0, 1.0, 0.5).unwrap();
        assert!(evolve_mode(&h, &cfg, &cf).is_err());
    }
}
