use std::sync::Arc;

use log::warn;

use super::series::TimeSeries;
use crate::collision::{CollisionFields, CollisionOperator, LandauOperator};
use crate::error::{Error, Result};
use crate::phase_space::ModeField;
use crate::semigroup::{evolve_with, EvolutionConfig};
use crate::C64;

/// Largest number of forcing snapshots propagated individually; longer
/// records are thinned by an integer stride.
pub const MAX_FORCING_SNAPSHOTS: usize = 256;

/// Forcing `F(tau_j)` sampled at `tau_j = j dt` on the solver grid.
#[derive(Clone, Debug)]
pub struct Forcing {
    pub fields: Vec<ModeField>,
}

/// `N_k(t) = <S_k(t) f0> + int_0^t <S_k(t - tau) F(tau)> dtau` with
/// `<h> = int h sqrt(mu) dv`, using the Landau operator built from `cf`.
pub fn source_from_data(
    f0: &ModeField,
    forcing: Option<&Forcing>,
    cfg: &EvolutionConfig,
    cf: &Arc<CollisionFields>,
) -> Result<TimeSeries> {
    source_with(f0, forcing, cfg, &LandauOperator::new(cf.clone())?)
}

fn averages(h: &ModeField, cfg: &EvolutionConfig, t_final: f64, op: &dyn CollisionOperator) -> Result<Vec<C64>> {
    if t_final <= 0.0 {
        return Ok(vec![h.velocity_average()]);
    }
    let run = EvolutionConfig {
        t_final,
        snapshot_stride: 0,
        record_dissipation: false,
        ..cfg.clone()
    };
    Ok(evolve_with(h, &run, op)?.rho)
}

/// [`source_from_data`] for an arbitrary operator.
///
/// The Duhamel integral is the trapezoid rule over the stored forcing
/// snapshots, each propagated from its own time to the horizon.
pub fn source_with(
    f0: &ModeField,
    forcing: Option<&Forcing>,
    cfg: &EvolutionConfig,
    op: &dyn CollisionOperator,
) -> Result<TimeSeries> {
    cfg.validate()?;
    let steps = cfg.steps();
    let dt = cfg.dt;
    let mut values = averages(f0, cfg, cfg.t_final, op)?;
    if let Some(forcing) = forcing {
        if forcing.fields.len() != steps + 1 {
            return Err(Error::InvalidArgument(format!(
                "forcing has {} snapshots, the solver grid has {}",
                forcing.fields.len(),
                steps + 1
            )));
        }
        let stride = forcing.fields.len().div_ceil(MAX_FORCING_SNAPSHOTS).max(1);
        if stride > 1 {
            warn!(
                "{} forcing snapshots exceed the limit of {MAX_FORCING_SNAPSHOTS}: using every {stride}th",
                forcing.fields.len()
            );
        }
        let used: Vec<usize> = (0..=steps).step_by(stride).collect();
        // per used snapshot j: <S(t_i - tau_j) F(tau_j)> for i >= j
        let mut propagated = Vec::with_capacity(used.len());
        for &j in &used {
            let f = &forcing.fields[j];
            if f.k() != cfg.k {
                return Err(Error::InvalidArgument("forcing mode differs from the run's k".into()));
            }
            propagated.push(averages(f, cfg, (steps - j) as f64 * dt, op)?);
        }
        for (i, value) in values.iter_mut().enumerate() {
            // trapezoid over the used nodes <= i, then a rectangle up to t_i
            let nodes: Vec<usize> = (0..used.len()).filter(|&m| used[m] <= i).collect();
            let mut acc = C64::new(0.0, 0.0);
            for w in nodes.windows(2) {
                let (a, b) = (w[0], w[1]);
                let h = (used[b] - used[a]) as f64 * dt;
                acc += 0.5 * h * (propagated[a][i - used[a]] + propagated[b][i - used[b]]);
            }
            if let Some(&last) = nodes.last() {
                acc += (i - used[last]) as f64 * dt * propagated[last][i - used[last]];
            }
            *value += acc;
        }
    }
    TimeSeries::new(dt, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collision::compute_sigma;
    use crate::phase_space::build_grid;
    use crate::semigroup::exact_free_semigroup;
    use std::f64::consts::PI;

    fn setup() -> (Arc<crate::VelocityGrid>, Arc<CollisionFields>) {
        let g = Arc::new(build_grid(6.0, 24).unwrap());
        let cf = Arc::new(compute_sigma(g.clone()).unwrap());
        (g, cf)
    }

    #[test]
    fn free_maxwellian_source() {
        let (g, cf) = setup();
        let f0 = ModeField::sqrt_maxwellian(g, [1, 0, 0]);
        // the grid sum aliases at the twist 2 pi / h - t; keep t small enough
        let cfg = EvolutionConfig::new([1, 0, 0], 0.0, 3.0, 0.1).unwrap();
        let n = source_from_data(&f0, None, &cfg, &cf).unwrap();
        for (i, z) in n.values.iter().enumerate() {
            let t = n.time(i);
            assert!((z - PI.powf(1.5) * (-t * t / 4.0).exp()).norm() < 1e-8, "t {t}");
        }
        let doubled = source_from_data(&f0.scale(C64::new(2.0, 0.0)), None, &cfg, &cf).unwrap();
        for (a, b) in doubled.values.iter().zip(&n.values) {
            assert!((a - 2.0 * b).norm() < 1e-12);
        }
    }

    #[test]
    fn single_pulse_forcing() {
        let (g, cf) = setup();
        let k = [1, 0, 0];
        let dt = 0.1;
        let cfg = EvolutionConfig::new(k, 0.0, 2.0, dt).unwrap();
        let pulse = ModeField::from_fn(g.clone(), k, |v| C64::new((1.0 + v[0]) * (-0.5 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2])).exp(), 0.0));
        let mut fields: Vec<ModeField> = (0..=cfg.steps()).map(|_| ModeField::zeros(g.clone(), k)).collect();
        fields[1] = pulse.clone();
        let f0 = ModeField::zeros(g, k);
        let n = source_from_data(&f0, Some(&Forcing { fields }), &cfg, &cf).unwrap();
        assert_eq!(n.values[0], C64::new(0.0, 0.0));
        for i in 2..=cfg.steps() {
            let t = n.time(i);
            let expected = exact_free_semigroup(&pulse, k, t - dt).velocity_average() * dt;
            assert!((n.values[i] - expected).norm() < 1e-12, "t {t}");
        }
    }

    #[test]
    fn forcing_length_must_match() {
        let (g, cf) = setup();
        let cfg = EvolutionConfig::new([1, 0, 0], 0.0, 1.0, 0.1).unwrap();
        let f0 = ModeField::zeros(g.clone(), [1, 0, 0]);
        let forcing = Forcing {
            fields: vec![ModeField::zeros(g, [1, 0, 0]); 3],
        };
        assert!(source_from_data(&f0, Some(&forcing), &cfg, &cf).is_err());
    }
}
