use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::functional::energy_parts;
use crate::error::{Error, Result};
use crate::phase_space::{DerivativeScheme, ModeField, VelocityGrid, WeightSpec};
use crate::util::random_smooth_field;
use crate::C64;

/// Norm parameters of the fixed-mode hypocoercive energy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnergyParams {
    /// Weight of the zeroth-order terms over the cross term.
    #[serde(rename = "A0")]
    pub a0: f64,
    pub nu: f64,
    /// Polynomial weight index `ell_*` of the linear energy.
    pub ell_star: f64,
    /// 0 for polynomial weights, 2 for an additional `e^{q' |v|^2 / 2}`.
    pub vartheta: u8,
    /// Gaussian rate `q0`; the linear energy uses `q' = q0 / 2`.
    pub q0: f64,
    /// Highest total derivative order; fixes `M = n_max + 30`.
    pub n_max: usize,
    /// Highest order of `Y_{k,eta}` commutations summed by the linear energy.
    pub n_omega: usize,
    pub eta: [f64; 3],
    /// Frozen scalar potential in the `e^{(q+1) phi}` factor (zero in the linear regime).
    pub phi: f64,
    pub scheme: DerivativeScheme,
}

impl Default for EnergyParams {
    fn default() -> Self {
        Self {
            a0: 16.0,
            nu: 1e-3,
            ell_star: 2.0,
            vartheta: 0,
            q0: 0.5,
            n_max: 9,
            n_omega: 0,
            eta: [0.0; 3],
            phi: 0.0,
            scheme: DerivativeScheme::Spectral,
        }
    }
}

/// Outcome of the positive-definiteness probe.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefinitenessReport {
    pub probes: usize,
    /// Extremes of `E / (E - cross)`, the energy over its cross-term-free form.
    pub min_ratio: f64,
    pub max_ratio: f64,
}

impl EnergyParams {
    pub fn with_nu(mut self, nu: f64) -> Self {
        self.nu = nu;
        self
    }

    /// `M = N_max + 30`.
    pub fn m(&self) -> usize {
        self.n_max + 30
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a0 > 0.0 && self.a0.is_finite()) {
            return Err(Error::InvalidArgument(format!("A0 must be positive, got {}", self.a0)));
        }
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return Err(Error::InvalidArgument(format!("nu must be >= 0, got {}", self.nu)));
        }
        if self.n_max < 9 {
            return Err(Error::InvalidArgument(format!("n_max must be >= 9, got {}", self.n_max)));
        }
        if self.n_omega > self.n_max {
            return Err(Error::InvalidArgument("n_omega exceeds n_max".into()));
        }
        self.base_weight()?;
        Ok(())
    }

    /// `<v>^{ell} e^{q |v|^vartheta / 2}` with the unprimed rate `q0`.
    pub(crate) fn base_weight(&self) -> Result<WeightSpec> {
        WeightSpec::new(0.0, self.vartheta, self.q0)
    }

    /// The linear energy's weight family: rate `q' = q0 / 2`.
    pub(crate) fn primed_weight(&self) -> Result<WeightSpec> {
        Ok(self.base_weight()?.primed())
    }

    /// `e^{2 (q + 1) phi}` for the Gaussian rate `q` in use.
    pub(crate) fn phi_factor(&self, spec: &WeightSpec) -> f64 {
        (2.0 * (spec.q + 1.0) * self.phi).exp()
    }

    /// Checks that the energy form is positive on `probes` random fields of
    /// mode `k`: smooth Gaussian-polynomial profiles under random phases
    /// `e^{i xi.v}`, `|xi_a| <= 4`, which load the cross term.
    pub fn check_definite(
        &self,
        grid: &Arc<VelocityGrid>,
        k: [i64; 3],
        probes: usize,
        seed: u64,
    ) -> Result<DefinitenessReport> {
        self.validate()?;
        let mut report = DefinitenessReport {
            probes,
            min_ratio: f64::INFINITY,
            max_ratio: 0.0,
        };
        for index in 0..probes as u64 {
            let h = probe_field(grid, k, seed, index);
            let p = energy_parts(&h, k, self.ell_star, &self.primed_weight()?, self)?;
            let free = p.zeroth + p.gradient;
            let total = free + p.cross;
            if total < -1e-12 * free {
                return Err(Error::Indefinite {
                    value: total,
                    a0: self.a0,
                });
            }
            if free > 0.0 {
                report.min_ratio = report.min_ratio.min(total / free);
                report.max_ratio = report.max_ratio.max(total / free);
            }
        }
        Ok(report)
    }
}

/// Random probe `index`: a smooth random profile under a random phase.
pub(crate) fn probe_field(grid: &Arc<VelocityGrid>, k: [i64; 3], seed: u64, index: u64) -> ModeField {
    use rand::Rng;
    let base = random_smooth_field(grid, seed, index, false);
    let mut rng = crate::util::probe_rng(seed ^ 0x9e37_79b9_7f4a_7c15, index);
    let xi: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-4.0..4.0));
    let values = base
        .values()
        .iter()
        .enumerate()
        .map(|(idx, z)| {
            let v = grid.coords(idx);
            z * C64::from_polar(1.0, xi[0] * v[0] + xi[1] * v[1] + xi[2] * v[2])
        })
        .collect();
    ModeField::zeros(grid.clone(), k).with_values(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::build_grid;

    #[test]
    fn defaults_meet_the_stated_minimums() {
        let p = EnergyParams::default();
        assert_eq!(p.n_max, 9);
        assert_eq!(p.m(), 39);
        assert_eq!(p.a0, 16.0);
        p.validate().unwrap();
        assert!(EnergyParams { n_max: 8, ..p.clone() }.validate().is_err());
        assert!(EnergyParams { a0: 0.0, ..p.clone() }.validate().is_err());
        assert!(EnergyParams { vartheta: 2, q0: 1.5, ..p }.validate().is_err());
    }

    #[test]
    fn default_a0_is_definite_on_probes() {
        let g = Arc::new(build_grid(6.0, 16).unwrap());
        for nu in [1e-2, 1e-4] {
            let p = EnergyParams::default().with_nu(nu);
            let r = p.check_definite(&g, [1, 0, 0], 50, 11).unwrap();
            assert!(r.min_ratio > 0.5 && r.max_ratio < 2.0, "{r:?}");
        }
    }

    #[test]
    fn tiny_a0_is_rejected() {
        // H = e^{i xi v1} e^{-|v|^2 / 2 s^2} at k = e1, unit weight: per |H|^2 the
        // energy is 2 A0 + xi nu^{1/3} + nu^{2/3} (xi^2 + 3 / 2 s^2), negative for
        // xi = -1/2, s = 3, nu = 1 once A0 < 1/24
        let g = Arc::new(build_grid(10.0, 32).unwrap());
        let h = ModeField::from_fn(g, [1, 0, 0], |v| {
            C64::from_polar((-crate::phase_space::norm_sq(v) / 18.0).exp(), -0.5 * v[0])
        });
        let p = EnergyParams {
            a0: 1e-3,
            nu: 1.0,
            ell_star: 0.0,
            ..Default::default()
        };
        assert!(matches!(
            super::super::mode_energy(&h, [1, 0, 0], &p),
            Err(Error::Indefinite { .. })
        ));
        let fine = EnergyParams { a0: 0.1, ..p };
        assert!(super::super::mode_energy(&h, [1, 0, 0], &fine).unwrap() > 0.0);
    }
}
