use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Collision sub-step inside the Strang splitting.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum StepScheme {
    /// Crank-Nicolson collision step: second order overall.
    #[default]
    StrangCn,
    /// Backward-Euler collision step `(I + nu dt L) h+ = h`: first order.
    StrangImplicitEuler,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorChoice {
    #[default]
    Landau,
    FokkerPlanck,
}

/// Parameters of one fixed-mode run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionConfig {
    pub k: [i64; 3],
    pub nu: f64,
    pub t_final: f64,
    pub dt: f64,
    #[serde(default)]
    pub scheme: StepScheme,
    #[serde(default)]
    pub operator: OperatorChoice,
    /// Keep a field snapshot every this many steps (0 keeps none).
    #[serde(default = "default_stride")]
    pub snapshot_stride: usize,
    /// Relative residual of the implicit collision solve.
    #[serde(default = "default_tol")]
    pub solver_tol: f64,
    #[serde(default = "default_max_iter")]
    pub solver_max_iter: usize,
    /// Record `2 nu Re<L h, h>` at every sample (one extra operator apply per step).
    #[serde(default = "default_true")]
    pub record_dissipation: bool,
}

fn default_stride() -> usize {
    10
}
fn default_tol() -> f64 {
    1e-10
}
fn default_max_iter() -> usize {
    500
}
fn default_true() -> bool {
    true
}

impl EvolutionConfig {
    pub fn new(k: [i64; 3], nu: f64, t_final: f64, dt: f64) -> Result<Self> {
        let cfg = Self {
            k,
            nu,
            t_final,
            dt,
            scheme: StepScheme::default(),
            operator: OperatorChoice::default(),
            snapshot_stride: default_stride(),
            solver_tol: default_tol(),
            solver_max_iter: default_max_iter(),
            record_dissipation: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_scheme(mut self, scheme: StepScheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_operator(mut self, operator: OperatorChoice) -> Self {
        self.operator = operator;
        self
    }

    pub fn with_snapshot_stride(mut self, stride: usize) -> Self {
        self.snapshot_stride = stride;
        self
    }

    pub fn without_dissipation(mut self) -> Self {
        self.record_dissipation = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return Err(Error::Config(format!("nu must be >= 0, got {}", self.nu)));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::Config(format!("T must be >= 0, got {}", self.t_final)));
        }
        let steps = self.t_final / self.dt;
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
            return Err(Error::Config(format!(
                "T / dt = {steps} is not an integer"
            )));
        }
        if !(self.solver_tol > 0.0) || self.solver_max_iter == 0 {
            return Err(Error::Config("solver tolerance and iteration cap must be positive".into()));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(EvolutionConfig::new([1, 0, 0], 1e-3, 1.0, 0.1).is_ok());
        assert!(EvolutionConfig::new([1, 0, 0], 1e-3, 1.0, 0.3).is_err());
        assert!(EvolutionConfig::new([1, 0, 0], -1.0, 1.0, 0.1).is_err());
        assert!(EvolutionConfig::new([1, 0, 0], 0.0, 1.0, 0.0).is_err());
        assert_eq!(EvolutionConfig::new([1, 0, 0], 0.0, 2.0, 0.1).unwrap().steps(), 20);
    }

    #[test]
    fn rejects_unknown_keys() {
        let ok: EvolutionConfig = toml::from_str("k = [1, 0, 0]\nnu = 0.001\nt_final = 1.0\ndt = 0.1\nscheme = \"strang-implicit-euler\"").unwrap();
        assert_eq!(ok.scheme, StepScheme::StrangImplicitEuler);
        assert!(toml::from_str::<EvolutionConfig>("k = [1, 0, 0]\nnu = 0.0\nt_final = 1.0\ndt = 0.1\nbogus = 1").is_err());
    }
}
