use log::warn;
use serde::{Deserialize, Serialize};

use super::field::ModeField;
use super::grid::{japanese, norm_sq, VelocityGrid};
use crate::error::{Error, Result};

/// Largest admissible `q * max|v|^2` on the grid box (`max|v|^2 = 3 L_v^2`).
pub const EXPONENT_BUDGET: f64 = 200.0;

/// Velocity weight `<v>^ell e^{q |v|^vartheta / 2}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub ell: f64,
    pub vartheta: u8,
    pub q: f64,
}

impl WeightSpec {
    pub fn new(ell: f64, vartheta: u8, q: f64) -> Result<Self> {
        if !ell.is_finite() {
            return Err(Error::InvalidWeight(format!(
                "ell must be finite, got {ell}"
            )));
        }
        match vartheta {
            0 => Ok(Self {
                ell,
                vartheta,
                q: 0.0,
            }),
            2 if q > 0.0 && q < 1.0 => Ok(Self { ell, vartheta, q }),
            2 => Err(Error::InvalidWeight(format!(
                "Gaussian weights need 0 < q < 1, got {q}"
            ))),
            _ => Err(Error::InvalidWeight(format!(
                "vartheta must be 0 or 2, got {vartheta}"
            ))),
        }
    }

    pub fn polynomial(ell: f64) -> Self {
        Self {
            ell,
            vartheta: 0,
            q: 0.0,
        }
    }

    /// Primed variant: Gaussian rate halved.
    pub fn primed(&self) -> Self {
        Self {
            q: self.q / 2.0,
            ..*self
        }
    }

    pub fn with_ell(&self, ell: f64) -> Self {
        Self { ell, ..*self }
    }

    /// Rejects Gaussian rates whose weight would exceed the exponent budget
    /// anywhere in the box, and warns that such weights amplify the tail.
    pub fn check_budget(&self, grid: &VelocityGrid) -> Result<()> {
        if self.vartheta == 2 {
            let value = self.q * 3.0 * grid.half_width().powi(2);
            if value > EXPONENT_BUDGET {
                return Err(Error::ExponentBudget {
                    value,
                    budget: EXPONENT_BUDGET,
                });
            }
            warn!(
                "Gaussian weight e^(q|v|^2/2), q = {}: amplifies boundary truncation",
                self.q
            );
        }
        Ok(())
    }

    #[inline]
    pub fn weight(&self, v: [f64; 3]) -> f64 {
        self.weight_sq(v).sqrt()
    }

    /// `<v>^{2 ell} e^{q |v|^vartheta}`.
    #[inline]
    pub fn weight_sq(&self, v: [f64; 3]) -> f64 {
        let poly = (1.0 + norm_sq(v)).powf(self.ell);
        if self.vartheta == 2 {
            poly * (self.q * norm_sq(v)).exp()
        } else {
            poly
        }
    }

    pub fn sample_sq(&self, grid: &VelocityGrid) -> Vec<f64> {
        grid.sample(|v| self.weight_sq(v))
    }
}

/// `|| <v>^ell e^{q|v|^vartheta/2} h ||_{L^2_v}` by grid quadrature.
pub fn weighted_norm(h: &ModeField, spec: &WeightSpec) -> Result<f64> {
    spec.check_budget(h.grid())?;
    let grid = h.grid();
    let s: f64 = h
        .values()
        .iter()
        .enumerate()
        .map(|(idx, z)| spec.weight_sq(grid.coords(idx)) * z.norm_sqr())
        .sum();
    Ok((s * grid.weight()).sqrt())
}

/// `|<v>^power h|` in L2.
pub fn japanese_norm(h: &ModeField, power: f64) -> f64 {
    let grid = h.grid();
    let s: f64 = h
        .values()
        .iter()
        .enumerate()
        .map(|(idx, z)| japanese(grid.coords(idx)).powf(2.0 * power) * z.norm_sqr())
        .sum();
    (s * grid.weight()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::build_grid;
    use std::f64::consts::PI;
    use std::sync::Arc;

    #[test]
    fn norms_of_maxwellian() {
        let g = Arc::new(build_grid(6.0, 32).unwrap());
        let h = ModeField::sqrt_maxwellian(g.clone(), [0; 3]);
        let n0 = weighted_norm(&h, &WeightSpec::polynomial(0.0)).unwrap();
        assert!((n0 - PI.powf(0.75)).abs() < 1e-9);
        let ng = weighted_norm(&h, &WeightSpec::new(0.0, 2, 0.5).unwrap()).unwrap();
        assert!((ng - (2.0 * PI).powf(0.75)).abs() < 1e-8);
        let z = ModeField::zeros(g, [0; 3]);
        assert_eq!(
            weighted_norm(&z, &WeightSpec::polynomial(3.0)).unwrap(),
            0.0
        );
    }

    #[test]
    fn validation() {
        assert_eq!(WeightSpec::new(1.0, 0, 0.7).unwrap().q, 0.0);
        assert!(WeightSpec::new(1.0, 2, 0.0).is_err());
        assert!(WeightSpec::new(1.0, 2, 1.0).is_err());
        assert!(WeightSpec::new(1.0, 1, 0.5).is_err());
        assert_eq!(WeightSpec::new(0.0, 2, 0.5).unwrap().primed().q, 0.25);
    }

    #[test]
    fn overflow_guard() {
        let g = build_grid(10.0, 16).unwrap();
        let w = WeightSpec::new(0.0, 2, 0.9).unwrap();
        assert!(matches!(
            w.check_budget(&g),
            Err(Error::ExponentBudget { .. })
        ));
        let g = build_grid(6.0, 16).unwrap();
        assert!(w.check_budget(&g).is_ok());
    }
}
