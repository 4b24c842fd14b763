use serde::{Deserialize, Serialize};

use super::functional::{apply_y_power, energy_parts, multi_indices, EnergyParts};
use super::params::EnergyParams;
use super::DERIVATIVE_BUDGET;
use crate::error::{Error, Result};
use crate::phase_space::{japanese, Differentiator, ModeField, WeightSpec};
use crate::C64;

/// Which commutators enter a combined norm: `|alpha| >= n_alpha_low`,
/// `|beta| <= n_beta`, `|alpha| + |beta| <= n_alpha_beta`, `|omega| <= n_omega`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Selector {
    pub n_alpha_low: usize,
    pub n_alpha_beta: usize,
    pub n_beta: usize,
    pub n_omega: usize,
    /// Adds the two extra velocity derivatives of the top-order norm.
    pub top_order: bool,
}

impl Selector {
    pub fn new(n_alpha_low: usize, n_alpha_beta: usize, n_beta: usize, n_omega: usize) -> Self {
        Self {
            n_alpha_low,
            n_alpha_beta,
            n_beta,
            n_omega,
            top_order: false,
        }
    }

    /// The selector of the linear energy: no `x` or `v` commutators, `Y` up to `n_omega`.
    pub fn linear(n_omega: usize) -> Self {
        Self::new(0, 0, 0, n_omega)
    }

    pub fn top_order(mut self) -> Self {
        self.top_order = true;
        self
    }

    fn validate(&self, params: &EnergyParams) -> Result<()> {
        if self.n_alpha_low > self.n_alpha_beta || self.n_beta > self.n_alpha_beta {
            return Err(Error::InvalidArgument(format!(
                "selector needs n_alpha_low, n_beta <= n_alpha_beta, got {self:?}"
            )));
        }
        if self.n_alpha_beta + self.n_omega > params.n_max {
            return Err(Error::InvalidArgument(format!(
                "selector needs n_alpha_beta + n_omega <= n_max = {}",
                params.n_max
            )));
        }
        let used = self.n_beta + self.n_omega + if self.top_order { 2 } else { 1 };
        if used > DERIVATIVE_BUDGET {
            return Err(Error::BudgetExceeded {
                used,
                allowed: DERIVATIVE_BUDGET,
            });
        }
        Ok(())
    }
}

/// One `(alpha, beta, omega)` term of a combined norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombinedTerm {
    pub alpha: [usize; 3],
    pub beta: [usize; 3],
    pub omega: [usize; 3],
    /// Polynomial index `2M - 2(|alpha| + |beta| + |omega|)`.
    pub ell: f64,
    /// `nu^{2|beta|/3}`, the square of the factor carried by `H`.
    pub prefactor: f64,
    pub parts: EnergyParts,
    /// The top-order second-derivative term (0 unless selected).
    pub top: f64,
}

impl CombinedTerm {
    pub fn value(&self) -> f64 {
        self.parts.total() + self.top
    }
}

/// A combined energy norm with its per-term breakdown.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombinedNorm {
    pub total: f64,
    pub selector: Selector,
    pub terms: Vec<CombinedTerm>,
}

fn norm1(m: [usize; 3]) -> usize {
    m.iter().sum()
}

/// `k^alpha` as a real multiplier; the `i^{|alpha|}` phase drops out of every quadratic term.
fn k_power(k: [i64; 3], alpha: [usize; 3]) -> f64 {
    (0..3).map(|a| (k[a] as f64).powi(alpha[a] as i32)).product()
}

fn apply_dv(diff: &Differentiator, h: &ModeField, beta: [usize; 3]) -> ModeField {
    let tw = h.twist();
    let mut out = h.clone();
    for (axis, &count) in beta.iter().enumerate() {
        for _ in 0..count {
            out = out.with_values(diff.derivative(out.values(), axis, tw[axis]));
        }
    }
    out
}

fn weighted_sq(h: &ModeField, spec: &WeightSpec) -> f64 {
    let grid = h.grid();
    h.values()
        .iter()
        .enumerate()
        .map(|(idx, z)| spec.weight_sq(grid.coords(idx)) * z.norm_sqr())
        .sum::<f64>()
        * grid.weight()
}

/// Combined energy norm of the mode `h` at time `t`: the sum over the selected
/// `(alpha, beta, omega)` of the energy form of `H = nu^{|beta|/3} (ik)^alpha d_v^beta Y^omega h`
/// with weight index `2M - 2(|alpha| + |beta| + |omega|)`. The Gaussian factor
/// of `params` is used only for `omega = 0`.
///
/// With `top_order` each term gains `A0^{-1} sum_{|b| = 2} nu^{4/3} |d_v^b H|^2`
/// at weight index `ell - 4`.
pub fn combined_energy_norm(
    h: &ModeField,
    k: [i64; 3],
    t: f64,
    params: &EnergyParams,
    selector: &Selector,
) -> Result<CombinedNorm> {
    params.validate()?;
    selector.validate(params)?;
    let base = params.base_weight()?;
    base.check_budget(h.grid())?;
    let poly = WeightSpec::polynomial(0.0);
    let diff = Differentiator::new(h.grid(), params.scheme);
    let m = params.m() as f64;
    let mut terms = vec![];
    for omega in multi_indices(0, selector.n_omega) {
        let y = apply_y_power(h, k, params.eta, t, omega);
        let spec = if norm1(omega) == 0 { base } else { poly };
        for beta in multi_indices(0, selector.n_beta) {
            let dv = apply_dv(&diff, &y, beta);
            let lo = selector.n_alpha_low;
            let hi = selector.n_alpha_beta - norm1(beta);
            if lo > hi {
                continue;
            }
            for alpha in multi_indices(lo, hi) {
                let ell = 2.0 * m - 2.0 * (norm1(alpha) + norm1(beta) + norm1(omega)) as f64;
                let prefactor = params.nu.powf(2.0 * norm1(beta) as f64 / 3.0);
                let factor = prefactor.sqrt() * k_power(k, alpha);
                let hh = dv.scale(C64::new(factor, 0.0));
                let parts = energy_parts(&hh, k, ell, &spec, params)?;
                let mut top = 0.0;
                if selector.top_order {
                    let s = spec.with_ell(ell - 4.0);
                    for b2 in multi_indices(2, 2) {
                        top += weighted_sq(&apply_dv(&diff, &hh, b2), &s);
                    }
                    top *= params.nu.powf(4.0 / 3.0) / params.a0 * params.phi_factor(&spec);
                }
                terms.push(CombinedTerm {
                    alpha,
                    beta,
                    omega,
                    ell,
                    prefactor,
                    parts,
                    top,
                });
            }
        }
    }
    let total = terms.iter().map(CombinedTerm::value).sum();
    if total < 0.0 {
        return Err(Error::Indefinite {
            value: total,
            a0: params.a0,
        });
    }
    Ok(CombinedNorm {
        total,
        selector: *selector,
        terms,
    })
}

/// `sum_{|alpha| + |omega| <= n, 1 <= |beta| <= 2} nu^{(|beta| - 1)/3} |<v>^{10} k^alpha d_v^beta Y^omega h|`.
pub fn g_norm(h: &ModeField, k: [i64; 3], t: f64, params: &EnergyParams, n: usize) -> Result<f64> {
    params.validate()?;
    if 2 + n > DERIVATIVE_BUDGET {
        return Err(Error::BudgetExceeded {
            used: 2 + n,
            allowed: DERIVATIVE_BUDGET,
        });
    }
    let diff = Differentiator::new(h.grid(), params.scheme);
    let grid = h.grid();
    let w10: Vec<f64> = grid.sample(|v| japanese(v).powi(20));
    let mut total = 0.0;
    for omega in multi_indices(0, n) {
        let y = apply_y_power(h, k, params.eta, t, omega);
        for beta in multi_indices(1, 2) {
            let dv = apply_dv(&diff, &y, beta);
            let s: f64 = dv.values().iter().zip(&w10).map(|(z, w)| w * z.norm_sqr()).sum::<f64>() * grid.weight();
            let base = params.nu.powf((norm1(beta) as f64 - 1.0) / 3.0) * s.sqrt();
            for alpha in multi_indices(0, n - norm1(omega)) {
                total += base * k_power(k, alpha).abs();
            }
        }
    }
    Ok(total)
}
