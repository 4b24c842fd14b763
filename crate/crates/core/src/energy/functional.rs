use serde::{Deserialize, Serialize};

use super::params::EnergyParams;
use crate::collision::CollisionFields;
use crate::error::{Error, Result};
use crate::phase_space::norms::dissipation_form;
use crate::phase_space::{Differentiator, ModeField, WeightSpec};
use crate::semigroup::apply_y;
use crate::C64;

/// The three pieces of the fixed-mode energy of one field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyParts {
    /// `A0 sum_{|a'| <= 1} |k^{a'} H|^2_{ell - 2|a'|}`.
    pub zeroth: f64,
    /// `nu^{1/3} Re int w^2 (i k H) . conj(grad_v H)`, `w` of index `ell - 2`.
    pub cross: f64,
    /// `nu^{2/3} |grad_v H|^2_{ell - 2}`.
    pub gradient: f64,
}

impl EnergyParts {
    pub fn total(&self) -> f64 {
        self.zeroth + self.cross + self.gradient
    }
}

fn k_sq(k: [i64; 3]) -> f64 {
    k.iter().map(|&x| (x * x) as f64).sum()
}

/// Physical-frame `d_a H` for every axis, in the field's own frame.
pub(crate) fn gradient(diff: &Differentiator, h: &ModeField) -> [Vec<C64>; 3] {
    let tw = h.twist();
    std::array::from_fn(|a| diff.derivative(h.values(), a, tw[a]))
}

/// `int <v>^{2 ell} e^{q|v|^vartheta} |u|^2` for values `u` on the grid of `h`.
fn weighted_sq(h: &ModeField, u: &[C64], spec: &WeightSpec, ell: f64) -> f64 {
    let s = spec.with_ell(ell);
    let grid = h.grid();
    u.iter()
        .enumerate()
        .map(|(idx, z)| s.weight_sq(grid.coords(idx)) * z.norm_sqr())
        .sum::<f64>()
        * grid.weight()
}

/// The energy pieces of `H` with polynomial index `ell` and Gaussian part of `spec`.
///
/// The cross term is the Fourier image of `<grad_x H, grad_v H>` under
/// `d_x -> i k`, i.e. `Re int w^2 (i k H) . conj(grad_v H)`. Under free
/// transport its time derivative is `-|k|^2 |w H|^2`.
pub(crate) fn energy_parts(
    h: &ModeField,
    k: [i64; 3],
    ell: f64,
    spec: &WeightSpec,
    params: &EnergyParams,
) -> Result<EnergyParts> {
    let diff = Differentiator::new(h.grid(), params.scheme);
    let d = gradient(&diff, h);
    let factor = params.phi_factor(spec);
    let ks = k_sq(k);
    let zeroth = params.a0 * (weighted_sq(h, h.values(), spec, ell) + ks * weighted_sq(h, h.values(), spec, ell - 2.0));
    let w = spec.with_ell(ell - 2.0);
    let grid = h.grid();
    let mut cross = 0.0;
    for (idx, z) in h.values().iter().enumerate() {
        let w2 = w.weight_sq(grid.coords(idx));
        let mut acc = C64::new(0.0, 0.0);
        for a in 0..3 {
            acc += C64::new(0.0, k[a] as f64) * z * d[a][idx].conj();
        }
        cross += w2 * acc.re;
    }
    cross *= grid.weight() * params.nu.cbrt();
    let gradient = params.nu.powf(2.0 / 3.0) * d.iter().map(|da| weighted_sq(h, da, spec, ell - 2.0)).sum::<f64>();
    Ok(EnergyParts {
        zeroth: factor * zeroth,
        cross: factor * cross,
        gradient: factor * gradient,
    })
}

fn checked_total(p: EnergyParts, a0: f64) -> Result<f64> {
    let total = p.total();
    let free = p.zeroth + p.gradient;
    if total < -1e-12 * free.max(f64::MIN_POSITIVE) {
        return Err(Error::Indefinite { value: total, a0 });
    }
    Ok(total.max(0.0))
}

/// `|H|^2_E = A0 sum_{|a'| <= 1} |k^{a'} H|^2 + nu^{1/3} <i k H, grad_v H> + nu^{2/3} |grad_v H|^2`
/// with the linear energy's weights `<v>^{ell_*} e^{q'|v|^vartheta/2}`.
pub fn mode_energy(h: &ModeField, k: [i64; 3], params: &EnergyParams) -> Result<f64> {
    params.validate()?;
    let spec = params.primed_weight()?;
    spec.check_budget(h.grid())?;
    checked_total(energy_parts(h, k, params.ell_star, &spec, params)?, params.a0)
}

/// [`mode_energy`] split into its three pieces.
pub fn mode_energy_parts(h: &ModeField, k: [i64; 3], params: &EnergyParams) -> Result<EnergyParts> {
    params.validate()?;
    let spec = params.primed_weight()?;
    spec.check_budget(h.grid())?;
    energy_parts(h, k, params.ell_star, &spec, params)
}

/// `|H|^2_D = A0 nu^{2/3} sum_{|a'| <= 1} |k^{a'} H|^2_Delta + |k|^2 |H|^2_{ell_* - 2}
/// + nu^{4/3} |grad_v H|^2_Delta`, Delta-norms with the primed weights.
pub fn mode_dissipation(h: &ModeField, k: [i64; 3], params: &EnergyParams, cf: &CollisionFields) -> Result<f64> {
    params.validate()?;
    if !h.grid().same_as(cf.grid()) {
        return Err(Error::GridMismatch);
    }
    let spec = params.primed_weight()?;
    spec.check_budget(h.grid())?;
    let diff = Differentiator::new(h.grid(), params.scheme);
    let ks = k_sq(k);
    let ell = params.ell_star;
    let delta = |u: &ModeField, ell: f64| dissipation_form(u, &spec.with_ell(ell), cf, &diff);
    let first = params.a0 * params.nu.powf(2.0 / 3.0) * (delta(h, ell)? + ks * delta(h, ell - 2.0)?);
    // the middle term carries the unprimed Gaussian rate
    let base = params.base_weight()?;
    let middle = ks * weighted_sq(h, h.values(), &base, ell - 2.0) * params.phi_factor(&base);
    let d = gradient(&diff, h);
    let mut last = 0.0;
    for da in d {
        last += delta(&h.with_values(da), ell - 2.0)?;
    }
    let factor = params.phi_factor(&spec);
    Ok(factor * first + middle + factor * params.nu.powf(4.0 / 3.0) * last)
}

/// Multi-indices `w` with `lo <= |w| <= hi`, in graded lexicographic order.
pub(crate) fn multi_indices(lo: usize, hi: usize) -> Vec<[usize; 3]> {
    let mut out = vec![];
    for total in lo..=hi {
        for a in (0..=total).rev() {
            for b in (0..=total - a).rev() {
                out.push([a, b, total - a - b]);
            }
        }
    }
    out
}

/// `Y_{k,eta}^w h` at time `t`.
pub(crate) fn apply_y_power(h: &ModeField, k: [i64; 3], eta: [f64; 3], t: f64, w: [usize; 3]) -> ModeField {
    let mut out = h.clone();
    for (axis, &count) in w.iter().enumerate() {
        for _ in 0..count {
            let [y0, y1, y2] = apply_y(&out, k, eta, t);
            out = [y0, y1, y2].into_iter().nth(axis).unwrap();
        }
    }
    out
}

/// Velocity derivatives spent by the energy of one `Y^w` term: `|w|` plus the gradient.
fn check_omega_budget(n_omega: usize) -> Result<()> {
    if n_omega + 1 > super::DERIVATIVE_BUDGET {
        return Err(Error::BudgetExceeded {
            used: n_omega + 1,
            allowed: super::DERIVATIVE_BUDGET,
        });
    }
    Ok(())
}

/// The linear energy `|h|^2_E + sum_{1 <= |w| <= N_omega} |Y^w_{k,eta} h|^2_E`
/// at time `t`; the `Y` terms use polynomial weights only.
pub fn linear_energy(h: &ModeField, k: [i64; 3], t: f64, params: &EnergyParams) -> Result<f64> {
    check_omega_budget(params.n_omega)?;
    let mut total = mode_energy(h, k, params)?;
    let poly = EnergyParams {
        vartheta: 0,
        ..params.clone()
    };
    for w in multi_indices(1, params.n_omega) {
        total += mode_energy(&apply_y_power(h, k, params.eta, t, w), k, &poly)?;
    }
    Ok(total)
}

/// The matching linear dissipation.
pub fn linear_dissipation(
    h: &ModeField,
    k: [i64; 3],
    t: f64,
    params: &EnergyParams,
    cf: &CollisionFields,
) -> Result<f64> {
    check_omega_budget(params.n_omega)?;
    let mut total = mode_dissipation(h, k, params, cf)?;
    let poly = EnergyParams {
        vartheta: 0,
        ..params.clone()
    };
    for w in multi_indices(1, params.n_omega) {
        total += mode_dissipation(&apply_y_power(h, k, params.eta, t, w), k, &poly, cf)?;
    }
    Ok(total)
}
