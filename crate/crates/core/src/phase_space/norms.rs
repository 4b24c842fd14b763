use super::field::ModeField;
use super::stencil::{DerivativeScheme, Differentiator};
use super::weights::WeightSpec;
use crate::collision::kernel::packed;
use crate::collision::CollisionFields;
use crate::error::{Error, Result};
use crate::phase_space::field::check_finite;

/// `|h|_{Delta(ell, vartheta)}` with the default derivative scheme.
pub fn dissipation_norm(h: &ModeField, spec: &WeightSpec, cf: &CollisionFields) -> Result<f64> {
    let diff = Differentiator::new(h.grid(), DerivativeScheme::default());
    dissipation_norm_with(h, spec, cf, &diff)
}

/// `( int w^2 [sigma_ij d_i h conj(d_j h) + sigma_ij v_i v_j |h|^2 / 4] )^{1/2}`,
/// real part of the form, with `w = <v>^ell e^{q|v|^vartheta/2}`.
pub fn dissipation_norm_with(
    h: &ModeField,
    spec: &WeightSpec,
    cf: &CollisionFields,
    diff: &Differentiator,
) -> Result<f64> {
    if !h.grid().same_as(cf.grid()) {
        return Err(Error::GridMismatch);
    }
    spec.check_budget(h.grid())?;
    Ok(dissipation_form(h, spec, cf, diff)?.sqrt())
}

/// The squared dissipation norm.
pub(crate) fn dissipation_form(
    h: &ModeField,
    spec: &WeightSpec,
    cf: &CollisionFields,
    diff: &Differentiator,
) -> Result<f64> {
    let tw = h.twist();
    let d: Vec<_> = (0..3)
        .map(|a| diff.derivative(h.values(), a, tw[a]))
        .collect();
    for da in &d {
        check_finite(h.grid(), da, "dissipation_norm derivative")?;
    }
    let grid = h.grid();
    let mut total = 0.0;
    for (idx, z) in h.values().iter().enumerate() {
        let v = grid.coords(idx);
        let mut grad = 0.0;
        let mut pot = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                let s = cf.sigma[packed(a, b)][idx];
                grad += s * (d[a][idx] * d[b][idx].conj()).re;
                pot += s * v[a] * v[b];
            }
        }
        total += spec.weight_sq(v) * (grad + 0.25 * pot * z.norm_sqr());
    }
    Ok((total * grid.weight()).max(0.0))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::collision::compute_sigma;
    use crate::phase_space::build_grid;
    use crate::util::gauss_legendre;

    /// `lambda_1(r) = pi^{3/2} [erf r - 2 r e^{-r^2} / sqrt(pi)] / r^3` for `mu = e^{-|v|^2}`,
    /// with `erf` from its own Gauss-Legendre integral.
    fn lambda1(r: f64) -> f64 {
        let (x, w) = gauss_legendre(40);
        let erf: f64 = x
            .iter()
            .zip(&w)
            .map(|(x, w)| {
                let t = 0.5 * r * (x + 1.0);
                w * 0.5 * r * (-t * t).exp()
            })
            .sum::<f64>()
            * 2.0
            / std::f64::consts::PI.sqrt();
        std::f64::consts::PI.powf(1.5) * (erf - 2.0 * r * (-r * r).exp() / std::f64::consts::PI.sqrt()) / r.powi(3)
    }

    #[test]
    fn lambda1_closed_form_matches_grid() {
        let g = Arc::new(build_grid(6.0, 24).unwrap());
        let cf = compute_sigma(g.clone()).unwrap();
        for idx in [g.index(12, 13, 14), g.index(3, 12, 12), g.index(20, 5, 16)] {
            let r = crate::phase_space::norm_sq(g.coords(idx)).sqrt();
            assert!((cf.lambda1[idx] - lambda1(r)).abs() < 1e-5 * lambda1(r));
        }
    }

    #[test]
    fn dissipation_norm_of_maxwellian() {
        // for h = sqrt(mu): d h = -v h, so the form is (5/4) int w^2 lambda_1 |v|^2 mu
        let g = Arc::new(build_grid(6.0, 32).unwrap());
        let cf = compute_sigma(g.clone()).unwrap();
        let h = ModeField::sqrt_maxwellian(g.clone(), [1, 0, 0]);
        for spec in [WeightSpec::polynomial(-1.0), WeightSpec::new(1.0, 2, 0.2).unwrap()] {
            let (x, w) = gauss_legendre(200);
            let rmax = 9.0;
            let exact: f64 = x
                .iter()
                .zip(&w)
                .map(|(x, w)| {
                    let r = 0.5 * rmax * (x + 1.0);
                    let v = [r, 0.0, 0.0];
                    w * 0.5 * rmax * 4.0 * std::f64::consts::PI * r.powi(4) * spec.weight_sq(v) * lambda1(r) * (-r * r).exp()
                })
                .sum::<f64>()
                * 1.25;
            let got = dissipation_norm(&h, &spec, &cf).unwrap();
            assert!((got - exact.sqrt()).abs() < 1e-6 * exact.sqrt(), "{got} vs {}", exact.sqrt());
            let fd = Differentiator::new(&g, DerivativeScheme::Fd4);
            let coarse = dissipation_norm_with(&h, &spec, &cf, &fd).unwrap();
            assert!((coarse - exact.sqrt()).abs() < 1e-2 * exact.sqrt());
        }
    }
}
