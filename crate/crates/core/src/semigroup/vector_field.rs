use serde::Serialize;

use crate::error::{Error, Result};
use crate::phase_space::weights::japanese_norm;
use crate::phase_space::{DerivativeScheme, Differentiator, ModeField};
use crate::C64;

/// `Y_{k,eta} h = grad_v h + i (eta + k t) h`, one field per component.
///
/// Works in the field's own frame: for a twisted field the derivative acts as
/// `d - i twist`, so `Y_{k,0} S_k(t) h0 = S_k(t) grad_v h0` holds exactly.
pub fn apply_y(h: &ModeField, k: [i64; 3], eta: [f64; 3], t: f64) -> [ModeField; 3] {
    let diff = Differentiator::new(h.grid(), DerivativeScheme::default());
    apply_y_with(&diff, h, k, eta, t)
}

fn apply_y_with(diff: &Differentiator, h: &ModeField, k: [i64; 3], eta: [f64; 3], t: f64) -> [ModeField; 3] {
    let tw = h.twist();
    std::array::from_fn(|j| {
        let shift = C64::new(0.0, eta[j] + k[j] as f64 * t);
        let mut d = diff.derivative(h.values(), j, tw[j]);
        d.iter_mut().zip(h.values()).for_each(|(o, z)| *o += shift * z);
        h.with_values(d)
    })
}

/// Both sides of `|int h sqrt(mu)| <= C <k t + eta>^{-N} sum_{|w| <= N} |<v>^{-l'} Y^w h|`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct YBoundReport {
    pub t: f64,
    pub order: usize,
    pub lhs: f64,
    /// `<k t + eta>`.
    pub bracket: f64,
    pub rhs_sum: f64,
    /// The implied constant `lhs <k t + eta>^N / rhs_sum`.
    pub constant: f64,
}

pub fn y_decay_bound_check(
    h: &ModeField,
    k: [i64; 3],
    eta: [f64; 3],
    t: f64,
    order: usize,
    ell_prime: f64,
) -> Result<YBoundReport> {
    if order > 3 {
        return Err(Error::InvalidArgument(format!("Y order {order} exceeds 3")));
    }
    let diff = Differentiator::new(h.grid(), DerivativeScheme::default());
    // every multi-index with |w| <= order, built one Y at a time; components
    // commute, so nondecreasing index sequences enumerate them once each
    let mut level: Vec<(usize, ModeField)> = vec![(0, h.clone())];
    let mut rhs_sum = japanese_norm(h, -ell_prime);
    for _ in 0..order {
        let mut next = vec![];
        for (first, f) in &level {
            let y = apply_y_with(&diff, f, k, eta, t);
            for (j, yj) in y.into_iter().enumerate().skip(*first) {
                rhs_sum += japanese_norm(&yj, -ell_prime);
                next.push((j, yj));
            }
        }
        level = next;
    }
    let shift: f64 = (0..3).map(|a| (k[a] as f64 * t + eta[a]).powi(2)).sum();
    let bracket = (1.0 + shift).sqrt();
    let lhs = h.velocity_average().norm();
    Ok(YBoundReport {
        t,
        order,
        lhs,
        bracket,
        rhs_sum,
        constant: lhs * bracket.powi(order as i32) / rhs_sum,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::phase_space::{build_grid, norm_sq};
    use crate::semigroup::exact_free_semigroup;

    #[test]
    fn y_at_rest_is_the_gradient() {
        let g = Arc::new(build_grid(6.0, 24).unwrap());
        let h = ModeField::sqrt_maxwellian(g.clone(), [1, 0, 0]);
        let y = apply_y(&h, [1, 0, 0], [0.0; 3], 0.0);
        let y1 = apply_y(&h, [0, 0, 0], [1.0, 0.0, 0.0], 0.0);
        for idx in 0..g.len() {
            let v = g.coords(idx);
            let s = (-0.5 * norm_sq(v)).exp();
            for a in 0..3 {
                assert!((y[a].values()[idx] - C64::new(-v[a] * s, 0.0)).norm() < 1e-7);
            }
            assert!((y1[0].values()[idx] - C64::new(-v[0] * s, s)).norm() < 1e-7);
        }
    }

    #[test]
    fn commutes_with_free_transport() {
        let g = Arc::new(build_grid(6.0, 32).unwrap());
        let h0 = ModeField::from_fn(g.clone(), [1, 1, 0], |v| C64::new((1.0 + v[0] * v[1]) * (-0.5 * norm_sq(v)).exp(), 0.0));
        let t = 1.5;
        let moved = exact_free_semigroup(&h0, [1, 1, 0], t).to_physical();
        let lhs = apply_y(&moved, [1, 1, 0], [0.0; 3], t);
        let grad = apply_y(&h0, [0, 0, 0], [0.0; 3], 0.0);
        for a in 0..3 {
            let rhs = exact_free_semigroup(&grad[a], [1, 1, 0], t).to_physical();
            assert!(lhs[a].sub(&rhs).unwrap().max_abs() < 1e-6);
        }
    }

    #[test]
    fn bound_constant_on_free_transport() {
        let g = Arc::new(build_grid(6.0, 24).unwrap());
        let h = ModeField::sqrt_maxwellian(g.clone(), [1, 0, 0]);
        let at_rest = y_decay_bound_check(&h, [1, 0, 0], [0.0; 3], 0.0, 0, 1.0).unwrap();
        assert!(at_rest.constant <= japanese_norm(&h, 1.0) * (1.0 + 1e-12));
        let mut worst: f64 = 0.0;
        for i in 0..=40 {
            let t = 0.5 * i as f64;
            let moved = exact_free_semigroup(&h, [1, 0, 0], t);
            let r = y_decay_bound_check(&moved, [1, 0, 0], [0.0; 3], t, 2, 1.0).unwrap();
            worst = worst.max(r.constant);
        }
        assert!(worst.is_finite() && worst < 10.0, "{worst}");
        assert!(y_decay_bound_check(&h, [1, 0, 0], [0.0; 3], 0.0, 4, 1.0).is_err());
    }
}
