use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::fields::{sigma_at_points, CollisionFields};
use super::operators::LandauOperator;
use crate::error::Result;
use crate::phase_space::{collision_invariants, norm_sq, ModeField};
use crate::util::random_smooth_field;
use crate::C64;

/// Symmetry and sign of `L` measured on seeded random pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub pairs: usize,
    /// `max |<L g1, g2> - <g1, L g2>| / (|L g1| |g2| + |g1| |L g2|)`.
    pub max_asymmetry: f64,
    /// `min Re<L g, g> / |g|^2`; non-negative up to round-off.
    pub min_coercivity: f64,
}

/// Residual of `L` on the five collision invariants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FloorReport {
    pub n: usize,
    /// `|L b| / |b|` for `b = sqrt(mu), v_1 sqrt(mu), v_2 sqrt(mu), v_3 sqrt(mu), |v|^2 sqrt(mu)`.
    pub ratios: [f64; 5],
    /// Largest of the ratios: the discretisation floor of the grid.
    pub floor: f64,
}

/// Checks of the collision matrix `sigma` against its closed forms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaReport {
    /// `max_ij |sigma_ij(0) - (4 pi / 3) delta_ij| / (4 pi / 3)`.
    pub origin_error: f64,
    /// Relative spread `(max - min) / min` of `lambda_1 |v|^3` over `4 <= |v| <= 5.5`.
    pub lambda1_spread: f64,
    /// Relative spread of `lambda_2 |v|` over the same shell.
    pub lambda2_spread: f64,
    /// Nodes in the shell.
    pub shell_nodes: usize,
}

/// Inner radius of the shell on which the large-velocity asymptotics are read.
pub const SHELL_INNER: f64 = 4.0;
/// Outer radius of that shell.
pub const SHELL_OUTER: f64 = 5.5;

/// Applies `L` to `pairs` seeded pairs of smooth complex fields and records
/// the worst relative asymmetry and the smallest Rayleigh quotient.
pub fn symmetry_probe(cf: &Arc<CollisionFields>, pairs: usize, seed: u64) -> Result<SymmetryReport> {
    let op = LandauOperator::new(cf.clone())?;
    let grid = cf.grid().clone();
    let mut max_asymmetry: f64 = 0.0;
    let mut min_coercivity = f64::INFINITY;
    for p in 0..pairs as u64 {
        let g1 = random_smooth_field(&grid, seed, 2 * p, false);
        let g2 = random_smooth_field(&grid, seed, 2 * p + 1, false);
        let l1 = op.apply_l(&g1)?;
        let l2 = op.apply_l(&g2)?;
        let gap = (l1.inner(&g2)? - g1.inner(&l2)?).norm();
        let scale = l1.norm() * g2.norm() + g1.norm() * l2.norm();
        max_asymmetry = max_asymmetry.max(gap / scale);
        for (g, lg) in [(&g1, &l1), (&g2, &l2)] {
            min_coercivity = min_coercivity.min(lg.inner(g)?.re / g.norm().powi(2));
        }
    }
    Ok(SymmetryReport {
        pairs,
        max_asymmetry,
        min_coercivity,
    })
}

/// `|L b| / |b|` on each collision invariant of the grid behind `cf`.
pub fn invariant_floor(cf: &Arc<CollisionFields>) -> Result<FloorReport> {
    let op = LandauOperator::new(cf.clone())?;
    let grid = cf.grid().clone();
    let mut ratios = [0.0; 5];
    for (r, b) in ratios.iter_mut().zip(collision_invariants(&grid)) {
        let b = ModeField::from_real(grid.clone(), [0; 3], &b);
        *r = op.apply_l(&b)?.norm() / b.norm();
    }
    Ok(FloorReport {
        n: grid.n(),
        ratios,
        floor: ratios.iter().cloned().fold(0.0, f64::max),
    })
}

/// `sigma(0)` against `(4 pi / 3) I` and the flatness of `lambda_1 |v|^3` and
/// `lambda_2 |v|` on the shell `4 <= |v| <= 5.5`.
pub fn sigma_checks(cf: &CollisionFields) -> Result<SigmaReport> {
    let grid = cf.grid();
    let s0 = sigma_at_points(grid, &[[0.0; 3]])?[0];
    let exact = 4.0 * std::f64::consts::PI / 3.0;
    let mut origin_error: f64 = 0.0;
    for (a, row) in s0.iter().enumerate() {
        for (b, &s) in row.iter().enumerate() {
            let target = if a == b { exact } else { 0.0 };
            origin_error = origin_error.max((s - target).abs() / exact);
        }
    }
    let (mut p1, mut p2) = (vec![], vec![]);
    for idx in 0..grid.len() {
        let r = norm_sq(grid.coords(idx)).sqrt();
        if (SHELL_INNER..=SHELL_OUTER).contains(&r) {
            p1.push(cf.lambda1[idx] * r.powi(3));
            p2.push(cf.lambda2[idx] * r);
        }
    }
    let spread = |p: &[f64]| {
        let (lo, hi) = p
            .iter()
            .fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
        if p.is_empty() {
            f64::NAN
        } else {
            (hi - lo) / lo
        }
    };
    Ok(SigmaReport {
        origin_error,
        lambda1_spread: spread(&p1),
        lambda2_spread: spread(&p2),
        shell_nodes: p1.len(),
    })
}

/// Rayleigh quotient of a single field, `Re<L g, g> / |g|^2`.
pub fn rayleigh_quotient(g: &ModeField, cf: &Arc<CollisionFields>) -> Result<f64> {
    let lg = LandauOperator::new(cf.clone())?.apply_l(g)?;
    let num: C64 = lg.inner(g)?;
    Ok(num.re / g.norm().powi(2))
}
