use std::sync::Arc;

use super::field::ModeField;
use super::grid::{norm_sq, VelocityGrid};
use crate::error::{Error, Result};
use crate::C64;

/// Orthonormal basis of span{sqrt(mu), v_i sqrt(mu), |v|^2 sqrt(mu)} in the
/// grid inner product, built by modified Gram-Schmidt.
#[derive(Clone, Debug)]
pub struct NullBasis {
    grid: Arc<VelocityGrid>,
    vectors: Vec<Vec<f64>>,
}

/// The five collision invariants `b` on the grid, unnormalised.
pub fn collision_invariants(grid: &VelocityGrid) -> Vec<Vec<f64>> {
    let sm = grid.sqrt_maxwellian();
    let mut out = vec![sm.clone()];
    for a in 0..3 {
        out.push(
            sm.iter()
                .enumerate()
                .map(|(idx, s)| grid.coords(idx)[a] * s)
                .collect(),
        );
    }
    out.push(
        sm.iter()
            .enumerate()
            .map(|(idx, s)| norm_sq(grid.coords(idx)) * s)
            .collect(),
    );
    out
}

impl NullBasis {
    pub fn new(grid: Arc<VelocityGrid>) -> Result<Self> {
        let w = grid.weight();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * w;
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(5);
        for (index, mut b) in collision_invariants(&grid).into_iter().enumerate() {
            let scale = dot(&b, &b).sqrt();
            for e in &vectors {
                let c = dot(&b, e);
                b.iter_mut().zip(e).for_each(|(x, y)| *x -= c * y);
            }
            let nrm = dot(&b, &b).sqrt();
            if !(nrm > 1e-8 * scale) {
                return Err(Error::DegenerateGram {
                    index,
                    residual: nrm / scale,
                });
            }
            b.iter_mut().for_each(|x| *x /= nrm);
            vectors.push(b);
        }
        Ok(Self { grid, vectors })
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    /// Coefficients `<h, e_i>` of the physical field.
    pub fn coefficients(&self, h: &ModeField) -> Result<[C64; 5]> {
        if !h.grid().same_as(&self.grid) {
            return Err(Error::GridMismatch);
        }
        let phys = h.to_physical();
        let w = self.grid.weight();
        let mut c = [C64::new(0.0, 0.0); 5];
        for (ci, e) in c.iter_mut().zip(&self.vectors) {
            *ci = phys.values().iter().zip(e).map(|(z, x)| z * x).sum::<C64>() * w;
        }
        Ok(c)
    }

    /// `Pi h`, returned untwisted.
    pub fn project(&self, h: &ModeField) -> Result<ModeField> {
        let c = self.coefficients(h)?;
        let mut out = vec![C64::new(0.0, 0.0); self.grid.len()];
        for (ci, e) in c.iter().zip(&self.vectors) {
            out.iter_mut().zip(e).for_each(|(o, x)| *o += ci * x);
        }
        Ok(ModeField::from_parts(
            self.grid.clone(),
            out,
            h.k(),
            [0.0; 3],
        ))
    }
}

/// `Pi h`: orthogonal projection onto the collision invariants.
pub fn project_null(h: &ModeField) -> Result<ModeField> {
    NullBasis::new(h.grid_arc().clone())?.project(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::build_grid;

    #[test]
    fn invariants_are_fixed() {
        let g = Arc::new(build_grid(6.0, 24).unwrap());
        let h = ModeField::sqrt_maxwellian(g, [0; 3]);
        let p = project_null(&h).unwrap();
        assert!(p.sub(&h).unwrap().norm() < 1e-10);
    }

    #[test]
    fn odd_moment_is_killed() {
        let g = Arc::new(build_grid(6.0, 24).unwrap());
        let h = ModeField::from_fn(g, [0; 3], |v| {
            C64::new(v[0] * v[1] * (-0.5 * norm_sq(v)).exp(), 0.0)
        });
        assert!(project_null(&h).unwrap().norm() < 1e-12);
    }

    #[test]
    fn degenerate_gram_detected() {
        // a coarse box where |v|^2 sqrt(mu) is still independent: no error
        let g = Arc::new(build_grid(3.0, 8).unwrap());
        assert!(NullBasis::new(g).is_ok());
    }
}
