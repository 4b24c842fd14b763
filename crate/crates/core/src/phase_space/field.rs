use std::sync::Arc;

use log::warn;

use super::grid::VelocityGrid;
use crate::error::{Error, Result};
use crate::C64;

/// One spatial Fourier mode `h_k(v)` sampled on a velocity grid.
///
/// The physical field is `e^{-i twist.v} * values`. Free transport over time
/// `t` adds `k t` to the twist, so phase mixing never has to be resolved by
/// the grid. A twist of zero means the stored values are the field itself.
#[derive(Clone, Debug)]
pub struct ModeField {
    grid: Arc<VelocityGrid>,
    values: Vec<C64>,
    k: [i64; 3],
    twist: [f64; 3],
}

impl ModeField {
    pub fn new(grid: Arc<VelocityGrid>, values: Vec<C64>, k: [i64; 3]) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "field has {} values, grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        let f = Self {
            grid,
            values,
            k,
            twist: [0.0; 3],
        };
        f.check_finite("ModeField::new")?;
        Ok(f)
    }

    /// Constructor used by operators whose outputs are finite by construction
    /// of finite inputs; callers that ingest external data use [`ModeField::new`].
    pub(crate) fn from_parts(
        grid: Arc<VelocityGrid>,
        values: Vec<C64>,
        k: [i64; 3],
        twist: [f64; 3],
    ) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self {
            grid,
            values,
            k,
            twist,
        }
    }

    pub fn zeros(grid: Arc<VelocityGrid>, k: [i64; 3]) -> Self {
        let n = grid.len();
        Self::from_parts(grid, vec![C64::new(0.0, 0.0); n], k, [0.0; 3])
    }

    pub fn from_fn(grid: Arc<VelocityGrid>, k: [i64; 3], f: impl Fn([f64; 3]) -> C64) -> Self {
        let values = grid.sample(f);
        Self::from_parts(grid, values, k, [0.0; 3])
    }

    pub fn from_real(grid: Arc<VelocityGrid>, k: [i64; 3], values: &[f64]) -> Self {
        let values = values.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_parts(grid, values, k, [0.0; 3])
    }

    /// `sqrt(mu)` as a mode field.
    pub fn sqrt_maxwellian(grid: Arc<VelocityGrid>, k: [i64; 3]) -> Self {
        let sm = grid.sqrt_maxwellian();
        Self::from_real(grid, k, &sm)
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn grid_arc(&self) -> &Arc<VelocityGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn k(&self) -> [i64; 3] {
        self.k
    }

    pub fn twist(&self) -> [f64; 3] {
        self.twist
    }

    pub fn with_twist(mut self, twist: [f64; 3]) -> Self {
        self.twist = twist;
        self
    }

    pub fn with_values(&self, values: Vec<C64>) -> Self {
        Self::from_parts(self.grid.clone(), values, self.k, self.twist)
    }

    pub fn is_twisted(&self) -> bool {
        self.twist.iter().any(|&t| t != 0.0)
    }

    /// Physical node values `e^{-i twist.v} * values` with zero twist.
    ///
    /// Once `|twist_a| h` approaches pi the result is no longer resolved.
    pub fn to_physical(&self) -> ModeField {
        if !self.is_twisted() {
            return self.clone();
        }
        let h = self.grid.spacing();
        if self
            .twist
            .iter()
            .any(|&t| t.abs() * h > std::f64::consts::FRAC_PI_2)
        {
            warn!(
                "materialising twist {:?}: phase is under-resolved at spacing {h}",
                self.twist
            );
        }
        let tw = self.twist;
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(idx, z)| {
                let v = self.grid.coords(idx);
                let ph = -(tw[0] * v[0] + tw[1] * v[1] + tw[2] * v[2]);
                z * C64::from_polar(1.0, ph)
            })
            .collect();
        Self::from_parts(self.grid.clone(), values, self.k, [0.0; 3])
    }

    pub fn check_same_frame(&self, other: &ModeField) -> Result<()> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch);
        }
        if self.twist != other.twist {
            return Err(Error::InvalidArgument(
                "fields carry different transport twists".into(),
            ));
        }
        Ok(())
    }

    pub fn check_finite(&self, context: &str) -> Result<()> {
        check_finite(&self.grid, &self.values, context)
    }

    pub fn scale(&self, c: C64) -> ModeField {
        self.with_values(self.values.iter().map(|z| z * c).collect())
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: C64, other: &ModeField) -> Result<ModeField> {
        self.check_same_frame(other)?;
        Ok(self.with_values(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| x + a * y)
                .collect(),
        ))
    }

    pub fn sub(&self, other: &ModeField) -> Result<ModeField> {
        self.axpy(C64::new(-1.0, 0.0), other)
    }

    /// Grid inner product `<self, other> = sum self * conj(other) h^3`.
    pub fn inner(&self, other: &ModeField) -> Result<C64> {
        self.check_same_frame(other)?;
        Ok(inner(&self.values, &other.values) * self.grid.weight())
    }

    pub fn norm(&self) -> f64 {
        (self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.weight()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest `|h|` within two cells of the boundary relative to the field max.
    pub fn tail_ratio(&self) -> f64 {
        let max = self.max_abs();
        if max == 0.0 {
            return 0.0;
        }
        let mut tail: f64 = 0.0;
        for (idx, z) in self.values.iter().enumerate() {
            if self.grid.is_boundary(idx, 2) {
                tail = tail.max(z.norm());
            }
        }
        tail / max
    }

    /// Emits a warning when the boundary layer carries more than 1e-6 of the max.
    pub fn warn_if_tail(&self, context: &str) {
        let r = self.tail_ratio();
        if r > 1e-6 {
            warn!("{context}: boundary tail {r:.2e} of field max; truncation may matter");
        }
    }

    /// `int h sqrt(mu) dv` of the physical field.
    ///
    /// For a twisted field this is the trapezoid sum of `e^{-i twist.v} g sqrt(mu)`,
    /// taken as zero when some `|twist_a|` exceeds the Nyquist wavenumber `pi/h`:
    /// the sum would then be dominated by aliases while the true value is below
    /// `e^{-(pi/h)^2/4}`.
    pub fn velocity_average(&self) -> C64 {
        let h = self.grid.spacing();
        let nyq = std::f64::consts::PI / h;
        if self.twist.iter().any(|t| t.abs() > nyq) {
            return C64::new(0.0, 0.0);
        }
        let axis = self.grid.axis();
        let n = self.grid.n();
        let factors: Vec<Vec<C64>> = (0..3)
            .map(|a| {
                axis.iter()
                    .map(|&x| C64::from_polar((-0.5 * x * x).exp(), -self.twist[a] * x))
                    .collect()
            })
            .collect();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                let fij = factors[0][i] * factors[1][j];
                let base = (i * n + j) * n;
                let mut line = C64::new(0.0, 0.0);
                for l in 0..n {
                    line += self.values[base + l] * factors[2][l];
                }
                acc += fij * line;
            }
        }
        acc * self.grid.weight()
    }
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

pub(crate) fn check_finite(grid: &VelocityGrid, values: &[C64], context: &str) -> Result<()> {
    if let Some(idx) = values
        .iter()
        .position(|z| !(z.re.is_finite() && z.im.is_finite()))
    {
        return Err(Error::NonFinite {
            context: context.to_string(),
            node: grid.unravel(idx),
            coords: grid.coords(idx),
        });
    }
    Ok(())
}

/// `int h sqrt(mu) dv` (free function form).
pub fn velocity_average(h: &ModeField) -> C64 {
    h.velocity_average()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::build_grid;
    use std::f64::consts::PI;

    fn grid(n: usize) -> Arc<VelocityGrid> {
        Arc::new(build_grid(6.0, n).unwrap())
    }

    #[test]
    fn average_of_maxwellian() {
        let g = grid(32);
        let h = ModeField::sqrt_maxwellian(g.clone(), [0; 3]);
        assert!((h.velocity_average().re - PI.powf(1.5)).abs() < 1e-9);
        let odd = ModeField::from_fn(g, [0; 3], |v| {
            C64::new(
                v[0] * (-0.5 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2])).exp(),
                0.0,
            )
        });
        assert!(odd.velocity_average().norm() < 1e-14);
    }

    #[test]
    fn average_of_phase_mixed_maxwellian() {
        // int e^{-i t v1} mu dv = pi^{3/2} e^{-t^2/4}
        let g = grid(32);
        let t: f64 = 2.0;
        let expected = PI.powf(1.5) * (-t * t / 4.0).exp();
        let h = ModeField::from_fn(g.clone(), [1, 0, 0], |v| {
            C64::from_polar(
                (-0.5 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2])).exp(),
                -t * v[0],
            )
        });
        assert!((h.velocity_average() - expected).norm() < 1e-9);
        let tw = ModeField::sqrt_maxwellian(g, [1, 0, 0]).with_twist([t, 0.0, 0.0]);
        assert!((tw.velocity_average() - expected).norm() < 1e-9);
        assert!((tw.to_physical().velocity_average() - expected).norm() < 1e-9);
    }

    #[test]
    fn average_vanishes_past_nyquist() {
        let g = grid(16);
        let nyq = PI / g.spacing();
        let tw = ModeField::sqrt_maxwellian(g, [1, 0, 0]).with_twist([nyq * 1.01, 0.0, 0.0]);
        assert_eq!(tw.velocity_average(), C64::new(0.0, 0.0));
    }

    #[test]
    fn rejects_non_finite() {
        let g = grid(8);
        let mut v = vec![C64::new(0.0, 0.0); g.len()];
        v[5] = C64::new(f64::NAN, 0.0);
        match ModeField::new(g, v, [0; 3]) {
            Err(Error::NonFinite { node, .. }) => assert_eq!(node, [0, 0, 5]),
            other => panic!("expected NonFinite, got {other:?}"),
        }
    }
}
