use crate::error::{Error, Result};

/// Cell-centred tensor grid on `[-L_v, L_v]^3`.
#[derive(Clone, Debug, PartialEq)]
pub struct VelocityGrid {
    half_width: f64,
    n: usize,
    spacing: f64,
    axis: Vec<f64>,
}

pub fn build_grid(half_width: f64, n: usize) -> Result<VelocityGrid> {
    VelocityGrid::new(half_width, n)
}

impl VelocityGrid {
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half width must be positive, got {half_width}"
            )));
        }
        if !(3.0..=10.0).contains(&half_width) {
            return Err(Error::InvalidGrid(format!(
                "half width {half_width} outside [3, 10]"
            )));
        }
        if n % 2 != 0 || !(8..=128).contains(&n) {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be even and in [8, 128], got {n}"
            )));
        }
        let spacing = 2.0 * half_width / n as f64;
        let axis = (0..n)
            .map(|i| -half_width + (i as f64 + 0.5) * spacing)
            .collect();
        Ok(Self {
            half_width,
            n,
            spacing,
            axis,
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Number of nodes, `N^3`.
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Uniform quadrature weight `h^3`.
    pub fn weight(&self) -> f64 {
        self.spacing.powi(3)
    }

    /// One-dimensional node coordinates (identical on every axis).
    pub fn axis(&self) -> &[f64] {
        &self.axis
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, l: usize) -> usize {
        (i * self.n + j) * self.n + l
    }

    #[inline]
    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [f64; 3] {
        let [i, j, l] = self.unravel(idx);
        [self.axis[i], self.axis[j], self.axis[l]]
    }

    /// Evaluate `f` at every node, in storage order.
    pub fn sample<T>(&self, f: impl Fn([f64; 3]) -> T) -> Vec<T> {
        let mut out = Vec::with_capacity(self.len());
        for &a in &self.axis {
            for &b in &self.axis {
                for &c in &self.axis {
                    out.push(f([a, b, c]));
                }
            }
        }
        out
    }

    /// `sqrt(mu) = e^{-|v|^2/2}` at the nodes.
    pub fn sqrt_maxwellian(&self) -> Vec<f64> {
        let g: Vec<f64> = self.axis.iter().map(|x| (-0.5 * x * x).exp()).collect();
        let mut out = Vec::with_capacity(self.len());
        for &a in &g {
            for &b in &g {
                for &c in &g {
                    out.push(a * b * c);
                }
            }
        }
        out
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().sum::<f64>() * self.weight()
    }

    /// Nodes within `depth` cells of a face.
    pub fn is_boundary(&self, idx: usize, depth: usize) -> bool {
        let n = self.n;
        self.unravel(idx)
            .iter()
            .any(|&c| c < depth || c + depth >= n)
    }

    pub fn same_as(&self, other: &VelocityGrid) -> bool {
        self.n == other.n && self.half_width == other.half_width
    }
}

/// `<v> = sqrt(1 + |v|^2)`.
#[inline]
pub fn japanese(v: [f64; 3]) -> f64 {
    (1.0 + v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

#[inline]
pub fn norm_sq(v: [f64; 3]) -> f64 {
    v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn spacing_and_size() {
        let g = build_grid(5.0, 16).unwrap();
        assert_eq!(g.spacing(), 0.625);
        assert_eq!(g.len(), 4096);
        let g = build_grid(6.0, 32).unwrap();
        assert_eq!(g.spacing(), 0.375);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(build_grid(6.0, 31).is_err());
        assert!(build_grid(-1.0, 32).is_err());
        assert!(build_grid(0.0, 32).is_err());
        assert!(build_grid(6.0, 6).is_err());
    }

    #[test]
    fn nodes_are_symmetric() {
        let g = build_grid(6.0, 24).unwrap();
        let a = g.axis();
        for i in 0..a.len() {
            assert_eq!(a[i], -a[a.len() - 1 - i]);
        }
        assert!(a.iter().all(|&x| x != 0.0));
    }

    #[test]
    fn maxwellian_mass() {
        let g = build_grid(6.0, 48).unwrap();
        let mu: Vec<f64> = g.sqrt_maxwellian().iter().map(|s| s * s).collect();
        assert!((g.integrate(&mu) - PI.powf(1.5)).abs() < 1e-6);
    }

    #[test]
    fn moments_converge() {
        // int v1^2 mu = pi^{3/2}/2 and int |v|^4 mu = 15 pi^{3/2}/4
        let mut prev = f64::INFINITY;
        for n in [8, 12, 16] {
            let g = build_grid(5.0, n).unwrap();
            let m2 = g.integrate(&g.sample(|v| v[0] * v[0] * (-norm_sq(v)).exp()));
            let m4 = g.integrate(&g.sample(|v| norm_sq(v).powi(2) * (-norm_sq(v)).exp()));
            let err = (m2 - PI.powf(1.5) / 2.0).abs() + (m4 - 3.75 * PI.powf(1.5)).abs();
            assert!(err < prev);
            prev = err;
        }
        assert!(prev < 1e-6);
    }
}
