use std::sync::Arc;

use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::grid::VelocityGrid;
use crate::C64;

/// How `d/dv_a` is discretised.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeScheme {
    /// Periodic Fourier differentiation with the Nyquist mode zeroed. Fields
    /// decay to `e^{-L^2/2}` at the box edge, so this is accurate to that
    /// level on smooth data and resolves filaments up to the grid Nyquist.
    #[default]
    Spectral,
    /// 4th-order central differences with zero extension outside the box
    /// (exactly skew-symmetric).
    Fd4,
}

/// A banded 1-D operator, applied along any axis of an `N^3` array.
#[derive(Clone, Debug)]
pub struct Banded {
    /// `(first column, coefficients)` per row.
    rows: Vec<(usize, Vec<f64>)>,
}

/// Central 4th-order first-derivative weights for offsets `-2..=2`, times `12 h`.
const CENTRAL: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];

impl Banded {
    /// 4th-order central first derivative with zero extension outside the
    /// box, which makes the matrix exactly skew-symmetric.
    pub fn fd4(n: usize, h: f64) -> Self {
        let s = 1.0 / (12.0 * h);
        let rows = (0..n)
            .map(|i| {
                let lo = i.saturating_sub(2);
                let hi = (i + 2).min(n - 1);
                (lo, (lo..=hi).map(|j| CENTRAL[j + 2 - i] * s).collect())
            })
            .collect();
        Self { rows }
    }

    pub fn add_diagonal(&self, d: &[f64]) -> Self {
        let mut rows = self.rows.clone();
        for (i, (start, c)) in rows.iter_mut().enumerate() {
            c[i - *start] += d[i];
        }
        Self { rows }
    }

    fn n(&self) -> usize {
        self.rows.len()
    }

    /// Applies the matrix to a single 1-D vector.
    pub fn apply_vector(&self, u: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|(start, c)| c.iter().zip(&u[*start..]).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Applies the matrix along `axis` of an `n^3` array.
    pub fn apply(&self, u: &[C64], axis: usize) -> Vec<C64> {
        let n = self.n();
        let mut out = vec![C64::new(0.0, 0.0); u.len()];
        let mut line = vec![C64::new(0.0, 0.0); n];
        for (base, s) in lines(n, axis) {
            for (j, l) in line.iter_mut().enumerate() {
                *l = u[base + s * j];
            }
            for (i, (start, c)) in self.rows.iter().enumerate() {
                let acc: C64 = c.iter().zip(&line[*start..]).map(|(a, b)| b * a).sum();
                out[base + s * i] = acc;
            }
        }
        out
    }

    /// Applies the transpose along `axis`.
    pub fn apply_transpose(&self, u: &[C64], axis: usize) -> Vec<C64> {
        let n = self.n();
        let mut out = vec![C64::new(0.0, 0.0); u.len()];
        let mut line = vec![C64::new(0.0, 0.0); n];
        for (base, s) in lines(n, axis) {
            line.iter_mut().for_each(|l| *l = C64::new(0.0, 0.0));
            for (i, (start, c)) in self.rows.iter().enumerate() {
                let y = u[base + s * i];
                for (l, ck) in line[*start..].iter_mut().zip(c) {
                    *l += y * ck;
                }
            }
            for (j, l) in line.iter().enumerate() {
                out[base + s * j] = *l;
            }
        }
        out
    }
}

struct SpectralLine {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    wavenumbers: Vec<f64>,
}

/// Applies the discrete `d/dv_a - i kappa` along one axis of an `N^3` array.
pub struct Differentiator {
    n: usize,
    h: f64,
    scheme: DerivativeScheme,
    axis: Vec<f64>,
    banded: Option<Banded>,
    spectral: Option<SpectralLine>,
}

impl std::fmt::Debug for Differentiator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Differentiator")
            .field("n", &self.n)
            .field("h", &self.h)
            .field("scheme", &self.scheme)
            .finish()
    }
}

/// Iterates the `N^2` lines along `axis` as `(base, stride)`.
pub(crate) fn lines(n: usize, axis: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n * n).map(move |p| {
        let (a, b) = (p / n, p % n);
        match axis {
            0 => (a * n + b, n * n),
            1 => (a * n * n + b, n),
            _ => ((a * n + b) * n, 1),
        }
    })
}

/// Signed FFT wavenumbers `2 pi m / (n h)` for `m` in `[-n/2, n/2)`.
pub fn fft_wavenumbers(n: usize, h: f64) -> Vec<f64> {
    let period = n as f64 * h;
    (0..n)
        .map(|m| {
            let s = if m < n.div_ceil(2) {
                m as f64
            } else {
                m as f64 - n as f64
            };
            2.0 * std::f64::consts::PI * s / period
        })
        .collect()
}

impl Differentiator {
    pub fn new(grid: &VelocityGrid, scheme: DerivativeScheme) -> Self {
        let n = grid.n();
        let h = grid.spacing();
        let axis = grid.axis().to_vec();
        let mut banded = None;
        let mut spectral = None;
        match scheme {
            DerivativeScheme::Fd4 => banded = Some(Banded::fd4(n, h)),
            DerivativeScheme::Spectral => {
                let mut planner = FftPlanner::new();
                let mut wavenumbers = fft_wavenumbers(n, h);
                wavenumbers[n / 2] = 0.0;
                spectral = Some(SpectralLine {
                    fwd: planner.plan_fft_forward(n),
                    inv: planner.plan_fft_inverse(n),
                    wavenumbers,
                });
            }
        }
        Self {
            n,
            h,
            scheme,
            axis,
            banded,
            spectral,
        }
    }

    pub fn scheme(&self) -> DerivativeScheme {
        self.scheme
    }

    /// For the stencil scheme, the 1-D matrix `D + m` with `m` the discrete
    /// log-derivative of `sqrt(mu)`, so that it annihilates `sqrt(mu)`.
    pub fn gradient_matrix(&self) -> Option<Banded> {
        match self.scheme {
            DerivativeScheme::Fd4 => {
                // D + m with m the discrete log-derivative of sqrt(mu)
                let d = self.banded.as_ref()?;
                let g: Vec<f64> = self.axis.iter().map(|x| (-0.5 * x * x).exp()).collect();
                let dg = d.apply_vector(&g);
                let m: Vec<f64> = dg.iter().zip(&g).map(|(a, b)| -a / b).collect();
                Some(d.add_diagonal(&m))
            }
            DerivativeScheme::Spectral => None,
        }
    }

    /// `(d/dv_axis - i kappa) u`.
    pub fn derivative(&self, u: &[C64], axis: usize, kappa: f64) -> Vec<C64> {
        let mut out = match (&self.banded, &self.spectral) {
            (Some(b), _) => b.apply(u, axis),
            (None, Some(sp)) => {
                let mut out = vec![C64::new(0.0, 0.0); u.len()];
                self.spectral(sp, u, &mut out, axis);
                out
            }
            _ => unreachable!(),
        };
        if kappa != 0.0 {
            let ik = C64::new(0.0, kappa);
            for (o, x) in out.iter_mut().zip(u) {
                *o -= ik * x;
            }
        }
        out
    }

    fn spectral(&self, sp: &SpectralLine, u: &[C64], out: &mut [C64], axis: usize) {
        let n = self.n;
        let mut buf = vec![C64::new(0.0, 0.0); n];
        let mut scratch = vec![
            C64::new(0.0, 0.0);
            sp.fwd
                .get_inplace_scratch_len()
                .max(sp.inv.get_inplace_scratch_len())
        ];
        let norm = 1.0 / n as f64;
        for (base, s) in lines(n, axis) {
            for i in 0..n {
                buf[i] = u[base + s * i];
            }
            sp.fwd.process_with_scratch(&mut buf, &mut scratch);
            for (b, &xi) in buf.iter_mut().zip(&sp.wavenumbers) {
                *b *= C64::new(0.0, xi * norm);
            }
            sp.inv.process_with_scratch(&mut buf, &mut scratch);
            for i in 0..n {
                out[base + s * i] = buf[i];
            }
        }
    }

    /// Multiplies every Fourier coefficient along each axis by
    /// `exp(-alpha (|xi|/xi_max)^order)`; a no-op for the stencil scheme.
    pub fn filter(&self, u: &mut [C64], alpha: f64, order: i32) {
        let Some(sp) = &self.spectral else { return };
        let n = self.n;
        let xi_max = std::f64::consts::PI / self.h;
        let damp: Vec<f64> = fft_wavenumbers(n, self.h)
            .iter()
            .map(|xi| (-alpha * (xi.abs() / xi_max).powi(order)).exp() / n as f64)
            .collect();
        let mut buf = vec![C64::new(0.0, 0.0); n];
        let mut scratch = vec![
            C64::new(0.0, 0.0);
            sp.fwd
                .get_inplace_scratch_len()
                .max(sp.inv.get_inplace_scratch_len())
        ];
        for axis in 0..3 {
            for (base, s) in lines(n, axis) {
                for i in 0..n {
                    buf[i] = u[base + s * i];
                }
                sp.fwd.process_with_scratch(&mut buf, &mut scratch);
                for (b, d) in buf.iter_mut().zip(&damp) {
                    *b *= d;
                }
                sp.inv.process_with_scratch(&mut buf, &mut scratch);
                for i in 0..n {
                    u[base + s * i] = buf[i];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::build_grid;

    fn gauss_line(grid: &VelocityGrid) -> (Vec<C64>, Vec<C64>) {
        let f = grid.sample(|v| {
            C64::new(
                (-0.5 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2])).exp(),
                0.0,
            )
        });
        let df = grid.sample(|v| {
            C64::new(
                -v[1] * (-0.5 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2])).exp(),
                0.0,
            )
        });
        (f, df)
    }

    fn max_err(a: &[C64], b: &[C64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn fd4_is_fourth_order() {
        let mut errs = vec![];
        for n in [32, 64] {
            let g = build_grid(6.0, n).unwrap();
            let d = Differentiator::new(&g, DerivativeScheme::Fd4);
            let (f, df) = gauss_line(&g);
            errs.push(max_err(&d.derivative(&f, 1, 0.0), &df));
        }
        let order = (errs[0] / errs[1]).log2();
        assert!((order - 4.0).abs() < 0.5, "order {order}");
    }

    #[test]
    fn spectral_is_exact_for_gaussian() {
        let g = build_grid(6.0, 32).unwrap();
        let d = Differentiator::new(&g, DerivativeScheme::Spectral);
        let (f, df) = gauss_line(&g);
        assert!(max_err(&d.derivative(&f, 1, 0.0), &df) < 1e-7);
    }

    #[test]
    fn skew_symmetry() {
        let g = build_grid(5.0, 8).unwrap();
        for scheme in [DerivativeScheme::Fd4, DerivativeScheme::Spectral] {
            let d = Differentiator::new(&g, scheme);
            let a: Vec<C64> = (0..g.len())
                .map(|i| C64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
                .collect();
            let b: Vec<C64> = (0..g.len())
                .map(|i| C64::new((i as f64 * 0.23).cos(), (i as f64 * 0.71).sin()))
                .collect();
            for axis in 0..3 {
                let da = d.derivative(&a, axis, 0.4);
                let db = d.derivative(&b, axis, 0.4);
                let lhs: C64 = da.iter().zip(&b).map(|(x, y)| x * y.conj()).sum();
                let rhs: C64 = a.iter().zip(&db).map(|(x, y)| x * y.conj()).sum();
                assert!((lhs + rhs).norm() < 1e-10, "{scheme:?} axis {axis}");
            }
        }
    }

    #[test]
    fn gradient_annihilates_maxwellian() {
        let g = build_grid(6.0, 16).unwrap();
        let d = Differentiator::new(&g, DerivativeScheme::Fd4);
        let gm = d.gradient_matrix().unwrap();
        let (f, _) = gauss_line(&g);
        assert!(gm.apply(&f, 2).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn transpose_is_adjoint() {
        let g = build_grid(5.0, 8).unwrap();
        let b = Differentiator::new(&g, DerivativeScheme::Fd4)
            .gradient_matrix()
            .unwrap();
        let x: Vec<C64> = (0..g.len())
            .map(|i| C64::new((i as f64 * 0.37).sin(), 0.0))
            .collect();
        let y: Vec<C64> = (0..g.len())
            .map(|i| C64::new((i as f64 * 0.23).cos(), 0.0))
            .collect();
        for axis in 0..3 {
            let lhs: C64 = b.apply(&x, axis).iter().zip(&y).map(|(p, q)| p * q).sum();
            let rhs: C64 = x
                .iter()
                .zip(&b.apply_transpose(&y, axis))
                .map(|(p, q)| p * q)
                .sum();
            assert!((lhs - rhs).norm() < 1e-10 * lhs.norm().max(1.0));
        }
    }
}
