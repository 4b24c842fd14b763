//! Spectral convolution with the truncated Landau kernel.
//!
//! A source supported in the grid box is zero-padded to `m` points per axis
//! and multiplied in Fourier space by the exact transform of
//! `Phi(z) e^{i kappa.z} 1_{|z|<R}`. When every source-target pair of interest
//! is closer than `R` and `m h >= 2 R + (box width)`, the result equals the
//! continuous convolution of the grid-interpolated source: no periodic images
//! and no singular quadrature error.

use super::fft3::PaddedFft;
use super::kernel::truncated_symbol;
use crate::error::Result;
use crate::phase_space::stencil::fft_wavenumbers;
use crate::phase_space::VelocityGrid;
use crate::C64;

#[derive(Debug, Clone)]
pub struct ConvolutionEngine {
    n: usize,
    m: usize,
    radius: f64,
    xi: Vec<f64>,
    fft: PaddedFft,
}

/// Packed symbol values on the padded frequency grid for one twist.
#[derive(Debug, Clone)]
pub struct Symbol {
    pub twist: [f64; 3],
    pub comps: [Vec<f64>; 6],
}

impl ConvolutionEngine {
    pub fn new(grid: &VelocityGrid, pad_factor: usize, radius: f64) -> Result<Self> {
        let n = grid.n();
        let m = pad_factor * n;
        let fft = PaddedFft::new(n, m)?;
        Ok(Self {
            n,
            m,
            radius,
            xi: fft_wavenumbers(m, grid.spacing()),
            fft,
        })
    }

    /// Engine for operator applications: sources and targets that matter live
    /// in the inscribed ball `|v| <= L_v`, so pairs are closer than `2 L_v`.
    pub fn for_operators(grid: &VelocityGrid) -> Result<Self> {
        Self::new(grid, 2, 2.0 * grid.half_width())
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn padded(&self) -> usize {
        self.m
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.xi
    }

    pub fn fft(&self) -> &PaddedFft {
        &self.fft
    }

    /// Transform of `Phi(z) e^{i twist.z} 1_{|z|<R}`, i.e. the truncated symbol
    /// evaluated at `xi - twist`.
    pub fn symbol(&self, twist: [f64; 3]) -> Symbol {
        let m = self.m;
        let total = m * m * m;
        let mut comps: [Vec<f64>; 6] = std::array::from_fn(|_| Vec::with_capacity(total));
        for &x0 in &self.xi {
            for &x1 in &self.xi {
                for &x2 in &self.xi {
                    let s = truncated_symbol(
                        [x0 - twist[0], x1 - twist[1], x2 - twist[2]],
                        self.radius,
                    );
                    for (c, v) in comps.iter_mut().zip(s) {
                        c.push(v);
                    }
                }
            }
        }
        Symbol { twist, comps }
    }

    /// One packed component of the symbol without storing the others.
    pub fn symbol_component(&self, twist: [f64; 3], comp: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.m * self.m * self.m);
        for &x0 in &self.xi {
            for &x1 in &self.xi {
                for &x2 in &self.xi {
                    out.push(
                        truncated_symbol(
                            [x0 - twist[0], x1 - twist[1], x2 - twist[2]],
                            self.radius,
                        )[comp],
                    );
                }
            }
        }
        out
    }

    pub fn forward(&self, src: &[C64]) -> Vec<C64> {
        debug_assert_eq!(src.len(), self.n * self.n * self.n);
        self.fft.forward(src)
    }

    /// `out_a = sum_b (S_ab * src_b)`.
    pub fn apply_matrix(&self, sym: &Symbol, src: [&[C64]; 3]) -> [Vec<C64>; 3] {
        let hats: Vec<Vec<C64>> = src.iter().map(|s| self.forward(s)).collect();
        std::array::from_fn(|a| {
            let c = [
                &sym.comps[super::kernel::packed(a, 0)],
                &sym.comps[super::kernel::packed(a, 1)],
                &sym.comps[super::kernel::packed(a, 2)],
            ];
            let prod: Vec<C64> = (0..hats[0].len())
                .map(|p| hats[0][p] * c[0][p] + hats[1][p] * c[1][p] + hats[2][p] * c[2][p])
                .collect();
            self.fft.inverse(prod)
        })
    }

    /// All six packed components of `Phi * src`.
    pub fn apply_tensor(&self, sym: &Symbol, src: &[C64]) -> [Vec<C64>; 6] {
        let hat = self.forward(src);
        std::array::from_fn(|c| {
            let prod: Vec<C64> = hat.iter().zip(&sym.comps[c]).map(|(z, s)| z * s).collect();
            self.fft.inverse(prod)
        })
    }

    /// Untwisted `Phi * src` evaluated at an arbitrary point by a direct
    /// trigonometric sum over the padded spectrum. `origin` is the coordinate
    /// of grid node 0 on each axis.
    pub fn evaluate_at(&self, src_hat: &[C64], point: [f64; 3], origin: f64) -> [f64; 6] {
        let m = self.m;
        let phases: Vec<Vec<C64>> = (0..3)
            .map(|a| {
                self.xi
                    .iter()
                    .map(|&x| C64::from_polar(1.0, x * (point[a] - origin)))
                    .collect()
            })
            .collect();
        let mut acc = [C64::new(0.0, 0.0); 6];
        let mut p = 0;
        for i in 0..m {
            for j in 0..m {
                let pij = phases[0][i] * phases[1][j];
                for l in 0..m {
                    let z = src_hat[p] * pij * phases[2][l];
                    let s = truncated_symbol([self.xi[i], self.xi[j], self.xi[l]], self.radius);
                    for c in 0..6 {
                        acc[c] += z * s[c];
                    }
                    p += 1;
                }
            }
        }
        let norm = 1.0 / (m * m * m) as f64;
        std::array::from_fn(|c| acc[c].re * norm)
    }
}
