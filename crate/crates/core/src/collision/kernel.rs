//! The Coulomb-Landau kernel `Phi_ij(z) = |z|^{-1} (delta_ij - z_i z_j / |z|^2)`
//! and the Fourier transform of its restriction to a ball.

use std::f64::consts::PI;

/// Mean of `1/|z|` over the unit cube `[-1/2, 1/2]^3`.
pub const CUBE_MEAN_INVERSE_DISTANCE: f64 = 2.380_077_364_133_64;

/// `Phi(z)`; at `z = 0` the average over one cell of side `h`.
///
/// The isotropic part `delta/|z|` has cell mean `c/h`; by cubic symmetry
/// `z_i z_j / |z|^3` averages to a third of that times `delta_ij`.
pub fn phi_kernel(z: [f64; 3], h: f64) -> [[f64; 3]; 3] {
    let r2 = z[0] * z[0] + z[1] * z[1] + z[2] * z[2];
    let mut out = [[0.0; 3]; 3];
    if r2 == 0.0 {
        let d = (2.0 / 3.0) * CUBE_MEAN_INVERSE_DISTANCE / h;
        for (i, row) in out.iter_mut().enumerate() {
            row[i] = d;
        }
        return out;
    }
    let r = r2.sqrt();
    for i in 0..3 {
        for j in 0..3 {
            let delta = if i == j { 1.0 } else { 0.0 };
            out[i][j] = (delta - z[i] * z[j] / r2) / r;
        }
    }
    out
}

/// Radial profile of the truncated symbol.
///
/// For `x = |xi| R`, the transform of `Phi 1_{|z|<R}` is
/// `alpha delta_ij + beta xi_i xi_j / |xi|^2` with
/// `alpha = 4 pi R^2 (j0(x) - cos x) / x^2` and
/// `beta = 4 pi R^2 (3 (1 - j0(x)) - (1 - cos x)) / x^2`.
pub fn truncated_profile(rho: f64, radius: f64) -> (f64, f64) {
    let x = rho * radius;
    let c = 4.0 * PI * radius * radius;
    if x < 1.0 {
        // Taylor series; both brackets cancel to O(x^2) and O(x^4).
        let x2 = x * x;
        let mut a = 0.0;
        let mut b = 0.0;
        let mut pow = 1.0; // x^{2n-2}
        let mut fact = 6.0; // (2n+1)!
        for n in 1..=12 {
            let nf = n as f64;
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            a += sign * 2.0 * nf * pow / fact;
            b += sign * (2.0 - 2.0 * nf) * pow / fact;
            pow *= x2;
            fact *= (2.0 * nf + 2.0) * (2.0 * nf + 3.0);
        }
        (c * a, c * b)
    } else {
        let (s, co) = x.sin_cos();
        let j0 = s / x;
        let one_minus_cos = 2.0 * (0.5 * x).sin().powi(2);
        let x2 = x * x;
        (
            c * (j0 - co) / x2,
            c * (3.0 * (1.0 - j0) - one_minus_cos) / x2,
        )
    }
}

/// Component order of packed symmetric tensors: 00, 01, 02, 11, 12, 22.
pub const PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

#[inline]
pub fn packed(a: usize, b: usize) -> usize {
    match (a.min(b), a.max(b)) {
        (0, 0) => 0,
        (0, 1) => 1,
        (0, 2) => 2,
        (1, 1) => 3,
        (1, 2) => 4,
        _ => 5,
    }
}

/// The packed truncated symbol at `xi`.
#[inline]
pub fn truncated_symbol(xi: [f64; 3], radius: f64) -> [f64; 6] {
    let rho2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
    let rho = rho2.sqrt();
    let (alpha, beta) = truncated_profile(rho, radius);
    let bb = if rho2 > 0.0 { beta / rho2 } else { 0.0 };
    [
        alpha + bb * xi[0] * xi[0],
        bb * xi[0] * xi[1],
        bb * xi[0] * xi[2],
        alpha + bb * xi[1] * xi[1],
        bb * xi[1] * xi[2],
        alpha + bb * xi[2] * xi[2],
    ]
}
