use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use log::info;
use sha2::{Digest, Sha256};

use super::conv::ConvolutionEngine;
use super::kernel::packed;
use crate::error::{Error, Result};
use crate::phase_space::{japanese, DerivativeScheme, Differentiator, VelocityGrid};
use crate::C64;

/// Padding and kernel radius used for `sigma = Phi * mu`: targets fill the
/// whole box (`|v| <= sqrt(3) L`) while `mu` lives in `|v| <= L`, so pairs are
/// closer than `(sqrt(3) + 1) L < 2.75 L`, and `3 N` points keep periodic
/// images at least `6 L - 2 L >= 2.75 L` away.
pub const SIGMA_PAD: usize = 3;
pub const SIGMA_RADIUS_FACTOR: f64 = 2.75;

/// `sigma_ij = Phi_ij * mu` and derived quantities at every node.
#[derive(Debug, Clone)]
pub struct CollisionFields {
    grid: Arc<VelocityGrid>,
    /// Packed symmetric components (00, 01, 02, 11, 12, 22).
    pub sigma: [Vec<f64>; 6],
    /// `sigma_i = sigma_ij v_j`.
    pub sigma_vec: [Vec<f64>; 3],
    /// Eigenvalue along `v`.
    pub lambda1: Vec<f64>,
    /// Eigenvalue on `v^perp` (double).
    pub lambda2: Vec<f64>,
    /// `d_{v_i} sigma_ij` by the 4th-order stencil.
    pub divergence: [Vec<f64>; 3],
}

impl CollisionFields {
    pub fn grid(&self) -> &Arc<VelocityGrid> {
        &self.grid
    }

    #[inline]
    pub fn sigma_at(&self, idx: usize) -> [[f64; 3]; 3] {
        std::array::from_fn(|a| std::array::from_fn(|b| self.sigma[packed(a, b)][idx]))
    }

    pub fn trace(&self, idx: usize) -> f64 {
        self.sigma[0][idx] + self.sigma[3][idx] + self.sigma[5][idx]
    }

    fn from_sigma(grid: Arc<VelocityGrid>, sigma: [Vec<f64>; 6]) -> Self {
        let len = grid.len();
        let mut sigma_vec: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; len]);
        let mut lambda1 = vec![0.0; len];
        let mut lambda2 = vec![0.0; len];
        for idx in 0..len {
            let v = grid.coords(idx);
            let r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
            let mut quad = 0.0;
            for a in 0..3 {
                let s: f64 = (0..3).map(|b| sigma[packed(a, b)][idx] * v[b]).sum();
                sigma_vec[a][idx] = s;
                quad += s * v[a];
            }
            let tr = sigma[0][idx] + sigma[3][idx] + sigma[5][idx];
            lambda1[idx] = quad / r2;
            lambda2[idx] = 0.5 * (tr - lambda1[idx]);
        }
        let diff = Differentiator::new(&grid, DerivativeScheme::default());
        let divergence = std::array::from_fn(|j| {
            let mut acc = vec![0.0; len];
            for i in 0..3 {
                let col: Vec<C64> = sigma[packed(i, j)]
                    .iter()
                    .map(|&x| C64::new(x, 0.0))
                    .collect();
                for (a, d) in acc.iter_mut().zip(diff.derivative(&col, i, 0.0)) {
                    *a += d.re;
                }
            }
            acc
        });
        Self {
            grid,
            sigma,
            sigma_vec,
            lambda1,
            lambda2,
            divergence,
        }
    }

    /// Measured constants in `|sigma_ij| <= C0 <v>^{-1}` and
    /// `|d sigma_ij| <= C1 <v>^{-2}` over the nodes.
    pub fn bound_constants(&self) -> (f64, f64) {
        let diff = Differentiator::new(&self.grid, DerivativeScheme::default());
        let mut c0: f64 = 0.0;
        let mut c1: f64 = 0.0;
        for comp in &self.sigma {
            let col: Vec<C64> = comp.iter().map(|&x| C64::new(x, 0.0)).collect();
            let ders: Vec<Vec<C64>> = (0..3).map(|a| diff.derivative(&col, a, 0.0)).collect();
            for idx in 0..self.grid.len() {
                if self.grid.is_boundary(idx, 2) {
                    continue;
                }
                let jv = japanese(self.grid.coords(idx));
                c0 = c0.max(comp[idx].abs() * jv);
                for d in &ders {
                    c1 = c1.max(d[idx].re.abs() * jv * jv);
                }
            }
        }
        (c0, c1)
    }

    /// Binary cache: magic `VPLS`, version, `L_v`, `N`, six `N^3` f64 blocks,
    /// then the SHA-256 of all preceding bytes.
    pub fn save<W: Write>(&self, mut w: W) -> Result<()> {
        let mut bytes = Vec::with_capacity(24 + 48 * self.grid.len());
        bytes.extend_from_slice(b"VPLS");
        bytes.extend_from_slice(&1u32.to_le_bytes());
        bytes.extend_from_slice(&self.grid.half_width().to_le_bytes());
        bytes.extend_from_slice(&(self.grid.n() as u32).to_le_bytes());
        for comp in &self.sigma {
            for x in comp {
                bytes.extend_from_slice(&x.to_le_bytes());
            }
        }
        let digest = Sha256::digest(&bytes);
        w.write_all(&bytes)?;
        w.write_all(&digest)?;
        Ok(())
    }

    pub fn load<R: Read>(mut r: R) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() < 52 || &bytes[..4] != b"VPLS" {
            return Err(Error::Format("not a collision-field cache".into()));
        }
        let (body, digest) = bytes.split_at(bytes.len() - 32);
        if Sha256::digest(body).as_slice() != digest {
            return Err(Error::Format("collision-field cache hash mismatch".into()));
        }
        let half_width = f64::from_le_bytes(body[8..16].try_into().unwrap());
        let n = u32::from_le_bytes(body[16..20].try_into().unwrap()) as usize;
        let grid = Arc::new(VelocityGrid::new(half_width, n)?);
        let len = grid.len();
        if body.len() != 20 + 48 * len {
            return Err(Error::Format("collision-field cache has wrong size".into()));
        }
        let data = &body[20..];
        let sigma = std::array::from_fn(|c| {
            data[8 * c * len..8 * (c + 1) * len]
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
                .collect()
        });
        Ok(Self::from_sigma(grid, sigma))
    }

    pub fn cache_path(dir: &Path, half_width: f64, n: usize) -> PathBuf {
        dir.join(format!("sigma_L{half_width}_N{n}.bin"))
    }

    /// Loads `(L_v, N)` from `dir` when a valid cache exists, otherwise
    /// computes and stores it.
    pub fn load_or_compute(grid: Arc<VelocityGrid>, dir: &Path) -> Result<Self> {
        let path = Self::cache_path(dir, grid.half_width(), grid.n());
        if let Ok(file) = std::fs::File::open(&path) {
            match Self::load(std::io::BufReader::new(file)) {
                Ok(cf) if cf.grid.same_as(&grid) => return Ok(cf),
                Ok(_) => info!("cache {} is for another grid; recomputing", path.display()),
                Err(e) => info!("ignoring cache {}: {e}", path.display()),
            }
        }
        let cf = compute_sigma(grid)?;
        std::fs::create_dir_all(dir)?;
        let tmp = path.with_extension("tmp");
        cf.save(std::io::BufWriter::new(std::fs::File::create(&tmp)?))?;
        std::fs::rename(&tmp, &path)?;
        Ok(cf)
    }
}

/// `mu` on the grid as complex values.
fn maxwellian(grid: &VelocityGrid) -> Vec<C64> {
    grid.sqrt_maxwellian()
        .iter()
        .map(|s| C64::new(s * s, 0.0))
        .collect()
}

fn sigma_engine(grid: &VelocityGrid) -> Result<ConvolutionEngine> {
    ConvolutionEngine::new(grid, SIGMA_PAD, SIGMA_RADIUS_FACTOR * grid.half_width())
}

/// `sigma_ij = Phi_ij * mu` on every node.
pub fn compute_sigma(grid: Arc<VelocityGrid>) -> Result<CollisionFields> {
    let engine = sigma_engine(&grid)?;
    let hat = engine.forward(&maxwellian(&grid));
    let sigma = std::array::from_fn(|c| {
        let s = engine.symbol_component([0.0; 3], c);
        let prod: Vec<C64> = hat.iter().zip(&s).map(|(z, x)| z * x).collect();
        engine.fft().inverse(prod).iter().map(|z| z.re).collect()
    });
    Ok(CollisionFields::from_sigma(grid, sigma))
}

/// `sigma_ij(p)` at arbitrary points, e.g. `v = 0`, which is not a node.
pub fn sigma_at_points(grid: &VelocityGrid, points: &[[f64; 3]]) -> Result<Vec<[[f64; 3]; 3]>> {
    let engine = sigma_engine(grid)?;
    let hat = engine.forward(&maxwellian(grid));
    let origin = grid.axis()[0];
    Ok(points
        .iter()
        .map(|&p| {
            let s = engine.evaluate_at(&hat, p, origin);
            std::array::from_fn(|a| std::array::from_fn(|b| s[packed(a, b)]))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::build_grid;
    use crate::util::gauss_legendre;

    /// `Phi * mu` at `v` by product quadrature in spherical coordinates
    /// centred on `v`, where the `|z|^2` Jacobian removes the singularity.
    fn sigma_quadrature(v: [f64; 3]) -> [[f64; 3]; 3] {
        let (xr, wr) = gauss_legendre(96);
        let (xc, wc) = gauss_legendre(48);
        let nphi = 64;
        let rmax = 9.0 + (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let mut s = [[0.0; 3]; 3];
        for (r, wr) in xr.iter().zip(&wr) {
            let r = 0.5 * rmax * (r + 1.0);
            for (c, wc) in xc.iter().zip(&wc) {
                let sn = (1.0 - c * c).sqrt();
                for p in 0..nphi {
                    let phi = 2.0 * std::f64::consts::PI * p as f64 / nphi as f64;
                    let w = [sn * phi.cos(), sn * phi.sin(), *c];
                    let u: f64 = (0..3).map(|a| (v[a] - r * w[a]).powi(2)).sum();
                    let weight = 0.5 * rmax * wr * wc * 2.0 * std::f64::consts::PI / nphi as f64
                        * r
                        * (-u).exp();
                    for a in 0..3 {
                        for b in 0..3 {
                            let d = if a == b { 1.0 } else { 0.0 };
                            s[a][b] += weight * (d - w[a] * w[b]);
                        }
                    }
                }
            }
        }
        s
    }

    #[test]
    fn sigma_at_origin() {
        let g = build_grid(6.0, 24).unwrap();
        let s = sigma_at_points(&g, &[[0.0; 3]]).unwrap()[0];
        let exact = 4.0 * std::f64::consts::PI / 3.0;
        for a in 0..3 {
            for b in 0..3 {
                let target = if a == b { exact } else { 0.0 };
                assert!(
                    (s[a][b] - target).abs() < 1e-3 * exact,
                    "{a}{b}: {}",
                    s[a][b]
                );
            }
        }
    }

    #[test]
    fn sigma_matches_spherical_quadrature() {
        let g = build_grid(6.0, 24).unwrap();
        let points = [[1.0, 1.0, 0.0], [0.3, -2.1, 1.7], [4.5, 0.0, 0.0]];
        let got = sigma_at_points(&g, &points).unwrap();
        for (p, s) in points.iter().zip(&got) {
            let q = sigma_quadrature(*p);
            for a in 0..3 {
                for b in 0..3 {
                    assert!(
                        (s[a][b] - q[a][b]).abs() < 1e-4,
                        "{p:?} {a}{b}: {} vs {}",
                        s[a][b],
                        q[a][b]
                    );
                }
            }
        }
        // trace has the closed form 2 pi^{3/2} erf(r) / r; erf(sqrt 2) = 0.9544997361036416
        let tr = got[0][0][0] + got[0][1][1] + got[0][2][2];
        let exact = 2.0 * std::f64::consts::PI.powf(1.5) * 0.954_499_736_103_641_6 / 2f64.sqrt();
        assert!((tr - exact).abs() < 1e-4 * exact, "{tr} vs {exact}");
    }

    #[test]
    fn eigenvalue_plateaus() {
        let g = Arc::new(build_grid(6.0, 24).unwrap());
        let cf = compute_sigma(g.clone()).unwrap();
        let (mut p1, mut p2) = (vec![], vec![]);
        for idx in 0..g.len() {
            let r = crate::phase_space::norm_sq(g.coords(idx)).sqrt();
            if (4.0..=5.5).contains(&r) {
                p1.push(cf.lambda1[idx] * r.powi(3));
                p2.push(cf.lambda2[idx] * r);
            }
        }
        let spread = |p: &[f64]| {
            let (lo, hi) = p
                .iter()
                .fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
            (hi - lo) / lo
        };
        assert!(spread(&p1) < 0.03 && spread(&p2) < 0.03);
        // lambda_1 r^3 -> int |v|^2 mu = 3 pi^{3/2} / 2 times 2/3
        let pi32 = std::f64::consts::PI.powf(1.5);
        assert!((p1[0] - pi32).abs() < 1e-3 * pi32, "{}", p1[0]);
        let (c0, c1) = cf.bound_constants();
        assert!(c0.is_finite() && c1.is_finite() && c0 > 0.0 && c1 > 0.0);
    }

    #[test]
    fn cache_round_trip_and_tamper_detection() {
        let g = Arc::new(build_grid(5.0, 8).unwrap());
        let dir = tempfile::tempdir().unwrap();
        let cf = CollisionFields::load_or_compute(g.clone(), dir.path()).unwrap();
        let again = CollisionFields::load_or_compute(g.clone(), dir.path()).unwrap();
        assert_eq!(cf.sigma, again.sigma);
        let path = CollisionFields::cache_path(dir.path(), 5.0, 8);
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[100] ^= 1;
        assert!(matches!(
            CollisionFields::load(&bytes[..]),
            Err(Error::Format(_))
        ));
    }
}
