//! Small numerical helpers: seeded probes, cubic Hermite resampling, Brent
//! minimisation and Gauss-Legendre nodes.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::phase_space::{norm_sq, ModeField, VelocityGrid};
use crate::C64;

/// Generator for probe `index` under `seed`: ChaCha keyed by the seed with the
/// probe index as stream, so probes are reproducible in any evaluation order.
pub fn probe_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Random smooth field `sqrt(mu) p(v)` with `p` a polynomial of degree <= 3
/// with standard normal coefficients (complex unless `real`).
pub fn random_smooth_field(
    grid: &Arc<VelocityGrid>,
    seed: u64,
    index: u64,
    real: bool,
) -> ModeField {
    let mut rng = probe_rng(seed, index);
    // monomials v^a with |a| <= 3: 20 of them
    let mut exps = vec![];
    for a in 0..=3usize {
        for b in 0..=3 - a {
            for c in 0..=3 - a - b {
                exps.push([a as i32, b as i32, c as i32]);
            }
        }
    }
    let coef: Vec<C64> = exps
        .iter()
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = if real {
                0.0
            } else {
                StandardNormal.sample(&mut rng)
            };
            C64::new(re, im)
        })
        .collect();
    ModeField::from_fn(grid.clone(), [0; 3], |v| {
        let p: C64 = exps
            .iter()
            .zip(&coef)
            .map(|(e, c)| c * (v[0].powi(e[0]) * v[1].powi(e[1]) * v[2].powi(e[2])))
            .sum();
        p * (-0.5 * norm_sq(v)).exp()
    })
}

/// Slopes by 4th-order finite differences (one-sided 5-point at the ends).
fn slopes(y: &[C64], dt: f64) -> Vec<C64> {
    let n = y.len();
    if n < 5 {
        return (0..n)
            .map(|i| {
                let (a, b) = if i == 0 {
                    (0, 1.min(n - 1))
                } else if i == n - 1 {
                    (n - 2, n - 1)
                } else {
                    (i - 1, i + 1)
                };
                if a == b {
                    C64::new(0.0, 0.0)
                } else {
                    (y[b] - y[a]) / ((b - a) as f64 * dt)
                }
            })
            .collect();
    }
    (0..n)
        .map(|i| {
            let d = if i >= 2 && i + 2 < n {
                (y[i - 2] - 8.0 * y[i - 1] + 8.0 * y[i + 1] - y[i + 2]) / 12.0
            } else if i < 2 {
                let c: [f64; 5] = if i == 0 {
                    [-25.0, 48.0, -36.0, 16.0, -3.0]
                } else {
                    [-3.0, -10.0, 18.0, -6.0, 1.0]
                };
                let b = if i == 0 { 0 } else { 0 };
                (0..5).map(|k| y[b + k] * c[k]).sum::<C64>() / 12.0
            } else {
                let c: [f64; 5] = if i == n - 1 {
                    [3.0, -16.0, 36.0, -48.0, 25.0]
                } else {
                    [-1.0, 6.0, -18.0, 10.0, 3.0]
                };
                (0..5).map(|k| y[n - 5 + k] * c[k]).sum::<C64>() / 12.0
            };
            d / dt
        })
        .collect()
}

/// Piecewise cubic Hermite interpolant of uniformly sampled data.
#[derive(Clone, Debug)]
pub struct HermiteSeries {
    pub dt: f64,
    pub values: Vec<C64>,
    pub slopes: Vec<C64>,
}

impl HermiteSeries {
    pub fn new(dt: f64, values: Vec<C64>) -> Self {
        let slopes = slopes(&values, dt);
        Self { dt, values, slopes }
    }

    pub fn horizon(&self) -> f64 {
        self.dt * (self.values.len().saturating_sub(1)) as f64
    }

    /// Value at `t`; zero beyond the horizon.
    pub fn eval(&self, t: f64) -> C64 {
        let n = self.values.len();
        if n == 0 || t < 0.0 || t > self.horizon() * (1.0 + 1e-12) {
            return C64::new(0.0, 0.0);
        }
        let s = t / self.dt;
        let j = (s.floor() as usize).min(n.saturating_sub(2));
        if n == 1 {
            return self.values[0];
        }
        let u = s - j as f64;
        let (u2, u3) = (u * u, u * u * u);
        let h00 = 1.0 - 3.0 * u2 + 2.0 * u3;
        let h10 = u - 2.0 * u2 + u3;
        let h01 = 3.0 * u2 - 2.0 * u3;
        let h11 = u3 - u2;
        self.values[j] * h00
            + self.slopes[j] * (h10 * self.dt)
            + self.values[j + 1] * h01
            + self.slopes[j + 1] * (h11 * self.dt)
    }

    /// Samples on a grid `factor` times finer.
    pub fn refine(&self, factor: usize) -> Vec<C64> {
        let n = (self.values.len() - 1) * factor + 1;
        let dt = self.dt / factor as f64;
        (0..n).map(|i| self.eval(i as f64 * dt)).collect()
    }
}

/// Brent's method for a minimum of `f` on `[a, b]` (parabolic steps with a
/// golden-section fallback).
pub fn brent_minimize(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const CGOLD: f64 = 0.381_966_011_250_105;
    let mut x = a + CGOLD * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    for _ in 0..200 {
        let xm = 0.5 * (a + b);
        let tol1 = tol * x.abs() + 1e-14;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if p.abs() < (0.5 * q * etemp).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = CGOLD * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else {
            x + tol1.copysign(d)
        };
        let fu = f(u);
        if fu <= fx {
            if u >= x {
                a = x
            } else {
                b = x
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u
            } else {
                b = u
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, fx)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` (Newton on `P_n`).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 {
                1.0
            } else if n == 1 {
                z
            } else {
                p1
            };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_is_fourth_order() {
        let f = |t: f64| C64::new((1.3 * t).sin() * (-0.1 * t).exp(), t.cos());
        let mut errs = vec![];
        for dt in [0.2, 0.1] {
            let n = (6.0 / dt) as usize + 1;
            let s = HermiteSeries::new(dt, (0..n).map(|i| f(i as f64 * dt)).collect());
            let e = (0..577)
                .map(|i| {
                    let t = i as f64 * 0.01;
                    (s.eval(t) - f(t)).norm()
                })
                .fold(0.0, f64::max);
            errs.push(e);
        }
        assert!((errs[0] / errs[1]).log2() > 3.5, "{errs:?}");
    }

    #[test]
    fn brent_finds_sharp_minimum() {
        let f = |x: f64| ((x - 2.736).powi(2) + 0.03f64.powi(2)).sqrt();
        let (x, fx) = brent_minimize(f, 2.7, 2.8, 1e-10);
        assert!((x - 2.736).abs() < 1e-7);
        assert!((fx - 0.03).abs() < 1e-10);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn probes_are_reproducible() {
        use rand::Rng;
        let a: f64 = probe_rng(7, 3).gen();
        let b: f64 = probe_rng(7, 3).gen();
        let c: f64 = probe_rng(7, 4).gen();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
