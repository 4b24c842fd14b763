use serde::{Deserialize, Serialize};

use super::series::KernelSeries;
use crate::error::{Error, Result};
use crate::util::{brent_minimize, HermiteSeries};
use crate::C64;

/// `E_p(z) = int_0^1 e^{-z s} s^p ds` for `p = 0..=3`.
fn exp_moments(z: C64) -> [C64; 4] {
    let mut e = [C64::new(0.0, 0.0); 4];
    if z.norm() < 2.0 {
        // sum_n (-z)^n / (n! (n + p + 1))
        let mut term = C64::new(1.0, 0.0);
        for n in 0..60 {
            for (p, ep) in e.iter_mut().enumerate() {
                *ep += term / (n + p + 1) as f64;
            }
            term *= -z / (n + 1) as f64;
            if term.norm() < 1e-18 {
                break;
            }
        }
    } else {
        let ez = (-z).exp();
        e[0] = (1.0 - ez) / z;
        for p in 1..4 {
            e[p] = (p as f64 * e[p - 1] - ez) / z;
        }
    }
    e
}

/// `int_{x_0}^{x_last} e^{-lambda x} H(x) dx` for the cubic Hermite
/// interpolant `H` of `(nodes, values, slopes)`, exact in the exponential
/// factor at any frequency.
pub(crate) fn filon_hermite(nodes: &[f64], values: &[C64], slopes: &[C64], lambda: C64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..nodes.len().saturating_sub(1) {
        let h = nodes[j + 1] - nodes[j];
        let e = exp_moments(lambda * h);
        let w00 = e[0] - 3.0 * e[2] + 2.0 * e[3];
        let w10 = e[1] - 2.0 * e[2] + e[3];
        let w01 = 3.0 * e[2] - 2.0 * e[3];
        let w11 = e[3] - e[2];
        let panel = values[j] * w00
            + slopes[j] * (h * w10)
            + values[j + 1] * w01
            + slopes[j + 1] * (h * w11);
        acc += (-lambda * nodes[j]).exp() * h * panel;
    }
    acc
}

/// One Laplace-transform value with the separately reported tail.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LaplaceValue {
    /// Quadrature over the sampled horizon plus the tail.
    pub value: C64,
    /// Contribution of the fitted envelope beyond the horizon.
    pub tail: C64,
    pub error_bar: f64,
    /// Set when the envelope fit failed and the error bar is a crude bound.
    pub flagged: bool,
}

/// Decay envelope `|K(t)| ~ A e^{-gamma t}` fitted to the last quarter.
#[derive(Clone, Copy, Debug)]
enum Tail {
    Negligible,
    Envelope { gamma: f64 },
    Failed { bound: f64 },
}

fn fit_tail(values: &[C64], dt: f64) -> Tail {
    let n = values.len();
    let max = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let start = (3 * n) / 4;
    let last: Vec<f64> = values[start..].iter().map(|z| z.norm()).collect();
    let last_max = last.iter().copied().fold(0.0, f64::max);
    if max == 0.0 || last_max <= 1e-12 * max {
        return Tail::Negligible;
    }
    // local maxima of |K| trace the envelope through any oscillation
    let point = |i: usize| ((start + i) as f64 * dt, last[i].ln());
    let mut peaks: Vec<(f64, f64)> = (1..last.len().saturating_sub(1))
        .filter(|&i| last[i] >= last[i - 1] && last[i] >= last[i + 1] && last[i] > 0.0)
        .map(point)
        .collect();
    if peaks.len() < 3 {
        // no oscillation to trace: fit the samples themselves
        peaks = (0..last.len()).filter(|&i| last[i] > 0.0).map(point).collect();
    }
    let horizon = (n - 1) as f64 * dt;
    let bound = values[n - 1].norm().max(last_max) * horizon;
    if peaks.len() < 3 {
        return Tail::Failed { bound };
    }
    let m = peaks.len() as f64;
    let (st, sy) = peaks.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mt, my) = (st / m, sy / m);
    let (sxx, sxy) = peaks
        .iter()
        .fold((0.0, 0.0), |a, p| (a.0 + (p.0 - mt).powi(2), a.1 + (p.0 - mt) * (p.1 - my)));
    let gamma = -sxy / sxx;
    if gamma > 0.0 && gamma.is_finite() {
        Tail::Envelope { gamma }
    } else {
        Tail::Failed { bound }
    }
}

/// Laplace transform of a sampled kernel with its derivative in `lambda`.
pub struct LaplaceEvaluator {
    nodes: Vec<f64>,
    values: Vec<C64>,
    slopes: Vec<C64>,
    /// `t K(t)` and its slope, for `d/dlambda`.
    t_values: Vec<C64>,
    t_slopes: Vec<C64>,
    tail: Tail,
    k_end: C64,
    horizon: f64,
}

impl LaplaceEvaluator {
    pub fn new(kernel: &KernelSeries) -> Result<Self> {
        let s = &kernel.series;
        if s.len() < 2 {
            return Err(Error::InvalidArgument("kernel needs at least two samples".into()));
        }
        let herm = HermiteSeries::new(s.dt, s.values.clone());
        let nodes = s.times();
        let t_values = nodes.iter().zip(&s.values).map(|(t, k)| k * *t).collect();
        let t_slopes = nodes
            .iter()
            .zip(&s.values)
            .zip(&herm.slopes)
            .map(|((t, k), d)| k + d * *t)
            .collect();
        Ok(Self {
            tail: fit_tail(&s.values, s.dt),
            k_end: *s.values.last().unwrap(),
            horizon: s.horizon(),
            nodes,
            values: herm.values,
            slopes: herm.slopes,
            t_values,
            t_slopes,
        })
    }

    /// `L[K](lambda) = int_0^inf e^{-lambda t} K(t) dt`, `Re lambda >= 0`.
    pub fn eval(&self, lambda: C64) -> Result<LaplaceValue> {
        if lambda.re < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "Laplace transform needs Re lambda >= 0, got {lambda}"
            )));
        }
        let body = filon_hermite(&self.nodes, &self.values, &self.slopes, lambda);
        let (tail, error_bar, flagged) = match self.tail {
            Tail::Negligible => (C64::new(0.0, 0.0), 0.0, false),
            Tail::Envelope { gamma } => {
                let t = self.k_end * (-lambda * self.horizon).exp() / (lambda + gamma);
                (t, t.norm(), false)
            }
            Tail::Failed { bound } => (C64::new(0.0, 0.0), bound, true),
        };
        Ok(LaplaceValue {
            value: body + tail,
            tail,
            error_bar,
            flagged,
        })
    }

    /// `d/dlambda L[K] = -int_0^T t e^{-lambda t} K(t) dt` (tail omitted).
    pub fn derivative(&self, lambda: C64) -> C64 {
        -filon_hermite(&self.nodes, &self.t_values, &self.t_slopes, lambda)
    }
}

/// `L[K](lambda)` for a single `lambda`.
pub fn laplace_transform(kernel: &KernelSeries, lambda: C64) -> Result<LaplaceValue> {
    LaplaceEvaluator::new(kernel)?.eval(lambda)
}

/// `L[K](gamma0 + i tau_j)` and `G~ = -L[K] / (1 + L[K])` on a frequency grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LaplaceSamples {
    pub gamma0: f64,
    pub taus: Vec<f64>,
    pub values: Vec<C64>,
    pub g_tilde: Vec<C64>,
    /// Largest error bar of the tail over the grid.
    pub tail_error: f64,
    pub flagged: bool,
}

impl LaplaceSamples {
    pub fn compute(kernel: &KernelSeries, gamma0: f64, taus: &[f64]) -> Result<Self> {
        let ev = LaplaceEvaluator::new(kernel)?;
        let mut values = Vec::with_capacity(taus.len());
        let mut tail_error: f64 = 0.0;
        let mut flagged = false;
        for &tau in taus {
            let v = ev.eval(C64::new(gamma0, tau))?;
            tail_error = tail_error.max(v.error_bar);
            flagged |= v.flagged;
            values.push(v.value);
        }
        let g_tilde = values.iter().map(|l| -l / (1.0 + l)).collect();
        Ok(Self {
            gamma0,
            taus: taus.to_vec(),
            values,
            g_tilde,
            tail_error,
            flagged,
        })
    }
}

/// Minimum of `|1 + L[K](i tau)|` over a frequency grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PenroseReport {
    pub k: [i64; 3],
    pub nu: f64,
    pub kappa: f64,
    pub argmin_tau: f64,
    /// `|tail contribution| / kappa` at the minimiser.
    pub tail_fraction: f64,
}

/// Largest admissible spacing of the Penrose frequency grid.
pub const PENROSE_MAX_SPACING: f64 = 0.05;

/// Uniform grid `[-tau_max, tau_max]` with the given spacing.
pub fn symmetric_tau_grid(tau_max: f64, spacing: f64) -> Vec<f64> {
    let n = (tau_max / spacing).round() as i64;
    (-n..=n).map(|j| j as f64 * spacing).collect()
}

/// Penrose margin `min_tau |1 + L[K](i tau)|` on `taus`, refined by Brent's
/// method between the neighbours of the discrete minimiser.
pub fn penrose_margin(kernel: &KernelSeries, taus: &[f64]) -> Result<PenroseReport> {
    if taus.len() < 3 {
        return Err(Error::InvalidArgument("Penrose scan needs at least three frequencies".into()));
    }
    if let Some(w) = taus.windows(2).find(|w| !(w[1] > w[0]) || w[1] - w[0] > PENROSE_MAX_SPACING * (1.0 + 1e-9)) {
        return Err(Error::InvalidArgument(format!(
            "Penrose grid must be increasing with spacing <= {PENROSE_MAX_SPACING}, found [{}, {}]",
            w[0], w[1]
        )));
    }
    let ev = LaplaceEvaluator::new(kernel)?;
    let modulus = |tau: f64| -> f64 {
        ev.eval(C64::new(0.0, tau))
            .map(|v| (1.0 + v.value).norm())
            .unwrap_or(f64::INFINITY)
    };
    let scan: Vec<f64> = taus.iter().map(|&t| modulus(t)).collect();
    let j = scan
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(j, _)| j)
        .unwrap();
    let lo = taus[j.saturating_sub(1)];
    let hi = taus[(j + 1).min(taus.len() - 1)];
    let (mut tau, mut kappa) = brent_minimize(modulus, lo, hi, 1e-10);
    if scan[j] < kappa {
        tau = taus[j];
        kappa = scan[j];
    }
    let tail = ev.eval(C64::new(0.0, tau))?;
    let tail_size = if tail.flagged { tail.error_bar } else { tail.tail.norm() };
    Ok(PenroseReport {
        k: kernel.k,
        nu: kernel.nu,
        kappa,
        argmin_tau: tau,
        tail_fraction: if kappa > 0.0 { tail_size / kappa } else { f64::INFINITY },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::kernel::analytic_kernel_series;
    use crate::density::series::TimeSeries;
    use std::f64::consts::PI;

    #[test]
    fn moments_agree_across_branches() {
        for z in [C64::new(1.999, 0.0), C64::new(0.0, 1.999), C64::new(1.2, -1.5)] {
            let a = exp_moments(z);
            let b = {
                let ez = (-z).exp();
                let mut e = [C64::new(0.0, 0.0); 4];
                e[0] = (1.0 - ez) / z;
                for p in 1..4 {
                    e[p] = (p as f64 * e[p - 1] - ez) / z;
                }
                e
            };
            for p in 0..4 {
                assert!((a[p] - b[p]).norm() < 1e-13, "p {p} z {z}");
            }
        }
        let e = exp_moments(C64::new(0.0, 0.0));
        assert!((e[3].re - 0.25).abs() < 1e-16);
    }

    #[test]
    fn filon_is_exact_for_cubics_at_high_frequency() {
        // int_0^2 e^{-i 40 t} t^3 dt against the closed form
        let nodes: Vec<f64> = (0..=8).map(|i| i as f64 * 0.25).collect();
        let vals: Vec<C64> = nodes.iter().map(|t| C64::new(t.powi(3), 0.0)).collect();
        let der: Vec<C64> = nodes.iter().map(|t| C64::new(3.0 * t * t, 0.0)).collect();
        let lam = C64::new(0.0, 40.0);
        let got = filon_hermite(&nodes, &vals, &der, lam);
        let f = |t: f64| -> C64 {
            // antiderivative of t^3 e^{-lam t}
            let e = (-lam * t).exp();
            -e * (t.powi(3) / lam + 3.0 * t * t / (lam * lam) + 6.0 * t / lam.powi(3) + 6.0 / lam.powi(4))
        };
        assert!((got - (f(2.0) - f(0.0))).norm() < 1e-13);
    }

    fn vp(k: [i64; 3], dt: f64, t: f64) -> KernelSeries {
        analytic_kernel_series(k, dt, (t / dt).round() as usize + 1).unwrap()
    }

    #[test]
    fn anchor_at_zero_and_bounds() {
        let k = vp([1, 0, 0], 0.05, 20.0);
        let l0 = laplace_transform(&k, C64::new(0.0, 0.0)).unwrap();
        assert!((l0.value.re - 2.0 * PI.powf(1.5)).abs() < 1e-6 * 2.0 * PI.powf(1.5));
        assert!(!l0.flagged && l0.tail == C64::new(0.0, 0.0));
        let big = laplace_transform(&k, C64::new(50.0, 0.0)).unwrap();
        assert!(big.value.norm() <= 2.0 * k.series.max_abs() / 50.0);
        let p = laplace_transform(&k, C64::new(0.0, 2.0)).unwrap().value;
        let m = laplace_transform(&k, C64::new(0.0, -2.0)).unwrap().value;
        assert!((p - m.conj()).norm() < 1e-12);
        assert!(laplace_transform(&k, C64::new(-0.1, 0.0)).is_err());
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let k = vp([1, 0, 0], 0.05, 20.0);
        let ev = LaplaceEvaluator::new(&k).unwrap();
        let lam = C64::new(0.0, 1.3);
        let h = 1e-5;
        let fd = (ev.eval(lam + C64::new(0.0, h)).unwrap().value - ev.eval(lam - C64::new(0.0, h)).unwrap().value)
            / C64::new(0.0, 2.0 * h);
        assert!((fd - ev.derivative(lam)).norm() < 1e-6 * fd.norm());
    }

    #[test]
    fn tail_of_a_truncated_exponential() {
        // K = e^{-t/2} cut at T = 10: the envelope fit restores the missing tail
        let dt = 0.05;
        let ks = KernelSeries {
            series: TimeSeries::from_fn(dt, 201, |t| C64::new((-0.5 * t).exp(), 0.0)),
            ..vp([1, 0, 0], dt, 10.0)
        };
        let v = laplace_transform(&ks, C64::new(0.0, 0.7)).unwrap();
        let exact = 1.0 / C64::new(0.5, 0.7);
        assert!((v.value - exact).norm() < 1e-8, "{} vs {exact}", v.value);
        assert!(v.tail.norm() > 1e-3 && !v.flagged);
        // a growing series cannot be extended: flagged with a crude error bar
        let grow = KernelSeries {
            series: TimeSeries::from_fn(dt, 201, |t| C64::new(t, 0.0)),
            ..ks
        };
        let v = laplace_transform(&grow, C64::new(0.0, 0.7)).unwrap();
        assert!(v.flagged && v.error_bar > 0.0);
    }

    #[test]
    fn penrose_margin_of_collisionless_kernels() {
        let taus = symmetric_tau_grid(50.0, 0.05);
        let k1 = vp([1, 0, 0], 0.05, 20.0);
        let r1 = penrose_margin(&k1, &taus).unwrap();
        assert!(r1.kappa > 0.0 && r1.kappa < 0.1, "{r1:?}");
        assert!((r1.argmin_tau.abs() - 2.7).abs() < 0.1, "{r1:?}");
        let r_half = penrose_margin(&k1, &symmetric_tau_grid(50.0, 0.025)).unwrap();
        assert!((r_half.kappa - r1.kappa).abs() < 0.01 * r1.kappa);
        let ev = LaplaceEvaluator::new(&k1).unwrap();
        assert!(((1.0 + ev.eval(C64::new(0.0, 50.0)).unwrap().value).norm() - 1.0).abs() < 1e-2);
        let r2 = penrose_margin(&vp([2, 0, 0], 0.05, 20.0), &taus).unwrap();
        assert!(r2.kappa > r1.kappa);
        let coarse = symmetric_tau_grid(10.0, 0.1);
        assert!(penrose_margin(&k1, &coarse).is_err());
    }

    #[test]
    fn samples_are_hermitian() {
        let k = vp([1, 0, 0], 0.05, 20.0);
        let s = LaplaceSamples::compute(&k, 0.0, &[-3.0, -1.0, 1.0, 3.0]).unwrap();
        assert!((s.values[0] - s.values[3].conj()).norm() < 1e-12);
        assert!((s.g_tilde[1] - s.g_tilde[2].conj()).norm() < 1e-12);
    }
}
