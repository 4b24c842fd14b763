use serde::{Deserialize, Serialize};

use super::laplace::{filon_hermite, penrose_margin, LaplaceEvaluator, PenroseReport, PENROSE_MAX_SPACING};
use super::series::{KernelSeries, TimeSeries};
use crate::error::{Error, Result};
use crate::C64;

/// Largest `|G~(i tau_max)|` accepted as a negligible truncation.
pub const TAU_TRUNCATION_TOL: f64 = 1e-4;

/// Frequency quadrature for the inverse Laplace transform of `G~`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResolventOptions {
    pub tau_max: f64,
    /// Spacing on `[0, tau_mid]`.
    pub dtau: f64,
    pub tau_mid: f64,
    /// Spacing on `[tau_mid, tau_max]`.
    pub dtau_far: f64,
    /// Half-width and spacing of the refined window around the Penrose minimiser.
    pub window: f64,
    pub dtau_window: f64,
    /// Smallest Penrose margin for which `1 / (1 + L[K])` is trusted.
    pub guard: f64,
    /// Extent of the Penrose scan.
    pub penrose_tau_max: f64,
}

impl Default for ResolventOptions {
    fn default() -> Self {
        Self {
            tau_max: 300.0,
            dtau: 0.01,
            tau_mid: 20.0,
            dtau_far: 0.1,
            window: 0.5,
            dtau_window: 0.002,
            guard: 0.05,
            penrose_tau_max: 50.0,
        }
    }
}

impl ResolventOptions {
    pub fn with_guard(mut self, guard: f64) -> Self {
        self.guard = guard;
        self
    }

    /// Nonnegative frequency nodes, refined around `centre`.
    fn nodes(&self, centre: f64) -> Vec<f64> {
        let mut out = vec![];
        let mut push_segment = |a: f64, b: f64, h: f64| {
            if b <= a {
                return;
            }
            let n = ((b - a) / h).ceil().max(1.0) as usize;
            let start = if out.is_empty() { 0 } else { 1 };
            for j in start..=n {
                out.push(a + (b - a) * j as f64 / n as f64);
            }
        };
        let lo = (centre - self.window).max(0.0);
        let hi = (centre + self.window).min(self.tau_mid);
        if hi > lo {
            push_segment(0.0, lo, self.dtau);
            push_segment(lo, hi, self.dtau_window);
            push_segment(hi, self.tau_mid, self.dtau);
        } else {
            push_segment(0.0, self.tau_mid, self.dtau);
        }
        push_segment(self.tau_mid, self.tau_max, self.dtau_far);
        out
    }
}

/// The resolvent kernel `G_k(t)` on the kernel's time grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResolventKernel {
    pub series: TimeSeries,
    pub penrose: PenroseReport,
    /// `|G~(i tau_max)|`.
    pub truncation: f64,
    pub nodes: usize,
}

/// Inverse Laplace transform of `G~ = -L[K] / (1 + L[K])` on the imaginary axis.
///
/// `G~ + L[K] = L[K]^2 / (1 + L[K])` decays like `tau^{-4}`, so the slowly
/// decaying part `-L[K]` is inverted exactly as `-K(t)` and only the remainder
/// is integrated: `G(t) = -K(t) + (1/pi) Re int_0^inf e^{i tau t} R(i tau) dtau`.
/// The remainder is interpolated by cubic Hermite panels with exact slopes and
/// integrated against the oscillation exactly; Hermitian symmetry supplies
/// negative frequencies.
pub fn resolvent_kernel(kernel: &KernelSeries, opts: &ResolventOptions) -> Result<ResolventKernel> {
    let scan: Vec<f64> = {
        let n = (opts.penrose_tau_max / PENROSE_MAX_SPACING).round() as i64;
        (0..=n).map(|j| j as f64 * PENROSE_MAX_SPACING).collect()
    };
    let penrose = penrose_margin(kernel, &scan)?;
    if penrose.kappa <= opts.guard {
        return Err(Error::MarginGuard {
            margin: penrose.kappa,
            required: opts.guard,
        });
    }
    let ev = LaplaceEvaluator::new(kernel)?;
    let end = ev.eval(C64::new(0.0, opts.tau_max))?.value;
    let truncation = (end / (1.0 + end)).norm();
    if truncation > TAU_TRUNCATION_TOL {
        return Err(Error::TauRangeTooShort { value: truncation });
    }
    let taus = opts.nodes(penrose.argmin_tau.abs());
    let mut rem = Vec::with_capacity(taus.len());
    let mut drem = Vec::with_capacity(taus.len());
    for &tau in &taus {
        let lam = C64::new(0.0, tau);
        let l = ev.eval(lam)?.value;
        let dl = ev.derivative(lam);
        let one = 1.0 + l;
        rem.push(l * l / one);
        // d/dtau = i d/dlambda
        drem.push(C64::new(0.0, 1.0) * dl * l * (2.0 + l) / (one * one));
    }
    let values = kernel
        .series
        .values
        .iter()
        .enumerate()
        .map(|(i, kv)| {
            let t = kernel.series.time(i);
            let integral = filon_hermite(&taus, &rem, &drem, C64::new(0.0, -t));
            C64::new(-kv.re + integral.re / std::f64::consts::PI, 0.0)
        })
        .collect();
    Ok(ResolventKernel {
        series: TimeSeries {
            dt: kernel.dt(),
            values,
        },
        penrose,
        truncation,
        nodes: taus.len(),
    })
}
