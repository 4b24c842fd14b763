use super::series::{DensitySolution, KernelSeries, Provenance, TimeSeries};
use crate::error::{Error, Result};
use crate::C64;

/// Product-trapezoid convolution `(a * b)(t_i) = int_0^{t_i} a(t_i - s) b(s) ds`.
pub fn convolve(a: &TimeSeries, b: &TimeSeries) -> Result<TimeSeries> {
    if !a.same_grid(b) {
        return Err(Error::TimeGridMismatch);
    }
    let dt = a.dt;
    let (av, bv) = (&a.values, &b.values);
    let values = (0..a.len())
        .map(|i| {
            if i == 0 {
                return C64::new(0.0, 0.0);
            }
            let inner: C64 = (1..i).map(|j| av[i - j] * bv[j]).sum();
            (inner + 0.5 * (av[i] * bv[0] + av[0] * bv[i])) * dt
        })
        .collect();
    Ok(TimeSeries { dt, values })
}

/// Marches `rho + K * rho = N` with the product trapezoid rule, solving the
/// scalar implicit update `(1 + dt K(0) / 2) rho_i = ...` at each step.
pub fn solve_volterra(kernel: &KernelSeries, source: &TimeSeries) -> Result<DensitySolution> {
    let k = &kernel.series;
    if !k.same_grid(source) {
        return Err(Error::TimeGridMismatch);
    }
    let dt = k.dt;
    let kv = &k.values;
    let diag = 1.0 + 0.5 * dt * kv[0];
    if diag.norm() < 1e-8 {
        return Err(Error::InvalidArgument(format!(
            "implicit Volterra weight 1 + dt K(0)/2 = {diag} is singular"
        )));
    }
    let mut rho: Vec<C64> = Vec::with_capacity(source.len());
    for i in 0..source.len() {
        let value = if i == 0 {
            source.values[0]
        } else {
            let history: C64 = (1..i).map(|j| kv[i - j] * rho[j]).sum::<C64>() + 0.5 * kv[i] * rho[0];
            (source.values[i] - dt * history) / diag
        };
        rho.push(value);
    }
    Ok(DensitySolution {
        provenance: Provenance::Volterra,
        rho: TimeSeries { dt, values: rho },
        source: Some(source.clone()),
    })
}

/// `rho = N + G * N`, the resolvent representation of the Volterra solution.
pub fn apply_resolvent(g: &TimeSeries, source: &TimeSeries) -> Result<DensitySolution> {
    let conv = convolve(g, source)?;
    let values = source.values.iter().zip(&conv.values).map(|(n, c)| n + c).collect();
    Ok(DensitySolution {
        provenance: Provenance::Resolvent,
        rho: TimeSeries { dt: source.dt, values },
        source: Some(source.clone()),
    })
}
