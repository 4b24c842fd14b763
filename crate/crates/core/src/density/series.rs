use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase_space::DerivativeScheme;
use crate::semigroup::csv_err;
use crate::util::HermiteSeries;
use crate::C64;

/// Uniformly sampled complex series `values[i] = f(i dt)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub dt: f64,
    pub values: Vec<C64>,
}

impl TimeSeries {
    pub fn new(dt: f64, values: Vec<C64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("series spacing must be positive, got {dt}")));
        }
        if values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidArgument("series contains non-finite samples".into()));
        }
        Ok(Self { dt, values })
    }

    pub fn from_fn(dt: f64, len: usize, f: impl Fn(f64) -> C64) -> Self {
        Self {
            dt,
            values: (0..len).map(|i| f(i as f64 * dt)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.time(i)).collect()
    }

    pub fn horizon(&self) -> f64 {
        self.time(self.len().saturating_sub(1))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn same_grid(&self, other: &TimeSeries) -> bool {
        self.len() == other.len() && (self.dt - other.dt).abs() <= 1e-12 * self.dt
    }

    /// Cubic Hermite resampling onto a grid `factor` times finer.
    pub fn refine(&self, factor: usize) -> TimeSeries {
        if factor <= 1 || self.len() < 2 {
            return self.clone();
        }
        let h = HermiteSeries::new(self.dt, self.values.clone());
        TimeSeries {
            dt: self.dt / factor as f64,
            values: h.refine(factor),
        }
    }

    /// Every `stride`-th sample.
    pub fn subsample(&self, stride: usize) -> TimeSeries {
        let stride = stride.max(1);
        TimeSeries {
            dt: self.dt * stride as f64,
            values: self.values.iter().step_by(stride).copied().collect(),
        }
    }

    /// `max |self - other| / max |other|` on a shared grid.
    pub fn relative_linf(&self, other: &TimeSeries) -> Result<f64> {
        if !self.same_grid(other) {
            return Err(Error::TimeGridMismatch);
        }
        let diff = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        let scale = other.max_abs();
        Ok(if scale > 0.0 { diff / scale } else { diff })
    }
}

/// `K_k(t_i)` for one mode and collision strength, real by construction.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelSeries {
    pub k: [i64; 3],
    pub nu: f64,
    pub series: TimeSeries,
    /// `max |Im K| / max |K|` before the imaginary part was dropped.
    pub imag_residue: f64,
    pub grid_half_width: f64,
    pub grid_n: usize,
    pub scheme: DerivativeScheme,
}

impl KernelSeries {
    pub fn dt(&self) -> f64 {
        self.series.dt
    }

    pub fn values(&self) -> &[C64] {
        &self.series.values
    }

    pub fn refined(&self, factor: usize) -> KernelSeries {
        KernelSeries {
            series: self.series.refine(factor),
            ..self.clone()
        }
    }
}

/// Which route produced a density history.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Volterra,
    Resolvent,
    DirectPde,
}

impl Provenance {
    pub fn label(&self) -> &'static str {
        match self {
            Provenance::Volterra => "volterra",
            Provenance::Resolvent => "resolvent",
            Provenance::DirectPde => "direct-pde",
        }
    }
}

/// `rho_k(t_i)` with the route that produced it and, for the integral routes,
/// the source `N_k(t_i)` it was driven by.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DensitySolution {
    pub provenance: Provenance,
    pub rho: TimeSeries,
    pub source: Option<TimeSeries>,
}

impl DensitySolution {
    pub fn times(&self) -> Vec<f64> {
        self.rho.times()
    }
}

/// CSV with columns `t, re_K, im_K` (when a kernel is given) followed by
/// `re_rho_<route>, im_rho_<route>` per solution, all on one time grid.
pub fn write_density_csv<W: Write>(
    w: W,
    kernel: Option<&KernelSeries>,
    solutions: &[&DensitySolution],
) -> Result<()> {
    let reference = match (kernel, solutions.first()) {
        (Some(k), _) => &k.series,
        (None, Some(s)) => &s.rho,
        (None, None) => return Err(Error::InvalidArgument("nothing to write".into())),
    };
    for s in solutions {
        if !s.rho.same_grid(reference) {
            return Err(Error::TimeGridMismatch);
        }
    }
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["t".to_string()];
    if kernel.is_some() {
        header.extend(["re_K".into(), "im_K".into()]);
    }
    for s in solutions {
        header.push(format!("re_rho_{}", s.provenance.label()));
        header.push(format!("im_rho_{}", s.provenance.label()));
    }
    out.write_record(&header).map_err(csv_err)?;
    for i in 0..reference.len() {
        let mut row = vec![reference.time(i).to_string()];
        if let Some(k) = kernel {
            row.push(k.series.values[i].re.to_string());
            row.push(k.series.values[i].im.to_string());
        }
        for s in solutions {
            row.push(s.rho.values[i].re.to_string());
            row.push(s.rho.values[i].im.to_string());
        }
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn refine_and_subsample_round_trip() {
        let s = TimeSeries::from_fn(0.1, 51, |t| C64::new(t.sin(), t.cos()));
        let r = s.refine(4);
        assert_eq!(r.len(), 201);
        assert!((r.dt - 0.025).abs() < 1e-15);
        let back = r.subsample(4);
        assert!(back.relative_linf(&s).unwrap() < 1e-14);
        assert!((r.values[3] - C64::new(0.075f64.sin(), 0.075f64.cos())).norm() < 1e-6);
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = TimeSeries::from_fn(0.1, 10, |_| C64::new(1.0, 0.0));
        let b = TimeSeries::from_fn(0.2, 10, |_| C64::new(1.0, 0.0));
        assert!(matches!(a.relative_linf(&b), Err(Error::TimeGridMismatch)));
        assert!(TimeSeries::new(0.1, vec![C64::new(f64::NAN, 0.0)]).is_err());
    }

    #[test]
    fn csv_has_one_pair_of_columns_per_route() {
        let rho = TimeSeries::from_fn(0.5, 3, |t| C64::new(t, 0.0));
        let sol = DensitySolution {
            provenance: Provenance::DirectPde,
            rho,
            source: None,
        };
        let mut buf = vec![];
        write_density_csv(&mut buf, None, &[&sol]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "t,re_rho_direct-pde,im_rho_direct-pde");
        assert_eq!(text.lines().count(), 4);
    }
}
