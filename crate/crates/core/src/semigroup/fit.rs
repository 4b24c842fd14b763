use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Values at or below this are treated as numerically zero.
const FLOOR: f64 = 1e-14;

/// Envelope families for decay fits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum DecayModel {
    /// `A <t>^{-p}`.
    Power,
    /// `A exp(-delta (s t)^a)` with `a = exponent`, `s = time_scale`.
    Stretched { exponent: f64, time_scale: f64 },
    /// `A <nu^{1/3} t>^{-3/2} min{exp(-delta (nu^{1/3} t)^{1/3}), exp(-delta (nu t)^{2/3})}`.
    Mixed { nu: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: DecayModel,
    pub amplitude: f64,
    /// `p` for the power model, `delta` otherwise.
    pub rate: f64,
    /// RMS residual of the log-linear least squares.
    pub residual: f64,
    pub points: usize,
}

fn bracket(x: f64) -> f64 {
    (1.0 + x * x).sqrt()
}

/// Least squares of `log y` on the model, using samples with `t >= t_min`
/// and `y > 1e-14`. The default transient cut is `t_min = 2/|k|`.
pub fn decay_fit(times: &[f64], values: &[f64], model: DecayModel, t_min: f64) -> Result<FitResult> {
    if times.len() != values.len() {
        return Err(Error::TimeGridMismatch);
    }
    // log y + offset(t) = c - rate * x(t)
    let (x, y): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(values)
        .filter(|(t, v)| **t >= t_min && **v > FLOOR)
        .map(|(&t, &v)| match model {
            DecayModel::Power => (bracket(t).ln(), v.ln()),
            DecayModel::Stretched { exponent, time_scale } => ((time_scale * t).powf(exponent), v.ln()),
            DecayModel::Mixed { nu } => {
                let s = nu.cbrt() * t;
                (s.cbrt().max((nu * t).powf(2.0 / 3.0)), v.ln() + 1.5 * bracket(s).ln())
            }
        })
        .unzip();
    if x.len() < 2 {
        return Err(Error::DegenerateSeries(format!(
            "{} samples above {FLOOR:e} past t = {t_min}",
            x.len()
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateSeries("model abscissa is constant".into()));
    }
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let c = my - slope * mx;
    let residual = (x.iter().zip(&y).map(|(a, b)| (b - c - slope * a).powi(2)).sum::<f64>() / n).sqrt();
    Ok(FitResult { model, amplitude: c.exp(), rate: -slope, residual, points: x.len() })
}

/// First time at which `values` falls to `values[0] / e`, interpolating
/// `log values` linearly between samples.
pub fn e_fold_time(times: &[f64], values: &[f64]) -> Option<f64> {
    let target = values.first()?.ln() - 1.0;
    for i in 1..times.len().min(values.len()) {
        let (a, b) = (values[i - 1].ln(), values[i].ln());
        if b <= target {
            let w = if a == b { 0.0 } else { (a - target) / (a - b) };
            return Some(times[i - 1] + w * (times[i] - times[i - 1]));
        }
    }
    None
}
