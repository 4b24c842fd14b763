use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase_space::japanese;
use crate::semigroup::Trajectory;
use crate::util::gauss_legendre;

/// Relative slack granted to every hypothesis of the interpolation lemma.
pub const SG_TOL: f64 = 1e-6;

/// `3^5 pi / 2 + 1`, the constant of the polynomial-moment variant.
pub fn poly_constant() -> f64 {
    243.0 * std::f64::consts::PI / 2.0 + 1.0
}

/// Sampled data of the Gaussian-moment interpolation lemma: constants and
/// series on a uniform time grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrainGuoInput {
    pub c: f64,
    pub b: f64,
    pub m: f64,
    pub q: f64,
    pub p: f64,
    /// The moment constant bounding both the Gaussian moment and the forcing.
    pub moment_bound: f64,
    pub times: Vec<f64>,
    /// `int g^2`.
    pub g_sq: Vec<f64>,
    /// `int <v>^{-m} g^2`.
    pub g_weighted: Vec<f64>,
    /// `int h^2`.
    pub h_sq: Vec<f64>,
    pub forcing: Vec<f64>,
    /// `int e^{q|v|^2} g^2`, checked against `moment_bound` when present.
    pub gaussian_moment: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrainGuoReport {
    /// Smallest `C` with `sup e^{p(ct)^a} int g^2 + b int e^{p(cs)^a} int h^2 ds <= C * moment_bound`.
    #[serde(rename = "C")]
    pub c_const: f64,
    /// Largest relative violation over all hypotheses; `<= 0` when they hold.
    pub hypothesis_residual: f64,
    /// `2 + e^q ((2 + m)/2 + int_1^inf e^{-q s^a / 2} ds)`, the constant the proof delivers.
    pub proof_bound: f64,
}

fn uniform_step(times: &[f64]) -> Result<f64> {
    if times.len() < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 samples, got {}", times.len())));
    }
    let dt = times[1] - times[0];
    if !(dt > 0.0) || times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(1.0)) {
        return Err(Error::InvalidArgument("time samples must be uniformly spaced".into()));
    }
    Ok(dt)
}

fn trapezoid(dt: f64, f: &[f64]) -> f64 {
    let n = f.len();
    dt * (f.iter().sum::<f64>() - 0.5 * (f[0] + f[n - 1]))
}

/// Worst relative violation of `d/dt G + c W + b H <= F` at interior samples,
/// with `G'` by centred differences.
fn differential_residual(dt: f64, g: &[f64], terms: impl Fn(usize) -> (f64, f64)) -> f64 {
    (1..g.len() - 1)
        .map(|i| {
            let dg = (g[i + 1] - g[i - 1]) / (2.0 * dt);
            let (damping, forcing) = terms(i);
            let scale = dg.abs().max(damping).max(forcing.abs()).max(f64::MIN_POSITIVE);
            (dg + damping - forcing) / scale - SG_TOL
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

impl StrainGuoInput {
    fn validate(&self) -> Result<f64> {
        let ok = self.c > 0.0
            && self.b > 0.0
            && self.m >= 0.0
            && self.q > 0.0
            && self.q < 2.0
            && self.p > 0.0
            && self.p < self.q / 2.0
            && self.moment_bound > 0.0;
        if !ok {
            return Err(Error::InvalidArgument(format!(
                "constants need c, b, moment_bound > 0, m >= 0, 0 < q < 2, 0 < p < q/2; got c {} b {} m {} q {} p {}",
                self.c, self.b, self.m, self.q, self.p
            )));
        }
        let n = self.times.len();
        let lens = [self.g_sq.len(), self.g_weighted.len(), self.h_sq.len(), self.forcing.len()];
        if lens.iter().any(|&l| l != n) || self.gaussian_moment.as_ref().is_some_and(|g| g.len() != n) {
            return Err(Error::TimeGridMismatch);
        }
        uniform_step(&self.times)
    }

    fn exponent(&self) -> f64 {
        2.0 / (2.0 + self.m)
    }

    fn time_weight(&self, t: f64) -> f64 {
        (self.p * (self.c * t).powf(self.exponent())).exp()
    }
}

/// The constant of the Gaussian-moment lemma delivered by its proof.
pub fn sg_proof_bound(q: f64, m: f64) -> f64 {
    let a = 2.0 / (2.0 + m);
    // int_1^inf e^{-q s^a / 2} ds = (1/a) int_1^inf u^{1/a - 1} e^{-q u / 2} du
    let upper = 1.0 + 80.0 / q;
    let panels = 64;
    let (x, w) = gauss_legendre(16);
    let h = (upper - 1.0) / panels as f64;
    let mut tail = 0.0;
    for j in 0..panels {
        let mid = 1.0 + (j as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(&w) {
            let u = mid + 0.5 * h * xi;
            tail += 0.5 * h * wi * u.powf(1.0 / a - 1.0) * (-0.5 * q * u).exp();
        }
    }
    2.0 + q.exp() * ((2.0 + m) / 2.0 + tail / a)
}

/// Checks the hypotheses of the Gaussian-moment lemma on sampled data and,
/// only when they hold, measures the constant of its conclusion.
pub fn strain_guo_check(input: &StrainGuoInput) -> Result<StrainGuoReport> {
    let dt = input.validate()?;
    let n = input.times.len();
    let mut residual = differential_residual(dt, &input.g_sq, |i| {
        (
            input.c * input.g_weighted[i] + input.b * input.h_sq[i],
            input.forcing[i],
        )
    });
    let mut what = "differential inequality";
    if let Some(moment) = &input.gaussian_moment {
        let r = moment.iter().fold(0.0f64, |a, &x| a.max(x)) / input.moment_bound - 1.0 - SG_TOL;
        if r > residual {
            residual = r;
            what = "Gaussian moment bound";
        }
    }
    let weights: Vec<f64> = input.times.iter().map(|&t| input.time_weight(t)).collect();
    let forced: Vec<f64> = (0..n).map(|i| weights[i] * input.forcing[i]).collect();
    let r = trapezoid(dt, &forced) / input.moment_bound - 1.0 - SG_TOL;
    if r > residual {
        residual = r;
        what = "forcing integral";
    }
    if residual > 0.0 {
        return Err(Error::HypothesisViolated {
            what: what.into(),
            residual,
        });
    }
    let dissipated: Vec<f64> = (0..n).map(|i| weights[i] * input.h_sq[i]).collect();
    let sup = (0..n).map(|i| weights[i] * input.g_sq[i]).fold(0.0, f64::max);
    Ok(StrainGuoReport {
        c_const: (sup + input.b * trapezoid(dt, &dissipated)) / input.moment_bound,
        hypothesis_residual: residual,
        proof_bound: sg_proof_bound(input.q, input.m),
    })
}

/// Sampled data of the polynomial-moment variant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyInput {
    pub c: f64,
    pub m: f64,
    /// Bound on `int <v>^{4m} g^2`.
    pub moment_bound: f64,
    pub times: Vec<f64>,
    pub g_sq: Vec<f64>,
    pub g_weighted: Vec<f64>,
    pub moment: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyReport {
    /// `max_t <ct>^3 int g^2 / moment_bound`.
    pub ratio: f64,
    /// `3^5 pi / 2 + 1`.
    pub bound: f64,
    pub hypothesis_residual: f64,
}

/// Checks the polynomial-moment variant: `int g^2 <= (3^5 pi/2 + 1) C <ct>^{-3}`.
pub fn strain_guo_poly_check(input: &PolyInput) -> Result<PolyReport> {
    if !(input.c > 0.0 && input.m >= 0.0 && input.moment_bound > 0.0) {
        return Err(Error::InvalidArgument("poly variant needs c, moment_bound > 0 and m >= 0".into()));
    }
    let n = input.times.len();
    if input.g_sq.len() != n || input.g_weighted.len() != n || input.moment.as_ref().is_some_and(|m| m.len() != n) {
        return Err(Error::TimeGridMismatch);
    }
    let dt = uniform_step(&input.times)?;
    let mut residual = differential_residual(dt, &input.g_sq, |i| (input.c * input.g_weighted[i], 0.0));
    let mut what = "differential inequality";
    if let Some(moment) = &input.moment {
        let r = moment.iter().fold(0.0f64, |a, &x| a.max(x)) / input.moment_bound - 1.0 - SG_TOL;
        if r > residual {
            residual = r;
            what = "moment bound";
        }
    }
    if residual > 0.0 {
        return Err(Error::HypothesisViolated {
            what: what.into(),
            residual,
        });
    }
    let ratio = (0..n)
        .map(|i| japanese([input.c * input.times[i], 0.0, 0.0]).powi(3) * input.g_sq[i])
        .fold(0.0, f64::max)
        / input.moment_bound;
    Ok(PolyReport {
        ratio,
        bound: poly_constant(),
        hypothesis_residual: residual,
    })
}

/// `4 pi int_0^R r^2 f(r) dr` by composite Gauss-Legendre, `R = 12`.
fn radial_integral(f: impl Fn(f64) -> f64) -> f64 {
    let (x, w) = gauss_legendre(24);
    let (panels, r_max) = (24, 12.0);
    let h = r_max / panels as f64;
    let mut s = 0.0;
    for j in 0..panels {
        let mid = (j as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(&w) {
            let r = mid + 0.5 * h * xi;
            s += 0.5 * h * wi * r * r * f(r);
        }
    }
    4.0 * std::f64::consts::PI * s
}

/// The closed-form solution `g = e^{-ct <v>^{-m} / 2} e^{-|v|^2 / 2}` of
/// `d/dt int g^2 = -c int <v>^{-m} g^2`, with `h = 0`, no forcing and the
/// moment constant `(pi / (1 - q))^{3/2}` (so `q < 1`).
pub fn exact_construct(c: f64, m: f64, q: f64, p: f64, times: &[f64]) -> Result<StrainGuoInput> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidArgument(format!("the construct needs 0 < q < 1, got {q}")));
    }
    let jap = |r: f64| (1.0 + r * r).sqrt();
    let at = |t: f64, extra: &dyn Fn(f64) -> f64| {
        radial_integral(|r| (-c * t * jap(r).powf(-m) - r * r).exp() * extra(r))
    };
    Ok(StrainGuoInput {
        c,
        b: 1.0,
        m,
        q,
        p,
        moment_bound: (std::f64::consts::PI / (1.0 - q)).powf(1.5),
        times: times.to_vec(),
        g_sq: times.iter().map(|&t| at(t, &|_| 1.0)).collect(),
        g_weighted: times.iter().map(|&t| at(t, &|r| jap(r).powf(-m))).collect(),
        h_sq: vec![0.0; times.len()],
        forcing: vec![0.0; times.len()],
        gaussian_moment: Some(times.iter().map(|&t| at(t, &|r| (q * r * r).exp())).collect()),
    })
}

/// The same construct for the polynomial variant, with moment constant
/// `int <v>^{4m} g_0^2`.
pub fn poly_construct(c: f64, m: f64, times: &[f64]) -> PolyInput {
    let jap = |r: f64| (1.0 + r * r).sqrt();
    let at = |t: f64, extra: &dyn Fn(f64) -> f64| {
        radial_integral(|r| (-c * t * jap(r).powf(-m) - r * r).exp() * extra(r))
    };
    let moment: Vec<f64> = times.iter().map(|&t| at(t, &|r| jap(r).powf(4.0 * m))).collect();
    PolyInput {
        c,
        m,
        moment_bound: at(0.0, &|r| jap(r).powf(4.0 * m)),
        times: times.to_vec(),
        g_sq: times.iter().map(|&t| at(t, &|_| 1.0)).collect(),
        g_weighted: times.iter().map(|&t| at(t, &|r| jap(r).powf(-m))).collect(),
        moment: Some(moment),
    }
}

/// Lemma data read off a linear Landau trajectory with snapshots: `g = |h_k|`,
/// `h = 0`, no forcing. The rate `c` is measured as `(1 - SG_TOL^{1/2})` times the
/// smallest `-G' / W` over interior snapshots, and the moment constant as the
/// largest sampled Gaussian moment.
pub fn input_from_trajectory(traj: &Trajectory, m: f64, q: f64, p: f64) -> Result<StrainGuoInput> {
    let snaps = &traj.snapshots;
    let times: Vec<f64> = snaps.iter().map(|s| s.time).collect();
    let dt = uniform_step(&times)?;
    let grid = snaps[0].field.grid();
    let moment_of = |weight: &dyn Fn([f64; 3]) -> f64| -> Vec<f64> {
        let w = grid.sample(weight);
        snaps
            .iter()
            .map(|s| s.field.values().iter().zip(&w).map(|(z, w)| w * z.norm_sqr()).sum::<f64>() * grid.weight())
            .collect()
    };
    let g_sq = moment_of(&|_| 1.0);
    let g_weighted = moment_of(&|v| japanese(v).powf(-m));
    let gaussian = moment_of(&|v| (q * crate::phase_space::norm_sq(v)).exp());
    let c = (1..times.len() - 1)
        .map(|i| -(g_sq[i + 1] - g_sq[i - 1]) / (2.0 * dt) / g_weighted[i])
        .fold(f64::INFINITY, f64::min)
        * (1.0 - SG_TOL.sqrt());
    if !(c > 0.0) {
        return Err(Error::HypothesisViolated {
            what: "no positive decay rate on the trajectory".into(),
            residual: -c,
        });
    }
    let n = times.len();
    Ok(StrainGuoInput {
        c,
        b: 1.0,
        m,
        q,
        p,
        moment_bound: gaussian.iter().fold(0.0, |a: f64, &x| a.max(x)),
        times,
        g_sq,
        g_weighted,
        h_sq: vec![0.0; n],
        forcing: vec![0.0; n],
        gaussian_moment: Some(gaussian),
    })
}
