use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::energy::EnergyParams;
use crate::error::{Error, Result};
use crate::phase_space::{build_grid, WeightSpec};

/// The named pipelines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    PenroseScan,
    KernelConvergence,
    LandauDamping,
    EnhancedDissipation,
    Hypocoercivity,
    StrainGuo,
    OperatorSelftest,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::PenroseScan,
        Experiment::KernelConvergence,
        Experiment::LandauDamping,
        Experiment::EnhancedDissipation,
        Experiment::Hypocoercivity,
        Experiment::StrainGuo,
        Experiment::OperatorSelftest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::PenroseScan => "penrose-scan",
            Experiment::KernelConvergence => "kernel-convergence",
            Experiment::LandauDamping => "landau-damping",
            Experiment::EnhancedDissipation => "enhanced-dissipation",
            Experiment::Hypocoercivity => "hypocoercivity",
            Experiment::StrainGuo => "strain-guo",
            Experiment::OperatorSelftest => "operator-selftest",
        }
    }

    /// Grid and run parameters used when the config leaves them out.
    fn defaults(self) -> (GridConfig, RunConfig) {
        let grid = |n| GridConfig { half_width: 6.0, n };
        let run = |modes: &[[i64; 3]], nu: &[f64], t_final: Option<f64>, dt: f64| RunConfig {
            modes: modes.to_vec(),
            nu: nu.to_vec(),
            t_final,
            dt,
        };
        const E1: [i64; 3] = [1, 0, 0];
        match self {
            Experiment::PenroseScan => (grid(32), run(&[E1, [2, 0, 0]], &[0.0, 1e-3], Some(12.0), 0.05)),
            Experiment::KernelConvergence => (grid(24), run(&[E1], &[1e-2, 1e-3, 1e-4], Some(5.0), 0.05)),
            Experiment::LandauDamping => (grid(32), run(&[E1], &[0.0], Some(20.0), 0.05)),
            Experiment::EnhancedDissipation => (
                grid(32),
                run(&[E1, [0, 0, 0]], &[3e-3, 1e-3, 3e-4, 1e-4], None, 0.1),
            ),
            Experiment::Hypocoercivity => (grid(24), run(&[E1], &[3e-3, 1e-3, 3e-4], Some(10.0), 0.05)),
            Experiment::StrainGuo => (grid(24), run(&[E1], &[1e-3], Some(20.0), 0.1)),
            Experiment::OperatorSelftest => (grid(32), run(&[[0, 0, 0]], &[0.0], None, 0.05)),
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment `{s}`")))
    }
}

/// Velocity box `[-L_v, L_v]^3` with `N` cells per axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub half_width: f64,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Fourier modes `k`.
    pub modes: Vec<[i64; 3]>,
    pub nu: Vec<f64>,
    /// Run horizon; `None` lets the pipeline choose it per sweep point.
    pub t_final: Option<f64>,
    pub dt: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WeightConfig {
    pub ell_star: f64,
    pub vartheta: u8,
    pub q0: f64,
}

impl Default for WeightConfig {
    fn default() -> Self {
        let p = EnergyParams::default();
        Self {
            ell_star: p.ell_star,
            vartheta: p.vartheta,
            q0: p.q0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnergyConfig {
    #[serde(rename = "A0")]
    pub a0: f64,
    pub n_max: usize,
    pub n_omega: usize,
    pub eta: [f64; 3],
    pub phi: f64,
    /// Random probes of the definiteness check.
    pub probes: usize,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        let p = EnergyParams::default();
        Self {
            a0: p.a0,
            n_max: p.n_max,
            n_omega: p.n_omega,
            eta: p.eta,
            phi: p.phi,
            probes: 1000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SelftestConfig {
    /// Random pairs of the symmetry probe.
    pub pairs: usize,
    /// Resolutions on which the invariant floor is measured.
    pub floor_grids: Vec<usize>,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        Self {
            pairs: 100,
            floor_grids: vec![24, 32, 48],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PenroseConfig {
    pub tau_max: f64,
    /// Spacing of the coarse frequency grid; the check halves it.
    pub spacing: f64,
}

impl Default for PenroseConfig {
    fn default() -> Self {
        Self {
            tau_max: 10.0,
            spacing: 0.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnhancedConfig {
    /// Horizon of a `k != 0` run in units of `nu^{-1/3}`.
    pub horizon: f64,
    /// Horizon of a `k = 0` run in units of `1/nu`.
    pub zero_mode_horizon: f64,
    /// Steps of a `k = 0` run; its step is `zero_mode_horizon / (nu * steps)`.
    pub zero_mode_steps: usize,
}

impl Default for EnhancedConfig {
    fn default() -> Self {
        Self {
            horizon: 3.0,
            zero_mode_horizon: 1.0,
            zero_mode_steps: 50,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StrainGuoConfig {
    /// Rate `c` of the closed-form constructs.
    pub c: f64,
    /// Moment losses `m` of the constructs.
    pub m: Vec<f64>,
    pub q: f64,
    pub p: f64,
    /// Samples on `[0, t_final]` of the constructs.
    pub samples: usize,
    pub t_final: f64,
}

impl Default for StrainGuoConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            m: vec![1.0, 4.0],
            q: 0.5,
            p: 0.2,
            samples: 201,
            t_final: 20.0,
        }
    }
}

/// A fully resolved experiment: every default filled in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    /// Output directory; the `--out` flag takes precedence.
    pub output: Option<PathBuf>,
    pub grid: GridConfig,
    pub run: RunConfig,
    pub weights: WeightConfig,
    pub energy: EnergyConfig,
    pub selftest: SelftestConfig,
    pub penrose: PenroseConfig,
    pub enhanced: EnhancedConfig,
    pub strain_guo: StrainGuoConfig,
}

pub const DEFAULT_SEED: u64 = 20240917;

fn default_seed() -> u64 {
    DEFAULT_SEED
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    half_width: Option<f64>,
    n: Option<usize>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    modes: Option<Vec<[i64; 3]>>,
    nu: Option<Vec<f64>>,
    t_final: Option<f64>,
    dt: Option<f64>,
}

/// The config as written: sections whose defaults depend on the experiment
/// stay optional until [`RawConfig::resolve`].
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: Experiment,
    #[serde(default = "default_seed")]
    seed: u64,
    #[serde(default)]
    output: Option<PathBuf>,
    #[serde(default)]
    grid: RawGrid,
    #[serde(default)]
    run: RawRun,
    #[serde(default)]
    weights: WeightConfig,
    #[serde(default)]
    energy: EnergyConfig,
    #[serde(default)]
    selftest: SelftestConfig,
    #[serde(default)]
    penrose: PenroseConfig,
    #[serde(default)]
    enhanced: EnhancedConfig,
    #[serde(default)]
    strain_guo: StrainGuoConfig,
}

impl RawConfig {
    fn resolve(self) -> ExperimentConfig {
        let (grid, run) = self.experiment.defaults();
        ExperimentConfig {
            experiment: self.experiment,
            seed: self.seed,
            output: self.output,
            grid: GridConfig {
                half_width: self.grid.half_width.unwrap_or(grid.half_width),
                n: self.grid.n.unwrap_or(grid.n),
            },
            run: RunConfig {
                modes: self.run.modes.unwrap_or(run.modes),
                nu: self.run.nu.unwrap_or(run.nu),
                t_final: self.run.t_final.or(run.t_final),
                dt: self.run.dt.unwrap_or(run.dt),
            },
            weights: self.weights,
            energy: self.energy,
            selftest: self.selftest,
            penrose: self.penrose,
            enhanced: self.enhanced,
            strain_guo: self.strain_guo,
        }
    }
}

/// Parses a TOML experiment config, fills the documented defaults and checks
/// every module precondition that can be checked without running.
pub fn validate_config(text: &str) -> Result<ExperimentConfig> {
    validate_config_with(text, &[])
}

/// [`validate_config`] after applying `KEY=VALUE` overrides, where `KEY` is a
/// dotted path (`run.nu`, `energy.A0`) and `VALUE` a TOML value; a bare word
/// that is not valid TOML is taken as a string.
pub fn validate_config_with(text: &str, overrides: &[String]) -> Result<ExperimentConfig> {
    let raw: RawConfig = if overrides.is_empty() {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?
    } else {
        let mut doc: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let edited = toml::to_string(&doc).map_err(|e| Error::Config(e.to_string()))?;
        toml::from_str(&edited).map_err(|e| Error::Config(format!("after --set overrides: {e}")))?
    };
    let cfg = raw.resolve();
    cfg.validate()?;
    Ok(cfg)
}

fn apply_override(doc: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, value) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{assignment}`")))?;
    let (key, value) = (key.trim(), value.trim());
    let parsed: toml::Value = match toml::from_str::<toml::Table>(&format!("x = {value}")) {
        Ok(mut t) => t.remove("x").unwrap(),
        Err(_) => toml::Value::String(value.to_string()),
    };
    let path: Vec<&str> = key.split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("--set: malformed key `{key}`")));
    }
    let mut table = doc;
    for part in &path[..path.len() - 1] {
        let entry = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("--set: `{part}` in `{key}` is not a section")))?;
    }
    table.insert(path[path.len() - 1].to_string(), parsed);
    Ok(())
}

fn bad(msg: String) -> Result<()> {
    Err(Error::Config(msg))
}

impl ExperimentConfig {
    /// Defaults of `experiment` with nothing overridden.
    pub fn for_experiment(experiment: Experiment) -> Self {
        validate_config(&format!("experiment = \"{experiment}\"")).expect("defaults are valid")
    }

    /// Energy parameters at the first `nu` of the sweep.
    pub fn energy_params(&self) -> EnergyParams {
        EnergyParams {
            a0: self.energy.a0,
            nu: self.run.nu.first().copied().unwrap_or(0.0),
            ell_star: self.weights.ell_star,
            vartheta: self.weights.vartheta,
            q0: self.weights.q0,
            n_max: self.energy.n_max,
            n_omega: self.energy.n_omega,
            eta: self.energy.eta,
            phi: self.energy.phi,
            ..EnergyParams::default()
        }
    }

    /// SHA-256 of the canonical JSON form of the resolved config.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serialises");
        hex::encode(Sha256::digest(json))
    }

    pub fn validate(&self) -> Result<()> {
        let grid = build_grid(self.grid.half_width, self.grid.n)?;
        if self.run.modes.is_empty() || self.run.nu.is_empty() {
            return bad("run.modes and run.nu must be non-empty".into());
        }
        if let Some(nu) = self.run.nu.iter().find(|nu| !(**nu >= 0.0 && nu.is_finite())) {
            return bad(format!("run.nu entries must be finite and >= 0, got {nu}"));
        }
        if !(self.run.dt > 0.0 && self.run.dt.is_finite()) {
            return bad(format!("run.dt must be positive, got {}", self.run.dt));
        }
        if let Some(t) = self.run.t_final {
            if !(t > 0.0 && t.is_finite()) {
                return bad(format!("run.t_final must be positive, got {t}"));
            }
            let steps = t / self.run.dt;
            if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
                return bad(format!("run.t_final = {t} is not a multiple of run.dt = {}", self.run.dt));
            }
        }
        // Gaussian weights are gated by the exponent budget on this box.
        let weight = WeightSpec::new(self.weights.ell_star, self.weights.vartheta, self.weights.q0 / 2.0)?;
        if self.weights.vartheta == 2 {
            WeightSpec {
                q: self.weights.q0,
                ..weight
            }
            .check_budget(&grid)?;
        }
        self.energy_params().validate()?;
        let needs_nonzero = matches!(
            self.experiment,
            Experiment::PenroseScan | Experiment::KernelConvergence | Experiment::LandauDamping
        );
        if needs_nonzero && self.run.modes.contains(&[0, 0, 0]) {
            return bad(format!("{} needs nonzero modes", self.experiment));
        }
        match self.experiment {
            Experiment::KernelConvergence => {
                if self.run.nu.len() < 2 || self.run.nu.iter().any(|&nu| nu <= 0.0) {
                    return bad("kernel-convergence needs at least two positive nu".into());
                }
            }
            Experiment::EnhancedDissipation | Experiment::Hypocoercivity => {
                if self.run.nu.iter().any(|&nu| nu <= 0.0) {
                    return bad(format!("{} needs positive nu", self.experiment));
                }
                if self.experiment == Experiment::EnhancedDissipation && self.run.nu.len() < 2 {
                    return bad("enhanced-dissipation needs at least two nu to fit a rate".into());
                }
                if self.enhanced.zero_mode_steps == 0 || !(self.enhanced.horizon > 0.0) || !(self.enhanced.zero_mode_horizon > 0.0) {
                    return bad("enhanced horizons and zero_mode_steps must be positive".into());
                }
            }
            Experiment::PenroseScan => {
                let p = &self.penrose;
                if !(p.spacing > 0.0 && p.spacing <= crate::density::PENROSE_MAX_SPACING && p.tau_max > p.spacing) {
                    return bad(format!(
                        "penrose.spacing must lie in (0, {}] and below tau_max",
                        crate::density::PENROSE_MAX_SPACING
                    ));
                }
            }
            Experiment::OperatorSelftest => {
                if self.selftest.pairs == 0 || self.selftest.floor_grids.len() < 2 {
                    return bad("selftest needs pairs > 0 and at least two floor grids".into());
                }
                for &n in &self.selftest.floor_grids {
                    build_grid(self.grid.half_width, n)?;
                }
            }
            Experiment::StrainGuo => {
                let s = &self.strain_guo;
                if s.samples < 3 || !(s.t_final > 0.0) || s.m.is_empty() {
                    return bad("strain_guo needs samples >= 3, t_final > 0 and at least one m".into());
                }
            }
            Experiment::LandauDamping => {}
        }
        Ok(())
    }
}
