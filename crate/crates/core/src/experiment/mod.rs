//! Named experiments: config parsing, sweep scheduling and CSV/JSON emission.
//!
//! A run writes its CSV tables and JSON reports as each stage finishes, then
//! `schema.json` documenting every CSV column, then `manifest.json`. CSV
//! bodies depend only on the resolved config; timestamps live in the manifest.

mod config;
mod output;
pub mod pipelines;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;

pub use config::{
    validate_config, validate_config_with, EnergyConfig, EnhancedConfig, Experiment, ExperimentConfig, GridConfig,
    PenroseConfig, RunConfig, SelftestConfig, StrainGuoConfig, WeightConfig, DEFAULT_SEED,
};
pub use output::{
    compare_csv, read_manifest, Artifact, Cell, Check, Manifest, Recorder, RunStatus, Table, CHECK_ATOL, CHECK_RTOL,
    MANIFEST_FILE, SCHEMA_FILE,
};

use crate::error::{Error, Result};
use pipelines::*;

/// Where and how a run executes.
#[derive(Clone, Debug)]
pub struct RunOptions {
    pub out: PathBuf,
    /// Worker threads for sweep points; 0 lets the pool decide.
    pub threads: usize,
}

fn versions() -> BTreeMap<String, String> {
    BTreeMap::from([
        (env!("CARGO_PKG_NAME").to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("manifest-format".to_string(), "1".to_string()),
    ])
}

/// Runs the experiment named by `cfg` into `opts.out`.
///
/// Errors are returned only when the output directory cannot be used. A
/// failure inside a stage is recorded in the manifest with the stage name,
/// the artifacts written so far are kept and flagged as partial.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Manifest> {
    cfg.validate()?;
    let rec = Recorder::new(&opts.out)?;
    let started = Instant::now();
    let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let outcome = pool.install(|| run_pipeline(cfg, &rec));
    let (status, failed_stage, error) = match &outcome {
        Ok(()) => (RunStatus::Pass, None, None),
        Err(e) => {
            let stage = rec.current_stage();
            log::error!("stage {stage} failed: {e}");
            (RunStatus::NumericalFailure, Some(stage), Some(e.to_string()))
        }
    };
    let manifest = Manifest {
        experiment: cfg.experiment.name().to_string(),
        versions: versions(),
        config: cfg.clone(),
        config_sha256: cfg.digest(),
        seed: cfg.seed,
        threads: pool.current_num_threads(),
        started_unix,
        wall_time_s: started.elapsed().as_secs_f64(),
        status,
        partial: outcome.is_err(),
        failed_stage,
        error,
        artifacts: vec![],
        checks: vec![],
    };
    rec.finish(manifest)
}

/// Re-runs the config stored in `dir` into a scratch directory and compares
/// every stored CSV with its recomputation. Returns the differences, and also
/// reports stored CSV columns missing from the stored schema.
pub fn check_outputs(dir: &Path, threads: usize) -> Result<Vec<String>> {
    let stored = read_manifest(dir)?;
    let schema: BTreeMap<String, BTreeMap<String, String>> = serde_json::from_slice(&std::fs::read(dir.join(SCHEMA_FILE))?)
        .map_err(|e| Error::Format(format!("{SCHEMA_FILE}: {e}")))?;
    let scratch = tempfile::tempdir()?;
    let fresh = run_experiment(
        &stored.config,
        &RunOptions {
            out: scratch.path().to_path_buf(),
            threads,
        },
    )?;
    let mut diffs = vec![];
    if fresh.partial {
        diffs.push(format!(
            "recomputation failed in stage {}: {}",
            fresh.failed_stage.unwrap_or_default(),
            fresh.error.unwrap_or_default()
        ));
    }
    for a in stored.artifacts.iter().filter(|a| a.rows.is_some()) {
        let header = csv::Reader::from_path(dir.join(&a.file))
            .and_then(|mut r| r.headers().cloned())
            .map_err(|e| Error::Format(format!("{}: {e}", a.file)))?;
        let documented = schema.get(&a.file);
        for col in header.iter() {
            if !documented.is_some_and(|d| d.contains_key(col)) {
                diffs.push(format!("{}: column `{col}` is not documented in {SCHEMA_FILE}", a.file));
            }
        }
        let recomputed = scratch.path().join(&a.file);
        if !recomputed.exists() {
            diffs.push(format!("{}: not produced by the recomputation", a.file));
            continue;
        }
        diffs.extend(compare_csv(&dir.join(&a.file), &recomputed)?);
    }
    Ok(diffs)
}

fn run_pipeline(cfg: &ExperimentConfig, rec: &Recorder) -> Result<()> {
    match cfg.experiment {
        Experiment::OperatorSelftest => selftest(cfg, rec),
        Experiment::KernelConvergence => convergence(cfg, rec),
        Experiment::PenroseScan => penrose(cfg, rec),
        Experiment::LandauDamping => damping(cfg, rec),
        Experiment::EnhancedDissipation => enhanced(cfg, rec),
        Experiment::Hypocoercivity => hypocoercivity(cfg, rec),
        Experiment::StrainGuo => strain_guo(cfg, rec),
    }
}

fn horizon(cfg: &ExperimentConfig) -> Result<f64> {
    cfg.run
        .t_final
        .ok_or_else(|| Error::Config(format!("{} needs run.t_final", cfg.experiment)))
}

fn k_cells(k: [i64; 3]) -> Vec<Cell> {
    k.iter().map(|&x| Cell::Int(x)).collect()
}

const K_COLUMNS: [(&str, &str); 3] = [
    ("k1", "wavevector component 1"),
    ("k2", "wavevector component 2"),
    ("k3", "wavevector component 3"),
];

fn with_k(extra: &[(&'static str, &'static str)]) -> Vec<(&'static str, &'static str)> {
    let mut cols = K_COLUMNS.to_vec();
    cols.extend_from_slice(extra);
    cols
}

fn selftest(cfg: &ExperimentConfig, rec: &Recorder) -> Result<()> {
    rec.stage("operator-selftest");
    let r = operator_selftest(
        cfg.grid.half_width,
        cfg.grid.n,
        &cfg.selftest.floor_grids,
        cfg.selftest.pairs,
        cfg.seed,
    )?;
    rec.stage("write");
    let mut t = Table::new(
        "floors.csv",
        &[
            ("n", "cells per velocity axis"),
            ("mass", "|L b|/|b| for b = sqrt(mu)"),
            ("momentum1", "|L b|/|b| for b = v1 sqrt(mu)"),
            ("momentum2", "|L b|/|b| for b = v2 sqrt(mu)"),
            ("momentum3", "|L b|/|b| for b = v3 sqrt(mu)"),
            ("energy", "|L b|/|b| for b = |v|^2 sqrt(mu)"),
            ("floor", "largest of the five ratios"),
        ],
    );
    for f in &r.floors {
        let mut row = vec![Cell::from(f.n)];
        row.extend(f.ratios.iter().map(|&x| Cell::Num(x)));
        row.push(f.floor.into());
        t.push(row);
    }
    rec.table(&t)?;
    rec.json("selftest.json", &r)?;
    rec.checks(r.checks());
    Ok(())
}

fn convergence(cfg: &ExperimentConfig, rec: &Recorder) -> Result<()> {
    rec.stage("collision-fields");
    let cf = collision_fields(cfg.grid.half_width, cfg.grid.n)?;
    let t_final = horizon(cfg)?;
    let mut summary = Table::new(
        "kernel_convergence.csv",
        &with_k(&[("nu", "collision frequency"), ("sup_difference", "sup_t |K^nu(t) - K^0(t)|")]),
    );
    let mut series = Table::new(
        "kernels.csv",
        &with_k(&[
            ("nu", "collision frequency (0 is the reference)"),
            ("t", "time"),
            ("re", "Re K(t)"),
            ("im", "Im K(t)"),
        ]),
    );
    let mut reports = vec![];
    for &k in &cfg.run.modes {
        rec.stage(&format!("kernels {k:?}"));
        let r = kernel_convergence(&cf, k, &cfg.run.nu, t_final, cfg.run.dt)?;
        for p in &r.points {
            let mut row = k_cells(k);
            row.extend([p.nu.into(), p.sup_difference.into()]);
            summary.push(row);
        }
        for (nu, ks) in std::iter::once((0.0, &r.reference)).chain(r.points.iter().map(|p| (p.nu, &p.kernel))) {
            for (i, z) in ks.series.values.iter().enumerate() {
                let mut row = k_cells(k);
                row.extend([nu.into(), ks.series.time(i).into(), z.re.into(), z.im.into()]);
                series.push(row);
            }
        }
        rec.checks(r.checks());
        reports.push(serde_json::json!({ "k": r.k, "t_final": r.t_final, "slope": r.slope }));
    }
    rec.stage("write");
    rec.table(&summary)?;
    rec.table(&series)?;
    rec.json("fit.json", &reports)
}

fn penrose(cfg: &ExperimentConfig, rec: &Recorder) -> Result<()> {
    rec.stage("collision-fields");
    let cf = collision_fields(cfg.grid.half_width, cfg.grid.n)?;
    let t_final = horizon(cfg)?;
    let sweep: Vec<([i64; 3], f64)> = cfg
        .run
        .modes
        .iter()
        .flat_map(|&k| cfg.run.nu.iter().map(move |&nu| (k, nu)))
        .collect();
    rec.stage("penrose sweep");
    let points = sweep
        .par_iter()
        .map(|&(k, nu)| {
            let p = penrose_point(&cf, k, nu, t_final, cfg.run.dt, cfg.penrose.tau_max, cfg.penrose.spacing)?;
            let mut t = Table::new(
                format!("kernel_k{}{}{}_nu{nu:e}.csv", k[0], k[1], k[2]),
                &[("t", "time"), ("re", "Re K(t)"), ("im", "Im K(t)")],
            );
            for (i, z) in p.kernel.series.values.iter().enumerate() {
                t.push(vec![p.kernel.series.time(i).into(), z.re.into(), z.im.into()]);
            }
            rec.table(&t)?;
            Ok(p)
        })
        .collect::<Result<Vec<_>>>()?;
    rec.stage("write");
    let mut t = Table::new(
        "penrose.csv",
        &with_k(&[
            ("nu", "collision frequency"),
            ("kappa", "min_tau |1 + L[K](i tau)| on the fine frequency grid"),
            ("argmin_tau", "minimising frequency"),
            ("kappa_coarse", "the same on the coarse grid"),
            ("relative_change", "|kappa_coarse - kappa| / kappa"),
            ("laplace_at_zero", "L[K](0)"),
            ("oracle_error", "relative Linf distance to the closed-form kernel on [0,10], NaN if nu > 0"),
        ]),
    );
    let mut margins = vec![];
    for p in &points {
        let mut row = k_cells(p.k);
        row.extend([
            p.nu.into(),
            p.fine.kappa.into(),
            p.fine.argmin_tau.into(),
            p.coarse.kappa.into(),
            p.relative_change.into(),
            p.laplace_at_zero.into(),
            p.oracle_error.unwrap_or(f64::NAN).into(),
        ]);
        t.push(row);
        rec.checks(p.checks());
        margins.push(serde_json::json!({ "k": p.k, "nu": p.nu, "coarse": p.coarse, "fine": p.fine }));
    }
    rec.table(&t)?;
    rec.json("margins.json", &margins)
}

fn damping(cfg: &ExperimentConfig, rec: &Recorder) -> Result<()> {
    rec.stage("collision-fields");
    let cf = collision_fields(cfg.grid.half_width, cfg.grid.n)?;
    let t_final = horizon(cfg)?;
    for &k in &cfg.run.modes {
        rec.stage(&format!("coupled mode {k:?}"));
        let r = landau_damping(&cf, k, t_final, cfg.run.dt)?;
        let mut t = Table::new(
            format!("density_k{}{}{}.csv", k[0], k[1], k[2]),
            &[
                ("t", "time"),
                ("rho_re", "Re rho_k(t)"),
                ("rho_im", "Im rho_k(t)"),
                ("abs", "|rho_k(t)|"),
                ("envelope", "max over s >= t of |rho_k(s)|"),
            ],
        );
        for i in 0..r.times.len() {
            t.push(vec![
                r.times[i].into(),
                r.rho[i].re.into(),
                r.rho[i].im.into(),
                r.rho[i].norm().into(),
                r.envelope[i].into(),
            ]);
        }
        rec.table(&t)?;
        rec.json(
            &format!("damping_k{}{}{}.json", k[0], k[1], k[2]),
            &serde_json::json!({
                "k": k, "peak": r.peak, "late_ratio": r.late_ratio, "exponent": r.exponent,
                "model": "power", "t_min": 2.0 / (k.iter().map(|x| (x * x) as f64).sum::<f64>()).sqrt(),
            }),
        )?;
        rec.checks(r.checks());
    }
    Ok(())
}

fn enhanced(cfg: &ExperimentConfig, rec: &Recorder) -> Result<()> {
    rec.stage("collision-fields");
    let cf = collision_fields(cfg.grid.half_width, cfg.grid.n)?;
    let sweep: Vec<([i64; 3], f64)> = cfg
        .run
        .modes
        .iter()
        .flat_map(|&k| cfg.run.nu.iter().map(move |&nu| (k, nu)))
        .collect();
    rec.stage("decay sweep");
    let points = sweep
        .par_iter()
        .map(|&(k, nu)| {
            let (t_final, dt) = decay_schedule(k, nu, cfg.run.dt, cfg.run.t_final, &cfg.enhanced);
            let p = decay_point(&cf, k, nu, t_final, dt)?;
            let mut t = Table::new(
                format!("decay_k{}{}{}_nu{nu:e}.csv", k[0], k[1], k[2]),
                &[("t", "time"), ("norm", "|h_k(t)| in L2")],
            );
            for (&s, &n) in p.times.iter().zip(&p.norms) {
                t.push(vec![s.into(), n.into()]);
            }
            rec.table(&t)?;
            Ok(p)
        })
        .collect::<Result<Vec<_>>>()?;
    rec.stage("fit");
    let mut t = Table::new(
        "e_fold.csv",
        &with_k(&[
            ("nu", "collision frequency"),
            ("t_final", "run horizon"),
            ("dt", "time step"),
            ("e_fold", "first time |h| <= |h(0)|/e, NaN if never"),
        ]),
    );
    for p in &points {
        let mut row = k_cells(p.k);
        row.extend([p.nu.into(), p.t_final.into(), p.dt.into(), p.e_fold.unwrap_or(f64::NAN).into()]);
        t.push(row);
    }
    rec.table(&t)?;
    let fits = fit_rates(&points);
    rec.json("fit.json", &fits)?;
    rec.checks(fits.iter().map(RateFit::check));
    Ok(())
}

fn hypocoercivity(cfg: &ExperimentConfig, rec: &Recorder) -> Result<()> {
    rec.stage("collision-fields");
    let cf = collision_fields(cfg.grid.half_width, cfg.grid.n)?;
    let t_final = horizon(cfg)?;
    let params = cfg.energy_params();
    let mut summary = Table::new(
        "theta.csv",
        &with_k(&[
            ("nu", "collision frequency"),
            ("theta_hat", "largest theta with E' + theta nu^(1/3) D <= 0 at every interior sample"),
            ("binding_time", "sample at which theta_hat is attained"),
            ("energy_drift", "max |E(t)/E(0) - 1|"),
        ]),
    );
    for &k in &cfg.run.modes {
        rec.stage(&format!("monitor {k:?}"));
        let r = hypocoercivity_sweep(&cf, k, &cfg.run.nu, t_final, cfg.run.dt, &params, cfg.energy.probes, cfg.seed)?;
        for (m, s) in &r.runs {
            let mut row = k_cells(k);
            row.extend([
                m.nu.into(),
                m.theta_hat.unwrap_or(f64::NAN).into(),
                m.binding_time.unwrap_or(f64::NAN).into(),
                m.energy_drift.into(),
            ]);
            summary.push(row);
            let mut t = Table::new(
                format!("monitor_k{}{}{}_nu{:e}.csv", k[0], k[1], k[2], m.nu),
                &[
                    ("t", "time"),
                    ("energy", "linear energy E(t)"),
                    ("dissipation", "linear dissipation D(t)"),
                    ("theta", "bound on theta from this sample, NaN at the endpoints"),
                ],
            );
            for i in 0..s.times.len() {
                t.push(vec![s.times[i].into(), s.energy[i].into(), s.dissipation[i].into(), s.theta[i].into()]);
            }
            rec.table(&t)?;
        }
        rec.json(
            &format!("monitor_k{}{}{}.json", k[0], k[1], k[2]),
            &serde_json::json!({
                "definiteness": r.definiteness,
                "runs": r.runs.iter().map(|x| &x.0).collect::<Vec<_>>(),
                "theta_spread": r.theta_spread(),
            }),
        )?;
        rec.checks(r.checks());
    }
    rec.stage("write");
    rec.table(&summary)
}

fn strain_guo(cfg: &ExperimentConfig, rec: &Recorder) -> Result<()> {
    rec.stage("collision-fields");
    let cf = collision_fields(cfg.grid.half_width, cfg.grid.n)?;
    let t_final = horizon(cfg)?;
    rec.stage("strain-guo");
    let suite = strain_guo_suite(
        &cfg.strain_guo,
        Some((&cf, cfg.run.modes[0], cfg.run.nu[0], t_final, cfg.run.dt, cfg.seed)),
    )?;
    rec.stage("write");
    let mut t = Table::new(
        "strain_guo.csv",
        &[
            ("case", "closed-form, poly or trajectory"),
            ("m", "moment loss"),
            ("c", "decay rate of the hypothesis"),
            ("value", "measured C, or max <ct>^3 int g^2 / moment for the poly case"),
            ("bound", "proof bound on C, or 3^5 pi/2 + 1 for the poly case"),
            ("hypothesis_residual", "largest relative hypothesis violation, <= 0 when they hold"),
        ],
    );
    for e in &suite.exact {
        t.push(vec![
            "closed-form".into(),
            e.m.into(),
            cfg.strain_guo.c.into(),
            e.report.c_const.into(),
            e.report.proof_bound.into(),
            e.report.hypothesis_residual.into(),
        ]);
    }
    for p in &suite.poly {
        t.push(vec![
            "poly".into(),
            p.m.into(),
            cfg.strain_guo.c.into(),
            p.report.ratio.into(),
            p.report.bound.into(),
            p.report.hypothesis_residual.into(),
        ]);
    }
    if let Some(tr) = &suite.trajectory {
        t.push(vec![
            "trajectory".into(),
            cfg.strain_guo.m[0].into(),
            tr.c.into(),
            tr.report.c_const.into(),
            tr.report.proof_bound.into(),
            tr.report.hypothesis_residual.into(),
        ]);
    }
    rec.table(&t)?;
    rec.json("strain_guo.json", &suite)?;
    rec.checks(suite.checks());
    Ok(())
}
