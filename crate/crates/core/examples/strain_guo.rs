//! The time-decay interpolation lemma: hypotheses and constants on
//! closed-form data, and the polynomial-moment variant.

use vpl_landau::energy::{poly_constant, sg_proof_bound};
use vpl_landau::experiment::pipelines::strain_guo_suite;
use vpl_landau::experiment::StrainGuoConfig;

fn main() -> vpl_landau::Result<()> {
    let cfg = StrainGuoConfig::default();
    let suite = strain_guo_suite(&cfg, None)?;
    for e in &suite.exact {
        println!(
            "m = {}: C = {:.4} (proof gives {:.4}, recomputed {:.4})",
            e.m,
            e.report.c_const,
            e.report.proof_bound,
            sg_proof_bound(cfg.q, e.m)
        );
    }
    for p in &suite.poly {
        println!("m = {}: max <ct>^3 int g^2 / C = {:.4e} <= {:.5}", p.m, p.report.ratio, poly_constant());
    }
    Ok(())
}
