//! Runs a named experiment from TOML text, as the command line does, and
//! prints its checks and artifacts.

use vpl_landau::experiment::{run_experiment, validate_config_with, RunOptions};

fn main() -> vpl_landau::Result<()> {
    let text = r#"
experiment = "operator-selftest"

[grid]
half_width = 5.0
n = 24

[selftest]
pairs = 10
floor_grids = [16, 24]
"#;
    let cfg = validate_config_with(text, &["seed = 11".to_string()])?;
    let out = std::env::temp_dir().join("vpl-landau-example");
    let manifest = run_experiment(&cfg, &RunOptions { out: out.clone(), threads: 1 })?;
    for c in &manifest.checks {
        println!("{} {}: {:e} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, c.criterion);
    }
    for a in &manifest.artifacts {
        println!("{} {}", out.join(&a.file).display(), &a.sha256[..12]);
    }
    println!("status {:?}, config sha256 {}", manifest.status, &manifest.config_sha256[..12]);
    Ok(())
}
