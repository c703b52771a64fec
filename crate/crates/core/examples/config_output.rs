//! Parses a TOML run file, runs the estimate section and renders CSV and JSON.

use loglab::config::RunConfig;
use loglab::estimator::{estimate_z, MCConfig};
use loglab::output::{estimate_table, render_csv, render_json, EstimateOutput};

const RUN: &str = r#"
[run]
seed = 99

[estimate]
d = 1
N = 32
lambda = 0.05
K = inf
L = 25
p = 2
nsamples = 5000
"#;

fn main() -> loglab::Result<()> {
    let config = RunConfig::parse(RUN)?;
    let section = config.estimate.clone().expect("estimate section");
    let z1 = estimate_z(&MCConfig { p: 1.0, ..section.clone() })?;
    let zp = estimate_z(&section)?;
    let out = EstimateOutput { config: section, z1, zp };
    print!("{}", render_csv("estimate", &config, &estimate_table(&out))?);
    print!("{}", render_json("estimate", &config, &out)?);
    println!("resolved TOML:\n{}", config.to_toml());
    Ok(())
}
