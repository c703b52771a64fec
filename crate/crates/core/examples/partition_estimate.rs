//! Monte Carlo estimates of the truncated partition function for a few
//! couplings, with the heavy-tail and cap diagnostics.

use loglab::estimator::{estimate_density_difference, estimate_z, MCConfig};

fn main() -> loglab::Result<()> {
    let base = MCConfig {
        d: 2,
        cutoff: 16,
        lambda: 0.0,
        k: 16f64.ln(),
        cap: 40.0,
        p: 1.0,
        nsamples: 20_000,
        master_seed: 7,
        workers: 0,
    };
    println!("{:>8} {:>14} {:>12} {:>8} {:>8} flags", "lambda", "Z", "stderr", "event", "capped");
    for lambda in [0.0, 0.01, 0.05, 0.1, 0.2] {
        let r = estimate_z(&MCConfig { lambda, ..base.clone() })?;
        println!(
            "{lambda:>8} {:>14.6e} {:>12.3e} {:>8.4} {:>8.4} {:?}",
            r.mean, r.stderr, r.indicator_hit_rate, r.cap_hit_rate, r.flags
        );
    }
    let gap = estimate_density_difference(&MCConfig { lambda: 0.05, ..base }, 8)?;
    println!("E|G_16 - G_8| at lambda = 0.05: {:.4} +- {:.4}", gap.mean, gap.stderr);
    Ok(())
}
