//! The bump profile, its drift and the variational lower bound on log Z.

use loglab::drift::{
    build_fm, profile_integrals, shifted_event_probability, witness_lower_bound, BumpProfile, DriftProfile,
    WitnessConfig,
};

fn main() -> loglab::Result<()> {
    let profile = BumpProfile::new(2)?;
    for m in [8, 16, 32, 64] {
        let ints = profile_integrals(&build_fm(&profile, m)?);
        let md = (m * m) as f64;
        println!(
            "M = {m:>2}: int f^2 = {:.6}, m4/M^2 = {:.4}, s2*M^2 = {:.4}",
            ints.m2,
            ints.m4 / md,
            ints.s2 * md
        );
    }
    let n = 16u32;
    let drift = DriftProfile::new(&profile, n, 0.05, (n as f64).ln())?;
    println!("theta amplitude {:.4}, cost {:.4}", drift.amplitude(), drift.theta_cost);

    for lambda in [0.5, 2.0, 8.0] {
        let config = WitnessConfig {
            d: 2,
            cutoff: n,
            m: None,
            gamma: 0.05,
            lambda,
            k: (n as f64).ln(),
            k_m: None,
            cap: 1e3,
            nsamples: 5000,
            master_seed: 3,
            workers: 0,
        };
        let w = witness_lower_bound(&config)?;
        let (event, cheb) = shifted_event_probability(&config)?;
        println!(
            "lambda = {lambda}: witness {:.3} +- {:.3}, shifted event {:.3} (Chebyshev floor {:.3})",
            w.mean,
            w.stderr,
            event.mean,
            1.0 - cheb
        );
    }
    Ok(())
}
