//! A small regime scan with both cutoff schedules and the crossover bracket.

use loglab::scan::{run_scan, summarize, ScanConfig};

fn main() -> loglab::Result<()> {
    let config = ScanConfig { nsamples: 2000, master_seed: 1, ..ScanConfig::default() };
    let rows = run_scan(&config)?;
    for r in &rows {
        let w = r.witness.as_ref().map_or(f64::NAN, |w| w.mean);
        let z2 = r.z2.as_ref().map_or(f64::NAN, |z| z.mean);
        println!(
            "{:<10} c={:<5} N={:<3} z2={:<12.4e} witness={:<10.3} {}",
            r.schedule.to_string(),
            r.c,
            r.n,
            z2,
            w,
            r.flags.join(";")
        );
    }
    let (labels, brackets) = summarize(&rows)?;
    for l in labels {
        println!("{} c={}: {}", l.schedule, l.c, l.label);
    }
    for (schedule, b) in brackets {
        println!("{schedule}: crossover in ({:?}, {:?})", b.lower, b.upper);
    }
    Ok(())
}
