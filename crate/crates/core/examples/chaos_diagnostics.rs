//! Dyadic chaos diagnostics B1 and B2 averaged over samples at growing cutoffs.

use loglab::verify::{diagnostic_means, largest_rise};

fn main() -> loglab::Result<()> {
    let rows = diagnostic_means(2, &[8, 16, 32, 64], 2000, 5, 0)?;
    for r in &rows {
        println!(
            "N = {:>2}: E[B1] = {:.4} +- {:.4}, E[B2] = {:.4} +- {:.4}",
            r.cutoff, r.b1.mean, r.b1.stderr, r.b2.mean, r.b2.stderr
        );
    }
    let b1: Vec<_> = rows.iter().map(|r| r.b1).collect();
    let b2: Vec<_> = rows.iter().map(|r| r.b2).collect();
    println!("largest rise in 99% margins: B1 {:.2}, B2 {:.2}", largest_rise(&b1), largest_rise(&b2));
    Ok(())
}
