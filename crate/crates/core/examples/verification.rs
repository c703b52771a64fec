//! Runs every verification suite and prints its table.

use loglab::verify::{run_suite, SUITES};

fn main() -> loglab::Result<()> {
    let mut failed = Vec::new();
    for suite in SUITES {
        let report = run_suite(suite, 20_240_917, 0)?;
        print!("{}", report.render());
        if !report.passed() {
            failed.push(suite);
        }
        println!();
    }
    println!("suites with failing checks: {failed:?}");
    Ok(())
}
