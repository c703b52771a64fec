//! Exact chaos moments: variance of the Wick square, second moment of the
//! quartic interaction and its Cauchy differences across cutoffs.

use loglab::wick::{
    chaos_second_moment, hermite, interaction_cross_moment, interaction_difference_moment, FrequencyWindow,
};

fn main() -> loglab::Result<()> {
    println!("H_4(2; 1) = {}, H_2(3; 2) = {}", hermite(4, 2.0, 1.0)?, hermite(2, 3.0, 2.0)?);
    for (d, n) in [(1, 1), (1, 4), (2, 4), (2, 8)] {
        let v = chaos_second_moment(d, FrequencyWindow::Ball(n), 0.0)?;
        println!("Var int :u^2: (d={d}, N={n}) = {v:.6}");
    }
    for n in [1, 2, 4, 8, 16] {
        println!("E[R_N^2] (d=1, N={n:>2}) = {:.3}", interaction_cross_moment(1, n, n)?);
    }
    for m in 1..=3 {
        println!("E[(R_4 - R_{m})^2] = {:.3}", interaction_difference_moment(1, 4, m)?);
    }
    Ok(())
}
