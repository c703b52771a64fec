//! Samples a field, moves it to the dealiased grid and back, and compares
//! pointwise variance with the lattice variance.

use std::sync::Arc;

use loglab::spectral::{dealiased_grid_size, sample_field, sigma, Lattice};

fn main() -> loglab::Result<()> {
    let (d, n) = (2, 16);
    let lattice = Arc::new(Lattice::new(d, n)?);
    let s = sigma(d, n)?;
    println!("d = {d}, N = {n}: {} modes, sigma_N = {:.6}", lattice.len(), s.sigma);

    let u = sample_field(&lattice, 2024, 0);
    let grid = u.to_grid(dealiased_grid_size(n))?;
    println!(
        "grid {}^{d}, mean of u^2 = {:.6}, coefficient norm = {:.6}",
        grid.size(),
        grid.mean_of(|x| x * x),
        u.norm_sq()
    );

    let back = grid.to_spectral(&lattice)?;
    let gap = u.coeffs().iter().zip(back.coeffs()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    println!("round-trip coefficient error {gap:.2e}");

    // Averaging u(0)^2 over many streams recovers sigma_N.
    let samples = 20_000;
    let squares: Vec<f64> =
        (0..samples).map(|k| sample_field(&lattice, 2024, k).eval(&[0.0, 0.0]).powi(2)).collect();
    let est = loglab::estimator::MomentEstimate::from_values(&squares);
    println!("E[u(0)^2] ~ {:.3} +- {:.3} vs sigma_N {:.3}", est.mean, est.stderr, s.sigma);
    for j in 1..=4 {
        println!("block {j}: norm^2 = {:.4}", u.dyadic_block(j)?.norm_sq());
    }
    Ok(())
}
