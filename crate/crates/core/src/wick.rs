//! Hermite polynomials with a variance parameter, Wick-ordered integrals of
//! sampled fields, and closed-form Wiener-chaos second moments.
//!
//! Quadratic Wick integrals are evaluated in coefficient space, where they are
//! exact finite sums. Quartic ones are grid means on a dealiased grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{
    dyadic_block_count, dyadic_range, mode_count, radial_sum, GridField, Lattice, SpectralField, WickVariance,
};

/// Default ceiling on lattice size for the exact quadruple sums.
pub const DEFAULT_SUM_BUDGET: u64 = 1_000;

/// `H_k(x; sigma)` for `k <= 4`.
pub fn hermite(k: u32, x: f64, sigma: f64) -> Result<f64> {
    let x2 = x * x;
    Ok(match k {
        0 => 1.0,
        1 => x,
        2 => x2 - sigma,
        3 => x2 * x - 3.0 * sigma * x,
        4 => x2 * x2 - 6.0 * sigma * x2 + 3.0 * sigma * sigma,
        k => return Err(Error::HermiteDegree(k)),
    })
}

#[inline]
fn h4(x: f64, sigma: f64) -> f64 {
    let x2 = x * x;
    x2 * x2 - 6.0 * sigma * x2 + 3.0 * sigma * sigma
}

/// `sum_l C(k, l) t^{k-l} H_l(y; sigma)`, which equals `H_k(y + t; sigma)`.
pub fn hermite_shifted(k: u32, y: f64, t: f64, sigma: f64) -> Result<f64> {
    if k > 4 {
        return Err(Error::HermiteDegree(k));
    }
    let binom = [
        [1.0, 0.0, 0.0, 0.0, 0.0],
        [1.0, 1.0, 0.0, 0.0, 0.0],
        [1.0, 2.0, 1.0, 0.0, 0.0],
        [1.0, 3.0, 3.0, 1.0, 0.0],
        [1.0, 4.0, 6.0, 4.0, 1.0],
    ];
    (0..=k).try_fold(0.0, |acc, l| {
        Ok(acc + binom[k as usize][l as usize] * t.powi((k - l) as i32) * hermite(l, y, sigma)?)
    })
}

fn check_variance(sigma: &WickVariance, d: usize, cutoff: u32) -> Result<()> {
    if sigma.d == d && sigma.cutoff == cutoff {
        Ok(())
    } else {
        Err(Error::VarianceMismatch { sigma_d: sigma.d, sigma_n: sigma.cutoff, field_d: d, field_n: cutoff })
    }
}

fn check_dealiased(grid: &GridField) -> Result<()> {
    if grid.is_dealiased() {
        Ok(())
    } else {
        Err(Error::Dealiasing {
            grid: grid.size(),
            required: 4 * grid.cutoff() as usize + 1,
            cutoff: grid.cutoff(),
        })
    }
}

/// `int :(pi_N u)^2: dx = ||pi_N u||^2 - sigma_N`, computed from coefficients.
pub fn renormalized_mass(field: &SpectralField, sigma: &WickVariance) -> Result<f64> {
    check_variance(sigma, field.dim(), field.cutoff())?;
    Ok(field.norm_sq() - sigma.sigma)
}

/// Grid route for the same quantity: the grid mean of `H_2(u(x); sigma_N)`.
pub fn renormalized_mass_grid(grid: &GridField, sigma: &WickVariance) -> Result<f64> {
    check_variance(sigma, grid.dim(), grid.cutoff())?;
    Ok(grid.mean_of(|x| x * x - sigma.sigma))
}

/// `R_N(u) = int :(pi_N u)^4: dx`, the grid mean of `H_4(u(x); sigma_N)`.
pub fn interaction_rn(grid: &GridField, sigma: &WickVariance) -> Result<f64> {
    check_variance(sigma, grid.dim(), grid.cutoff())?;
    check_dealiased(grid)?;
    Ok(grid.mean_of(|x| h4(x, sigma.sigma)))
}

fn check_shift(y: &GridField, theta: &GridField, sigma: &WickVariance) -> Result<()> {
    y.check_shape(theta)?;
    check_variance(sigma, y.dim(), y.cutoff())?;
    check_dealiased(y)?;
    if theta.cutoff() > y.cutoff() {
        return Err(Error::Shape(format!(
            "drift cutoff {} exceeds field cutoff {}",
            theta.cutoff(),
            y.cutoff()
        )));
    }
    Ok(())
}

/// `R_N(Y + Theta)`: grid mean of `H_4(Y(x) + Theta(x); sigma_N)`.
pub fn shifted_interaction(y: &GridField, theta: &GridField, sigma: &WickVariance) -> Result<f64> {
    check_shift(y, theta, sigma)?;
    let s = sigma.sigma;
    y.mean_with(theta, |a, b| h4(a + b, s))
}

/// The five pieces `int :Y^4:`, `4 int :Y^3: Theta`, `6 int :Y^2: Theta^2`,
/// `4 int Y Theta^3` and `int Theta^4` whose sum is `R_N(Y + Theta)`.
pub fn shifted_interaction_terms(y: &GridField, theta: &GridField, sigma: &WickVariance) -> Result<[f64; 5]> {
    check_shift(y, theta, sigma)?;
    let s = sigma.sigma;
    Ok([
        y.mean_of(|a| h4(a, s)),
        4.0 * y.mean_with(theta, |a, b| (a * a * a - 3.0 * s * a) * b)?,
        6.0 * y.mean_with(theta, |a, b| (a * a - s) * b * b)?,
        4.0 * y.mean_with(theta, |a, b| a * b * b * b)?,
        theta.mean_of(|b| b * b * b * b),
    ])
}

/// Frequency window for quadratic chaos functionals.
///
/// `Ball(hi)` is `|n| <= hi` and includes the zero mode; `Annulus(lo, hi)` is
/// `lo < |n| <= hi`. Bounds `(0, hi]` are read as the ball, matching the
/// convention that the lowest dyadic block absorbs the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FrequencyWindow {
    Ball(u32),
    Annulus(u32, u32),
}

impl FrequencyWindow {
    pub fn from_bounds(lo: u32, hi: u32) -> Self {
        if lo == 0 {
            FrequencyWindow::Ball(hi)
        } else {
            FrequencyWindow::Annulus(lo, hi)
        }
    }

    /// Window of dyadic block `Pi_k`.
    pub fn block(k: u32) -> Result<Self> {
        Ok(match dyadic_range(k)? {
            (None, hi) => FrequencyWindow::Ball(hi),
            (Some(lo), hi) => FrequencyWindow::Annulus(lo, hi),
        })
    }

    /// High-pass `Pi_{>k}` restricted to `|n| <= cutoff`.
    pub fn above_block(k: u32, cutoff: u32) -> Result<Self> {
        let (_, hi) = dyadic_range(k)?;
        Ok(FrequencyWindow::Annulus(hi, cutoff.max(hi)))
    }

    pub fn contains(&self, norm2: u64) -> bool {
        match *self {
            FrequencyWindow::Ball(hi) => norm2 <= (hi as u64).pow(2),
            FrequencyWindow::Annulus(lo, hi) => norm2 > (lo as u64).pow(2) && norm2 <= (hi as u64).pow(2),
        }
    }

    pub fn upper(&self) -> u32 {
        match *self {
            FrequencyWindow::Ball(hi) | FrequencyWindow::Annulus(_, hi) => hi,
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(*self, FrequencyWindow::Annulus(lo, hi) if lo >= hi)
    }
}

/// Exact second moment `2 sum_{n in window} <n>^{-2d-4s}` of
/// `int :(<nabla>^{-s} Pi_window u)^2: dx` under the free field.
pub fn chaos_second_moment(d: usize, window: FrequencyWindow, s: f64) -> Result<f64> {
    if window.is_empty() {
        return Ok(0.0);
    }
    let exponent = -(2.0 * d as f64 + 4.0 * s) / 2.0;
    Ok(2.0
        * radial_sum(d, window.upper(), |k| {
            if window.contains(k) {
                (1.0 + k as f64).powf(exponent)
            } else {
                0.0
            }
        })?)
}

/// `sum_{n in window} <n>^{-2s}` evaluated on the free-field variances
/// `<n>^{-d}`; the mean of `int (<nabla>^{-s} Pi_window u)^2 dx`.
pub fn window_variance(d: usize, window: FrequencyWindow, s: f64) -> Result<f64> {
    if window.is_empty() {
        return Ok(0.0);
    }
    let exponent = -(d as f64 + 2.0 * s) / 2.0;
    radial_sum(d, window.upper(), |k| if window.contains(k) { (1.0 + k as f64).powf(exponent) } else { 0.0 })
}

/// `int :(<nabla>^{-s} Pi_window u)^2: dx` for a sample of the truncated free field.
///
/// Modes outside the field's ball do not exist and drop out of both the
/// square and its Wick constant.
pub fn wick_square(field: &SpectralField, window: FrequencyWindow, s: f64) -> f64 {
    let lattice = field.lattice();
    let d = lattice.dim() as f64;
    let stop = lattice.prefix_len(field.cutoff().min(window.upper()));
    field.coeffs()[..stop]
        .iter()
        .enumerate()
        .filter(|(i, _)| window.contains(lattice.norm2(*i)))
        .map(|(i, c)| {
            let b = lattice.bracket(i);
            b.powf(-2.0 * s) * (c.norm_sqr() - b.powf(-d))
        })
        .sum()
}

/// Kind of a [`ChaosFunctional`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChaosKind {
    Mass2,
    Quartic,
    Weighted2,
}

/// A Wick functional value together with the parameters it was computed under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaosFunctional {
    pub kind: ChaosKind,
    pub value: f64,
    pub d: usize,
    pub cutoff: u32,
    pub sigma: Option<f64>,
    pub window: Option<FrequencyWindow>,
    pub smoothing: f64,
}

impl ChaosFunctional {
    pub fn mass2(field: &SpectralField, sigma: &WickVariance) -> Result<Self> {
        Ok(Self {
            kind: ChaosKind::Mass2,
            value: renormalized_mass(field, sigma)?,
            d: field.dim(),
            cutoff: field.cutoff(),
            sigma: Some(sigma.sigma),
            window: Some(FrequencyWindow::Ball(field.cutoff())),
            smoothing: 0.0,
        })
    }

    pub fn quartic(grid: &GridField, sigma: &WickVariance) -> Result<Self> {
        Ok(Self {
            kind: ChaosKind::Quartic,
            value: interaction_rn(grid, sigma)?,
            d: grid.dim(),
            cutoff: grid.cutoff(),
            sigma: Some(sigma.sigma),
            window: Some(FrequencyWindow::Ball(grid.cutoff())),
            smoothing: 0.0,
        })
    }

    pub fn weighted2(field: &SpectralField, window: FrequencyWindow, s: f64) -> Self {
        Self {
            kind: ChaosKind::Weighted2,
            value: wick_square(field, window, s),
            d: field.dim(),
            cutoff: field.cutoff(),
            sigma: None,
            window: Some(window),
            smoothing: s,
        }
    }
}

/// `E[R_N R_M] = 24 sum_{n1+n2+n3+n4=0, |n_i| <= M} prod <n_i>^{-d}` for `M <= N`.
///
/// Equivalently `24 int C_M(x)^4 dx` with `C_M` the truncated covariance.
/// Evaluated through the pair convolution `S(k) = sum_{n1+n2=k} w(n1) w(n2)`
/// as `24 sum_k S(k)^2`, at cost `O(modes^2)`.
pub fn interaction_cross_moment(d: usize, n: u32, m: u32) -> Result<f64> {
    interaction_cross_moment_with_budget(d, n, m, DEFAULT_SUM_BUDGET)
}

pub fn interaction_cross_moment_with_budget(d: usize, n: u32, m: u32, budget: u64) -> Result<f64> {
    if m > n {
        return Err(Error::CutoffTooLarge { requested: m, available: n });
    }
    let modes = mode_count(d, m)?;
    if modes > budget {
        return Err(Error::SumBudget { modes, cost: modes.saturating_mul(modes), budget });
    }
    let lattice = Lattice::new(d, m)?;
    let w: Vec<f64> = (0..lattice.len()).map(|i| lattice.bracket(i).powi(-(d as i32))).collect();

    let reach = 2 * m as i32;
    let side = (2 * reach + 1) as usize;
    let index =
        |k: [i32; 3]| -> usize { k[..d].iter().fold(0usize, |acc, &x| acc * side + (x + reach) as usize) };
    let mut pair = vec![0.0f64; side.pow(d as u32)];
    for i in 0..lattice.len() {
        let a = lattice.mode3(i);
        for j in 0..lattice.len() {
            let b = lattice.mode3(j);
            pair[index([a[0] + b[0], a[1] + b[1], a[2] + b[2]])] += w[i] * w[j];
        }
    }
    // S(-k) = S(k) by symmetry of w.
    Ok(24.0 * pair.iter().map(|s| s * s).sum::<f64>())
}

/// `E[(R_N - R_M)^2] = E[R_N^2] - E[R_M^2]`.
pub fn interaction_difference_moment(d: usize, n: u32, m: u32) -> Result<f64> {
    Ok(interaction_cross_moment(d, n, n)? - interaction_cross_moment(d, n, m)?)
}

/// Dyadic chaos diagnostics of a free-field sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChaosDiagnostics {
    /// `(sum_k 2^{5dk/2} (int :(<nabla>^{-d/2} Pi_{>k} Y_N)^2: dx)^2)^{1/2}`.
    pub b1: f64,
    /// `sum_k |int :(Pi_k Y_N)^2: dx|`.
    pub b2: f64,
}

/// Computes `B_{1,N}` and `B_{2,N}` with `k = 1..=max(1, ceil(log2 N))`.
pub fn chaos_diagnostics(field: &SpectralField) -> ChaosDiagnostics {
    let lattice = field.lattice();
    let d = lattice.dim();
    let blocks = dyadic_block_count(field.cutoff()) as usize;
    let stop = lattice.prefix_len(field.cutoff());
    let mut plain = vec![0.0f64; blocks + 1];
    let mut smoothed = vec![0.0f64; blocks + 1];
    for (i, c) in field.coeffs()[..stop].iter().enumerate() {
        let var = lattice.bracket(i).powi(-(d as i32));
        let k = block_of(lattice.norm2(i));
        let wick = c.norm_sqr() - var;
        plain[k] += wick;
        smoothed[k] += var * wick;
    }
    let b2 = plain[1..].iter().map(|v| v.abs()).sum();
    // Pi_{>k} collects blocks k+1, k+2, ...
    let mut tail = 0.0;
    let mut b1sq = 0.0;
    for k in (1..=blocks).rev() {
        let above = tail;
        tail += smoothed[k];
        let weight = 2f64.powf(2.5 * d as f64 * k as f64);
        b1sq += weight * above * above;
    }
    ChaosDiagnostics { b1: b1sq.sqrt(), b2 }
}

/// Dyadic block containing a mode of squared norm `norm2`.
fn block_of(norm2: u64) -> usize {
    if norm2 <= 4 {
        return 1;
    }
    let mut k = 2usize;
    while norm2 > 1u64 << (2 * k) {
        k += 1;
    }
    k
}
