//! Named verification suites with pass/fail tables.
//!
//! Each suite compares measured values with exact or analytic targets at a
//! stated tolerance. Statistical targets use standard-error gates; the
//! sample sizes below are part of each suite's definition.

use std::fmt::Write as _;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::drift::{build_fm, profile_integrals, BumpProfile, DriftProfile};
use crate::error::{Error, Result};
use crate::estimator::{
    atom_check, cauchy_suite, collect_streams, hypercontractivity, orthogonality, second_moment, FieldSetup,
    MomentEstimate, Z99,
};
use crate::output::format_g;
use crate::rng::stream_rng;
use crate::spectral::{sample_field, sigma, Lattice, SpectralField};
use crate::wick::{
    chaos_diagnostics, chaos_second_moment, hermite, hermite_shifted, interaction_cross_moment,
    interaction_difference_moment, interaction_rn, renormalized_mass, renormalized_mass_grid, wick_square,
    FrequencyWindow,
};

pub const SUITES: [&str; 9] = [
    "hermite",
    "orthogonality",
    "chaos-moments",
    "quadrature",
    "cauchy",
    "hypercontractivity",
    "atoms",
    "fm-asymptotics",
    "diagnostics",
];

/// Samples per statistical check unless a suite says otherwise.
pub const SUITE_SAMPLES: u64 = 100_000;
/// Samples per cutoff for the dyadic diagnostics.
pub const DIAGNOSTIC_SAMPLES: u64 = 10_000;

/// One measured-versus-expected line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// `|measured - expected| <= tolerance`.
    pub fn absolute(name: impl Into<String>, measured: f64, expected: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            expected,
            tolerance,
            pass: (measured - expected).abs() <= tolerance,
        }
    }

    /// `|measured - expected| <= rel * |expected|`.
    pub fn relative(name: impl Into<String>, measured: f64, expected: f64, rel: f64) -> Self {
        Self::absolute(name, measured, expected, rel * expected.abs())
    }

    /// Mean within `k` standard errors of `expected`.
    pub fn within_se(name: impl Into<String>, est: &MomentEstimate, expected: f64, k: f64) -> Self {
        Self::absolute(name, est.mean, expected, k * est.stderr)
    }

    /// `measured <= bound + slack`.
    pub fn at_most(name: impl Into<String>, measured: f64, bound: f64, slack: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            expected: bound,
            tolerance: slack,
            pass: measured <= bound + slack,
        }
    }

    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self { name: name.into(), measured: ok as u8 as f64, expected: 1.0, tolerance: 0.0, pass: ok }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn render(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(5).max(5);
        let mut s = format!(
            "suite {}\n{:<width$}  {:>14}  {:>14}  {:>12}  result\n",
            self.suite, "check", "measured", "expected", "tolerance"
        );
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{:<width$}  {:>14}  {:>14}  {:>12}  {}",
                c.name,
                format_g(c.measured, 8),
                format_g(c.expected, 8),
                format_g(c.tolerance, 3),
                if c.pass { "PASS" } else { "FAIL" }
            );
        }
        let _ = writeln!(s, "{}", if self.passed() { "all checks passed" } else { "some checks FAILED" });
        s
    }
}

/// Runs the suite called `name`.
pub fn run_suite(name: &str, seed: u64, workers: usize) -> Result<SuiteReport> {
    let checks = match name {
        "hermite" => hermite_suite(seed)?,
        "orthogonality" => orthogonality_suite(seed, workers)?,
        "chaos-moments" => chaos_moment_suite(seed, workers)?,
        "quadrature" => quadrature_suite(seed)?,
        "cauchy" => cauchy_checks(seed, workers)?,
        "hypercontractivity" => hypercontractivity_suite(seed, workers)?,
        "atoms" => atom_suite(seed, workers)?,
        "fm-asymptotics" => fm_suite()?,
        "diagnostics" => diagnostics_suite(seed, workers)?,
        other => {
            return Err(Error::Config(format!(
                "unknown suite '{other}'; available suites: {}",
                SUITES.join(", ")
            )))
        }
    };
    Ok(SuiteReport { suite: name.to_string(), checks })
}

fn hermite_suite(seed: u64) -> Result<Vec<Check>> {
    let mut checks = vec![
        Check::absolute("H_0(1.3; 0.7)", hermite(0, 1.3, 0.7)?, 1.0, 0.0),
        Check::absolute("H_2(3; 2)", hermite(2, 3.0, 2.0)?, 7.0, 0.0),
        Check::absolute("H_3(2; 1)", hermite(3, 2.0, 1.0)?, 2.0, 0.0),
        Check::absolute("H_4(2; 1)", hermite(4, 2.0, 1.0)?, -5.0, 0.0),
    ];

    let mut rng = stream_rng(seed, 0);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let y: f64 = rng.random_range(-5.0..5.0);
        let t: f64 = rng.random_range(-5.0..5.0);
        let s: f64 = rng.random_range(0.0..10.0);
        let lhs = hermite(4, y + t, s)?;
        let rhs = hermite_shifted(4, y, t, s)?;
        let scale = (y.abs() + t.abs() + s.sqrt() + 1.0).powi(4);
        worst = worst.max((lhs - rhs).abs() / scale);
    }
    checks.push(Check::at_most("shift identity, 1000 triples (rel)", worst, 1e-12, 0.0));

    let lattice = Arc::new(Lattice::new(2, 10)?);
    let u = sample_field(&lattice, seed, 1);
    let nested = u.project(7).project(4);
    checks.push(Check::holds("nested projections", nested == u.project(4)));
    let mut tiled = SpectralField::zeros(Arc::clone(&lattice));
    for j in 1..=3 {
        tiled = tiled.add(&u.dyadic_block(j)?)?;
    }
    let gap =
        tiled.coeffs().iter().zip(u.project(8).coeffs()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    checks.push(Check::absolute("dyadic blocks 1..3 tile pi_8", gap, 0.0, 0.0));

    let v = sample_field(&lattice, seed, 2);
    let g = crate::spectral::dealiased_grid_size(10);
    let grid = u.to_grid(g)?.mean_with(&v.to_grid(g)?, |a, b| a * b)?;
    checks.push(Check::relative("Parseval grid vs coefficients", grid, u.inner(&v)?, 1e-10));
    let s = sigma(2, 10)?;
    checks.push(Check::relative(
        "Wick square grid vs coefficients",
        renormalized_mass_grid(&u.to_grid(g)?, &s)?,
        renormalized_mass(&u, &s)?,
        1e-10,
    ));
    Ok(checks)
}

fn orthogonality_suite(seed: u64, workers: usize) -> Result<Vec<Check>> {
    let r = orthogonality(2, 4, &[0.0, 0.0], &[0.7, 1.9], SUITE_SAMPLES, seed, workers)?;
    let same = orthogonality(2, 4, &[0.4, 0.4], &[0.4, 0.4], SUITE_SAMPLES, seed ^ 1, workers)?;
    Ok(vec![
        Check::within_se("E[H2(u(x)) H3(u(y))] = 0", &r.cross_degree, 0.0, 4.0),
        Check::within_se("E[H2(u(x)) H2(u(y))] = 2 C^2", &r.same_degree, r.same_degree_expected, 4.0),
        Check::within_se("E[H2(u(x)) H3(u(x))] = 0", &same.cross_degree, 0.0, 4.0),
        Check::within_se("E[H2(u(x))^2] = 2 sigma^2", &same.same_degree, same.same_degree_expected, 4.0),
    ])
}

fn chaos_moment_suite(seed: u64, workers: usize) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for (d, n) in [(1, 1), (1, 4), (2, 4)] {
        let setup = FieldSetup::new(d, n)?;
        let est = second_moment(SUITE_SAMPLES, workers, |s| {
            renormalized_mass(&setup.sample(seed, s), &setup.sigma)
        })?;
        let exact = chaos_second_moment(d, FrequencyWindow::Ball(n), 0.0)?;
        checks.push(Check::within_se(format!("Var int :u^2: (d={d}, N={n})"), &est, exact, 3.0));
    }
    let setup = FieldSetup::new(1, 1)?;
    let est = second_moment(SUITE_SAMPLES, workers, |s| setup.interaction(&setup.sample(seed, s)))?;
    checks.push(Check::within_se("Var R_1 (d=1)", &est, interaction_cross_moment(1, 1, 1)?, 3.0));

    let setup = FieldSetup::new(2, 8)?;
    let window = FrequencyWindow::block(2)?;
    let est =
        second_moment(SUITE_SAMPLES, workers, |s| Ok(wick_square(&setup.sample(seed, s), window, 0.5)))?;
    let exact = chaos_second_moment(2, window, 0.5)?;
    checks.push(Check::within_se("Var int :(<D>^-1/2 Pi_2 u)^2: (d=2)", &est, exact, 3.0));
    Ok(checks)
}

/// `int u^4 dx = sum_{n1+n2+n3+n4=0} c(n1) c(n2) c(n3) c(n4)` by direct enumeration.
pub fn quartic_convolution(field: &SpectralField) -> f64 {
    let lattice = field.lattice();
    let d = lattice.dim();
    let c = field.coeffs();
    let mut total = num_complex::Complex64::new(0.0, 0.0);
    for a in 0..lattice.len() {
        for b in 0..lattice.len() {
            for e in 0..lattice.len() {
                let last: Vec<i32> =
                    (0..d).map(|i| -(lattice.mode(a)[i] + lattice.mode(b)[i] + lattice.mode(e)[i])).collect();
                if let Some(f) = lattice.index_of(&last) {
                    total += c[a] * c[b] * c[e] * c[f];
                }
            }
        }
    }
    total.re
}

fn quadrature_suite(seed: u64) -> Result<Vec<Check>> {
    let mut worst_quartic = 0.0f64;
    let mut worst_wick = 0.0f64;
    for n in 1..=4u32 {
        let lattice = Arc::new(Lattice::new(1, n)?);
        let s = sigma(1, n)?;
        for stream in 0..8 {
            let u = sample_field(&lattice, seed, stream);
            let grid = u.to_grid(crate::spectral::dealiased_grid_size(n))?;
            let direct = quartic_convolution(&u);
            worst_quartic = worst_quartic.max((grid.mean_of(|x| x.powi(4)) - direct).abs() / direct.abs());
            let wick = direct - 6.0 * s.sigma * u.norm_sq() + 3.0 * s.sigma * s.sigma;
            let r = interaction_rn(&grid, &s)?;
            worst_wick = worst_wick.max((r - wick).abs() / wick.abs().max(1.0));
        }
    }
    Ok(vec![
        Check::at_most("grid mean of u^4 vs convolution sum (rel)", worst_quartic, 1e-10, 0.0),
        Check::at_most("R_N vs convolution Wick expansion (rel)", worst_wick, 1e-10, 0.0),
    ])
}

fn cauchy_checks(seed: u64, workers: usize) -> Result<Vec<Check>> {
    let rows = cauchy_suite(1, &[1, 2, 4], SUITE_SAMPLES, seed, workers)?;
    let mut checks: Vec<Check> = rows
        .iter()
        .map(|r| Check::within_se(format!("E[(R_{} - R_{})^2]", r.fine, r.coarse), &r.mc, r.analytic, 3.0))
        .collect();
    checks.push(Check::holds("analytic differences positive", rows.iter().all(|r| r.analytic > 0.0)));
    checks.push(Check::holds(
        "analytic differences decreasing",
        rows.windows(2).all(|w| w[1].analytic < w[0].analytic),
    ));
    let fixed: Vec<f64> = (1..=3).map(|m| interaction_difference_moment(1, 4, m)).collect::<Result<_>>()?;
    checks.push(Check::holds(
        "E[(R_4 - R_M)^2] decreasing in M = 1, 2, 3",
        fixed.windows(2).all(|w| w[1] < w[0]),
    ));
    checks.push(Check::absolute("E[(R_4 - R_4)^2]", interaction_difference_moment(1, 4, 4)?, 0.0, 0.0));
    Ok(checks)
}

fn hypercontractivity_suite(seed: u64, workers: usize) -> Result<Vec<Check>> {
    [(1, 16), (2, 8)]
        .into_iter()
        .map(|(d, n)| {
            let r = hypercontractivity(d, n, SUITE_SAMPLES, seed, workers)?;
            Ok(Check::at_most(
                format!("||X||_4 / ||X||_2, X = int :u^2: (d={d}, N={n})"),
                r.ratio,
                r.bound,
                Z99 * r.stderr,
            ))
        })
        .collect()
}

fn atom_suite(seed: u64, workers: usize) -> Result<Vec<Check>> {
    let n = SUITE_SAMPLES;
    let r = atom_check(2, 16, 0.0, n, seed, workers)?;
    let degenerate = atom_check(1, 0, 0.0, n, seed, workers)?;
    Ok(vec![
        Check::at_most("CDF jump at K = 0 (d=2, N=16)", r.jump_at_probe, 1e-4, 0.0),
        Check::at_most("largest CDF jump (d=2, N=16)", r.max_jump, 10.0 / n as f64, 0.0),
        Check::at_most("largest CDF jump (N=0)", degenerate.max_jump, 10.0 / n as f64, 0.0),
    ])
}

/// Relative spread `max/min - 1` of a positive sequence.
pub fn spread(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
    max / min - 1.0
}

/// Scales used by the profile-asymptotics checks.
pub const PROFILE_SCALES: [u32; 3] = [16, 32, 64];
/// Half-width of the window around a continuum limit, relative.
pub const PROFILE_WINDOW: f64 = 0.1;

fn fm_suite() -> Result<Vec<Check>> {
    let d = 2;
    let profile = BumpProfile::new(d)?;
    let md = |m: u32| (m as f64).powi(d as i32);
    let mut checks = Vec::new();
    let mut m4 = Vec::new();
    let mut s2 = Vec::new();
    let mut cost = Vec::new();
    let (gamma, k_m) = (0.05, 3.0);
    for m in PROFILE_SCALES {
        let ints = profile_integrals(&build_fm(&profile, m)?);
        checks.push(Check::absolute(format!("int f_M^2 (M={m})"), ints.m2, 1.0, 0.01));
        m4.push(ints.m4 / md(m));
        s2.push(ints.s2 * md(m));
        let drift = DriftProfile::new(&profile, m, gamma, k_m)?;
        cost.push(drift.theta_cost / (gamma * k_m * md(m)));
    }
    checks.push(Check::at_most("spread of m4 / M^d", spread(&m4), 0.1, 0.0));
    let s2_limit = profile.radial_moment(-(d as f64));
    let cost_limit = profile.radial_moment(d as f64);
    for (i, m) in PROFILE_SCALES.iter().enumerate() {
        checks.push(Check::relative(format!("s2 * M^d (M={m})"), s2[i], s2_limit, PROFILE_WINDOW));
        checks.push(Check::relative(
            format!("theta_cost / (gamma K_M M^d) (M={m})"),
            cost[i],
            cost_limit,
            PROFILE_WINDOW,
        ));
    }
    Ok(checks)
}

/// Cutoffs for the dyadic diagnostics.
pub const DIAGNOSTIC_CUTOFFS: [u32; 4] = [8, 16, 32, 64];

/// Sample means of `B_1` and `B_2` at one cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagnosticMeans {
    pub cutoff: u32,
    pub b1: MomentEstimate,
    pub b2: MomentEstimate,
}

pub fn diagnostic_means(
    d: usize,
    cutoffs: &[u32],
    nsamples: u64,
    seed: u64,
    workers: usize,
) -> Result<Vec<DiagnosticMeans>> {
    cutoffs
        .iter()
        .map(|&n| {
            let lattice = Arc::new(Lattice::new(d, n)?);
            let pairs = collect_streams(nsamples, workers, |s| {
                let diag = chaos_diagnostics(&sample_field(&lattice, seed, s));
                Ok((diag.b1, diag.b2))
            })?;
            let (b1, b2): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            Ok(DiagnosticMeans {
                cutoff: n,
                b1: MomentEstimate::from_values(&b1),
                b2: MomentEstimate::from_values(&b2),
            })
        })
        .collect()
}

/// Largest rise `mean_j - mean_i` (`i < j`) in units of the pooled 99% margin.
pub fn largest_rise(means: &[MomentEstimate]) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for (i, a) in means.iter().enumerate() {
        for b in &means[i + 1..] {
            let margin = Z99 * (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
            worst = worst.max((b.mean - a.mean) / margin);
        }
    }
    worst
}

fn diagnostics_suite(seed: u64, workers: usize) -> Result<Vec<Check>> {
    let rows = diagnostic_means(2, &DIAGNOSTIC_CUTOFFS, DIAGNOSTIC_SAMPLES, seed, workers)?;
    let b1: Vec<MomentEstimate> = rows.iter().map(|r| r.b1).collect();
    let b2: Vec<MomentEstimate> = rows.iter().map(|r| r.b2).collect();
    let mut checks: Vec<Check> = rows
        .iter()
        .flat_map(|r| {
            [
                Check::holds(
                    format!("E[B1] finite (N={}) = {}", r.cutoff, format_g(r.b1.mean, 5)),
                    r.b1.mean.is_finite(),
                ),
                Check::holds(
                    format!("E[B2] finite (N={}) = {}", r.cutoff, format_g(r.b2.mean, 5)),
                    r.b2.mean.is_finite(),
                ),
            ]
        })
        .collect();
    checks.push(Check::at_most("E[B1] largest rise / 99% margin", largest_rise(&b1), 1.0, 0.0));
    checks.push(Check::at_most("E[B2] largest rise / 99% margin", largest_rise(&b2), 1.0, 0.0));
    Ok(checks)
}
