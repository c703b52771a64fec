//! Deterministic drifts built from a radial bump and the variational lower
//! bound they produce for `log Z_N`.
//!
//! For any drift `Theta`, `E[F(Y + Theta)] - (1/2) * cost(Theta)` bounds
//! `log E[e^{F(Y)}]` from below. With `F` the capped, truncated quartic and
//! `Theta = sqrt(gamma K_M) f_M` the gain grows like `lambda gamma^2 K_M^2 M^d`
//! while the cost grows like `gamma K_M M^d`.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{capped_potential, run_streams, Draw, EstimateRecord, FieldSetup};
use crate::spectral::{GridField, Lattice, SpectralField, WickVariance};
use crate::wick::{renormalized_mass, shifted_interaction};

/// Inner and outer radius of the bump's annulus.
const INNER: f64 = 0.25;
const OUTER: f64 = 1.0;
const NORM_TOLERANCE: f64 = 1e-8;

/// Radial bump `fhat(xi) = c * exp(-1/(1 - t^2))`, `t = (|xi| - 5/8) / (3/8)`,
/// supported in `1/4 < |xi| < 1` and normalized in `L^2(R^d, dxi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpProfile {
    pub d: usize,
    pub scale: f64,
    /// `|int |fhat|^2 dxi - 1|` measured by an independent quadrature.
    pub norm_error: f64,
}

fn shape(r: f64) -> f64 {
    let mid = 0.5 * (INNER + OUTER);
    let half = 0.5 * (OUTER - INNER);
    let t = (r - mid) / half;
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

fn sphere_area(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 4.0 * PI,
    }
}

impl BumpProfile {
    pub fn new(d: usize) -> Result<Self> {
        crate::spectral::mode_count(d, 0)?;
        let radial = |r: f64| r.powi(d as i32 - 1) * shape(r).powi(2);
        let mass = sphere_area(d) * adaptive_simpson(&radial, INNER, OUTER, 1e-15);
        let scale = mass.sqrt().recip();
        // Cross-check with a fixed composite rule on a fine mesh.
        let check = sphere_area(d) * scale * scale * composite_simpson(&radial, INNER, OUTER, 20_000);
        let norm_error = (check - 1.0).abs();
        if norm_error > NORM_TOLERANCE {
            return Err(Error::Config(format!("bump normalization off by {norm_error:e} in d = {d}")));
        }
        Ok(Self { d, scale, norm_error })
    }

    /// `fhat` at radius `|xi|`.
    pub fn radial(&self, r: f64) -> f64 {
        self.scale * shape(r)
    }

    /// `int |xi|^q |fhat(xi)|^2 dxi`, the continuum limit of lattice sums
    /// `M^{-d} sum |n/M|^q fhat(n/M)^2`.
    pub fn radial_moment(&self, q: f64) -> f64 {
        let d = self.d as f64;
        let f = |r: f64| r.powf(d - 1.0 + q) * self.radial(r).powi(2);
        sphere_area(self.d) * adaptive_simpson(&f, INNER, OUTER, 1e-15)
    }

    pub fn at(&self, xi: &[f64]) -> f64 {
        self.radial(xi.iter().map(|x| x * x).sum::<f64>().sqrt())
    }
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 40)
}

fn composite_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = 2 * panels;
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 }).sum();
    h / 3.0 * (f(a) + inner + f(b))
}

/// `f_M = M^{-d/2} sum_{|n| <= M} fhat(n / M) e_n`.
pub fn build_fm(profile: &BumpProfile, m: u32) -> Result<SpectralField> {
    if m < 4 {
        return Err(Error::ProfileScale(m));
    }
    let d = profile.d;
    let lattice = Arc::new(Lattice::new(d, m)?);
    let amp = (m as f64).powf(-(d as f64) / 2.0);
    Ok(SpectralField::from_fn(lattice, |_, norm2| {
        num_complex::Complex64::new(amp * profile.radial((norm2 as f64).sqrt() / m as f64), 0.0)
    }))
}

/// Integrals of `f_M` whose growth rates in `M` drive the witness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileIntegrals {
    /// `int f_M^2 dx`, tending to 1.
    pub m2: f64,
    /// `int f_M^4 dx`, of order `M^d`.
    pub m4: f64,
    /// `int (<nabla>^{-d/2} f_M)^2 dx`, of order `M^{-d}`.
    pub s2: f64,
}

pub fn profile_integrals(fm: &SpectralField) -> ProfileIntegrals {
    let d = fm.dim() as i32;
    let lattice = Arc::clone(fm.lattice());
    ProfileIntegrals {
        m2: fm.norm_sq(),
        m4: fm.to_default_grid().mean_of(|x| x * x * x * x),
        s2: fm.weighted_norm_sq(|i| lattice.bracket(i).powi(-d)),
    }
}

/// The drift `Theta = sqrt(gamma K_M) f_M` and its exact cost.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftProfile {
    pub m: u32,
    pub fm: SpectralField,
    pub gamma: f64,
    pub k_m: f64,
    /// `int_0^1 ||theta(t)||^2 dt = gamma K_M sum <n>^d |c_{f_M}(n)|^2`.
    pub theta_cost: f64,
}

impl DriftProfile {
    pub fn new(profile: &BumpProfile, m: u32, gamma: f64, k_m: f64) -> Result<Self> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::Config(format!("gamma must be finite and >= 0, got {gamma}")));
        }
        if !(k_m >= 0.0 && k_m.is_finite()) {
            return Err(Error::Config(format!("K_M must be finite and >= 0, got {k_m}")));
        }
        let fm = build_fm(profile, m)?;
        let d = profile.d as i32;
        let lattice = Arc::clone(fm.lattice());
        let energy = fm.weighted_norm_sq(|i| lattice.bracket(i).powi(d));
        Ok(Self { m, fm, gamma, k_m, theta_cost: gamma * k_m * energy })
    }

    pub fn amplitude(&self) -> f64 {
        (self.gamma * self.k_m).sqrt()
    }

    pub fn theta(&self) -> SpectralField {
        self.fm.scale(self.amplitude())
    }

    /// Deterministic value of the bound's integrand with the Gaussian part
    /// frozen at zero: `min(lambda (int Theta^4 - 6 sigma int Theta^2 + 3 sigma^2), L)
    /// * 1{|int Theta^2 - sigma| <= K} - cost / 2`.
    pub fn frozen_bound(&self, sigma: &WickVariance, lambda: f64, k: f64, cap: f64) -> f64 {
        let ints = profile_integrals(&self.fm);
        let gk = self.gamma * self.k_m;
        let s = sigma.sigma;
        let quartic = gk * gk * ints.m4 - 6.0 * s * gk * ints.m2 + 3.0 * s * s;
        let gain = if (gk * ints.m2 - s).abs() <= k { (lambda * quartic).min(cap) } else { 0.0 };
        gain - 0.5 * self.theta_cost
    }
}

pub fn drift_cost(profile: &DriftProfile) -> f64 {
    profile.theta_cost
}

/// Parameters of a witness run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessConfig {
    pub d: usize,
    #[serde(rename = "N")]
    pub cutoff: u32,
    /// Profile scale; defaults to `N`.
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    pub gamma: f64,
    pub lambda: f64,
    #[serde(rename = "K", with = "crate::config::extended_float")]
    pub k: f64,
    /// Drift amplitude cutoff; defaults to `K`.
    #[serde(rename = "K_M", default, skip_serializing_if = "Option::is_none")]
    pub k_m: Option<f64>,
    #[serde(rename = "L", with = "crate::config::extended_float")]
    pub cap: f64,
    pub nsamples: u64,
    /// Set from the run section, not from the estimator section.
    #[serde(skip)]
    pub master_seed: u64,
    #[serde(skip)]
    pub workers: usize,
}

impl WitnessConfig {
    pub fn scale(&self) -> u32 {
        self.m.unwrap_or(self.cutoff)
    }

    pub fn drift_cutoff(&self) -> f64 {
        self.k_m.unwrap_or(self.k)
    }

    pub fn validate(&self) -> Result<()> {
        crate::spectral::mode_count(self.d, self.cutoff)?;
        if self.scale() > self.cutoff {
            return Err(Error::Config(format!(
                "profile scale M = {} exceeds N = {}",
                self.scale(),
                self.cutoff
            )));
        }
        if self.nsamples < 2 {
            return Err(Error::Config(format!("nsamples must be at least 2, got {}", self.nsamples)));
        }
        if self.k.is_nan() || self.k <= 0.0 {
            return Err(Error::Config(format!("K must be positive or inf, got {}", self.k)));
        }
        if !self.cap.is_finite() {
            return Err(Error::Config("the witness needs a finite cap L".into()));
        }
        if !self.lambda.is_finite() {
            return Err(Error::Config(format!("lambda must be finite, got {}", self.lambda)));
        }
        if !self.drift_cutoff().is_finite() {
            return Err(Error::Config("K_M must be finite; set it when K = inf".into()));
        }
        Ok(())
    }
}

/// Per-cutoff state for evaluating functionals of `Y_N + Theta`.
#[derive(Debug, Clone)]
pub struct ShiftedSetup {
    pub field: FieldSetup,
    pub drift: DriftProfile,
    theta: SpectralField,
    theta_grid: GridField,
    theta_sq: f64,
}

/// Shifted observables of one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftedSample {
    /// `int :Y^2: dx`.
    pub mass: f64,
    /// `int :Y^2: + 2 int Y Theta + int Theta^2`.
    pub shifted_mass: f64,
}

impl ShiftedSetup {
    pub fn new(d: usize, cutoff: u32, drift: DriftProfile) -> Result<Self> {
        let field = FieldSetup::new(d, cutoff)?;
        let theta = drift.theta().extend_to(&field.lattice)?;
        let theta_grid = theta.to_grid(field.grid)?;
        let theta_sq = theta.norm_sq();
        Ok(Self { field, drift, theta, theta_grid, theta_sq })
    }

    pub fn masses(&self, y: &SpectralField) -> Result<ShiftedSample> {
        let mass = renormalized_mass(y, &self.field.sigma)?;
        Ok(ShiftedSample { mass, shifted_mass: mass + 2.0 * y.inner(&self.theta)? + self.theta_sq })
    }

    pub fn theta_grid(&self) -> &GridField {
        &self.theta_grid
    }

    /// `R_N(Y + Theta)` on the dealiased grid.
    pub fn shifted_interaction(&self, y: &SpectralField) -> Result<f64> {
        shifted_interaction(&y.to_grid(self.field.grid)?, &self.theta_grid, &self.field.sigma)
    }

    /// Exact `E[(int :(Y + Theta)^2: dx)^2]`.
    pub fn shifted_mass_second_moment(&self) -> f64 {
        let lattice = &self.field.lattice;
        let d = lattice.dim() as i32;
        let chaos: f64 = (0..lattice.len()).map(|i| 2.0 * lattice.bracket(i).powi(-2 * d)).sum();
        let cross = self.theta.weighted_norm_sq(|i| lattice.bracket(i).powi(-d));
        chaos + 4.0 * cross + self.theta_sq * self.theta_sq
    }
}

fn shifted_setup(config: &WitnessConfig) -> Result<ShiftedSetup> {
    config.validate()?;
    let profile = BumpProfile::new(config.d)?;
    let drift = DriftProfile::new(&profile, config.scale(), config.gamma, config.drift_cutoff())?;
    ShiftedSetup::new(config.d, config.cutoff, drift)
}

/// Monte Carlo `E[min(lambda R_N(Y + Theta), L) 1{|int :(Y + Theta)^2:| <= K}] - cost / 2`,
/// a lower bound on `log Z_N` with the same cutoff and cap.
pub fn witness_lower_bound(config: &WitnessConfig) -> Result<EstimateRecord> {
    let setup = shifted_setup(config)?;
    let half_cost = 0.5 * setup.drift.theta_cost;
    let acc = run_streams(config.nsamples, config.workers, |stream| {
        let y = setup.field.sample(config.master_seed, stream);
        let masses = setup.masses(&y)?;
        let hit = masses.shifted_mass.abs() <= config.k;
        let (gain, capped) = if hit {
            capped_potential(|| setup.shifted_interaction(&y), config.lambda, config.cap)?
        } else {
            (0.0, false)
        };
        Ok(Draw { value: gain - half_cost, indicator: hit, capped })
    })?;
    Ok(acc.record())
}

/// Empirical probability of the shifted event and the Chebyshev bound
/// `E[X^2] / K^2` on its complement.
pub fn shifted_event_probability(config: &WitnessConfig) -> Result<(EstimateRecord, f64)> {
    let setup = shifted_setup(config)?;
    let acc = run_streams(config.nsamples, config.workers, |stream| {
        let y = setup.field.sample(config.master_seed, stream);
        let hit = setup.masses(&y)?.shifted_mass.abs() <= config.k;
        Ok(Draw { value: hit as u8 as f64, indicator: hit, capped: false })
    })?;
    let chebyshev = setup.shifted_mass_second_moment() / (config.k * config.k);
    Ok((acc.record(), chebyshev))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::{estimate_capped_potential, MCConfig};
    use crate::spectral::sigma;

    fn witness() -> WitnessConfig {
        WitnessConfig {
            d: 2,
            cutoff: 8,
            m: None,
            gamma: 0.05,
            lambda: 0.3,
            k: 8f64.ln(),
            k_m: None,
            cap: 50.0,
            nsamples: 300,
            master_seed: 9,
            workers: 3,
        }
    }

    #[test]
    fn bump_support_and_normalization() {
        for d in 1..=3 {
            let p = BumpProfile::new(d).unwrap();
            assert!(p.norm_error < 1e-8);
            assert_eq!(p.radial(0.0), 0.0);
            assert_eq!(p.radial(0.25), 0.0);
            assert_eq!(p.radial(1.0), 0.0);
            assert!(p.radial(0.625) > 0.0);
            assert_eq!(p.at(&[0.3, -0.4][..d.min(2)]), p.at(&[-0.3, 0.4][..d.min(2)]));
        }
    }

    #[test]
    fn quadratures_agree_on_a_polynomial() {
        let f = |x: f64| 3.0 * x * x - x + 2.0;
        assert!((adaptive_simpson(&f, 0.0, 2.0, 1e-14) - 10.0).abs() < 1e-12);
        assert!((composite_simpson(&f, 0.0, 2.0, 10) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn fm_is_real_with_zero_mean() {
        let p = BumpProfile::new(2).unwrap();
        assert_eq!(build_fm(&p, 3), Err(Error::ProfileScale(3)));
        let fm = build_fm(&p, 16).unwrap();
        assert_eq!(fm.mean(), 0.0);
        assert!(fm.coeffs().iter().all(|c| c.im == 0.0));
        let grid = fm.to_default_grid();
        let back = grid.to_spectral(fm.lattice()).unwrap();
        let residue = back.coeffs().iter().map(|c| c.im.abs()).fold(0.0, f64::max);
        assert!(residue <= 1e-12);
    }

    #[test]
    fn profile_integrals_two_routes() {
        let p = BumpProfile::new(2).unwrap();
        let fm = build_fm(&p, 16).unwrap();
        let ints = profile_integrals(&fm);
        let grid = fm.to_default_grid();
        assert!((grid.mean_of(|x| x * x) - ints.m2).abs() <= 1e-10 * ints.m2);
        let smooth = fm.smooth(1.0).to_default_grid().mean_of(|x| x * x);
        assert!((smooth - ints.s2).abs() <= 1e-10 * ints.s2);
        assert!((ints.m2 - 1.0).abs() < 0.01);
    }

    #[test]
    fn cost_is_linear_in_gamma() {
        let p = BumpProfile::new(2).unwrap();
        let a = DriftProfile::new(&p, 16, 0.05, 3.0).unwrap();
        let b = DriftProfile::new(&p, 16, 0.1, 3.0).unwrap();
        assert_eq!(drift_cost(&b), 2.0 * drift_cost(&a));
        assert_eq!(drift_cost(&DriftProfile::new(&p, 16, 0.0, 3.0).unwrap()), 0.0);
        assert!(DriftProfile::new(&p, 16, -1.0, 3.0).is_err());
    }

    #[test]
    fn drift_integrals_two_routes() {
        let p = BumpProfile::new(2).unwrap();
        let drift = DriftProfile::new(&p, 8, 0.05, 2.0).unwrap();
        let setup = ShiftedSetup::new(2, 12, drift.clone()).unwrap();
        let theta = drift.theta();
        assert_eq!(theta.project(8), theta);
        let grid = theta.to_grid(setup.field.grid).unwrap();
        assert!((grid.mean_of(|x| x * x) - setup.theta_sq).abs() <= 1e-10 * setup.theta_sq);
        let ints = profile_integrals(&drift.fm);
        let gk = 0.05 * 2.0;
        assert!((grid.mean_of(|x| x.powi(4)) - gk * gk * ints.m4).abs() <= 1e-10 * gk * gk * ints.m4);
    }

    #[test]
    fn zero_drift_matches_capped_estimator() {
        let w = WitnessConfig { gamma: 0.0, ..witness() };
        let bound = witness_lower_bound(&w).unwrap();
        let plain = estimate_capped_potential(&MCConfig {
            d: w.d,
            cutoff: w.cutoff,
            lambda: w.lambda,
            k: w.k,
            cap: w.cap,
            p: 1.0,
            nsamples: w.nsamples,
            master_seed: w.master_seed,
            workers: 1,
        })
        .unwrap();
        assert_eq!(bound, plain);
    }

    #[test]
    fn frozen_field_closed_form() {
        let w = witness();
        let setup = shifted_setup(&w).unwrap();
        let zero = SpectralField::zeros(Arc::clone(&setup.field.lattice));
        let masses = setup.masses(&zero).unwrap();
        let hit = masses.shifted_mass.abs() <= w.k;
        let r = setup.shifted_interaction(&zero).unwrap();
        let direct = if hit { (w.lambda * r).min(w.cap) } else { 0.0 } - 0.5 * setup.drift.theta_cost;
        let closed = setup.drift.frozen_bound(&sigma(2, 8).unwrap(), w.lambda, w.k, w.cap);
        assert!((direct - closed).abs() <= 1e-10 * closed.abs().max(1.0));
    }

    #[test]
    fn event_probability_respects_chebyshev() {
        let (rec, cheb) = shifted_event_probability(&witness()).unwrap();
        assert!(rec.mean + 3.0 * rec.stderr >= 1.0 - cheb);
        let far = WitnessConfig { gamma: 0.0, k: 1e3, ..witness() };
        assert_eq!(shifted_event_probability(&far).unwrap().0.mean, 1.0);
    }

    #[test]
    fn witness_rejects_bad_configs() {
        assert!(witness_lower_bound(&WitnessConfig { cap: f64::INFINITY, ..witness() }).is_err());
        assert!(witness_lower_bound(&WitnessConfig { m: Some(16), ..witness() }).is_err());
        assert!(witness_lower_bound(&WitnessConfig { k: f64::INFINITY, ..witness() }).is_err());
    }
}
