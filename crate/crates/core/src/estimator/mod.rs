//! Monte Carlo estimation under the free-field law.
//!
//! Every sample is a pure function of `(master_seed, stream)`. Workers own
//! disjoint stream ranges and private [`Accumulator`]s whose sums are exact,
//! so the merged result does not depend on the worker count or on how the
//! streams were split.

mod exact;
mod suites;

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use exact::ExactSum;
pub use suites::{
    atom_check, cauchy_suite, hypercontractivity, orthogonality, second_moment, AtomReport, CauchyRow,
    HypercontractivityReport, MomentEstimate, OrthogonalityReport,
};

use crate::error::{Error, Result};
use crate::spectral::{dealiased_grid_size, sample_field, sigma, Lattice, SpectralField, WickVariance};
use crate::wick::{interaction_rn, renormalized_mass};

/// Two-sided 99% normal quantile used by every statistical gate.
pub const Z99: f64 = 2.576;

/// Share of the total above which the top 1% of weights marks a record unreliable.
const HEAVY_TAIL_SHARE: f64 = 0.5;

/// Qualitative warnings attached to an [`EstimateRecord`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flag {
    /// The top 1% of weights carry more than half of the sum.
    Unreliable,
    /// More than half of the samples hit the cap.
    CapSaturated,
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flag::Unreliable => "unreliable",
            Flag::CapSaturated => "cap-saturated",
        })
    }
}

/// One sample's contribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Draw {
    pub value: f64,
    pub indicator: bool,
    pub capped: bool,
}

/// Mergeable Monte Carlo state with exact first and second moments.
#[derive(Debug, Clone)]
pub struct Accumulator {
    n: u64,
    sum: ExactSum,
    sumsq: ExactSum,
    min: f64,
    max: f64,
    indicator_hits: u64,
    cap_hits: u64,
    /// Largest values seen, as bit patterns (order-preserving for non-negative floats).
    top: BinaryHeap<Reverse<u64>>,
    top_len: usize,
    nonnegative: bool,
}

impl Accumulator {
    /// `expected` sizes the top-1% register used by the heavy-tail guard.
    pub fn new(expected: u64) -> Self {
        Self {
            n: 0,
            sum: ExactSum::new(),
            sumsq: ExactSum::new(),
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            indicator_hits: 0,
            cap_hits: 0,
            top: BinaryHeap::new(),
            top_len: expected.div_ceil(100).max(1) as usize,
            nonnegative: true,
        }
    }

    pub fn push(&mut self, draw: Draw) {
        let x = draw.value;
        self.n += 1;
        self.sum.add(x);
        self.sumsq.add(x * x);
        self.min = self.min.min(x);
        self.max = self.max.max(x);
        self.indicator_hits += draw.indicator as u64;
        self.cap_hits += draw.capped as u64;
        if x < 0.0 {
            self.nonnegative = false;
            self.top.clear();
        }
        if self.nonnegative {
            self.offer(x.to_bits());
        }
    }

    fn offer(&mut self, bits: u64) {
        if self.top.len() < self.top_len {
            self.top.push(Reverse(bits));
        } else if self.top.peek().is_some_and(|Reverse(low)| bits > *low) {
            self.top.pop();
            self.top.push(Reverse(bits));
        }
    }

    /// Folds `other` in; the result is independent of merge order.
    pub fn merge(&mut self, other: &Accumulator) {
        self.n += other.n;
        self.sum.merge(&other.sum);
        self.sumsq.merge(&other.sumsq);
        self.min = self.min.min(other.min);
        self.max = self.max.max(other.max);
        self.indicator_hits += other.indicator_hits;
        self.cap_hits += other.cap_hits;
        self.top_len = self.top_len.max(other.top_len);
        self.nonnegative &= other.nonnegative;
        if self.nonnegative {
            for Reverse(bits) in other.top.iter() {
                self.offer(*bits);
            }
        } else {
            self.top.clear();
        }
    }

    pub fn len(&self) -> u64 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn record(&self) -> EstimateRecord {
        let n = self.n as f64;
        let sum = self.sum.value();
        let sumsq = self.sumsq.value();
        let mean = sum / n;
        let stderr =
            if self.n > 1 { ((sumsq / n - mean * mean).max(0.0) / (n - 1.0)).sqrt() } else { f64::NAN };
        let cap_hit_rate = self.cap_hits as f64 / n;
        let mut flags = Vec::new();
        if self.nonnegative && sum > 0.0 {
            let mut top = ExactSum::new();
            let keep = self.n.div_ceil(100) as usize;
            let mut bits: Vec<u64> = self.top.iter().map(|Reverse(b)| *b).collect();
            bits.sort_unstable_by(|a, b| b.cmp(a));
            bits.iter().take(keep).for_each(|&b| top.add(f64::from_bits(b)));
            if top.value() > HEAVY_TAIL_SHARE * sum {
                flags.push(Flag::Unreliable);
            }
        }
        if cap_hit_rate > 0.5 {
            flags.push(Flag::CapSaturated);
        }
        EstimateRecord {
            mean,
            stderr,
            n: self.n,
            sum,
            sumsq,
            min: self.min,
            max: self.max,
            indicator_hit_rate: self.indicator_hits as f64 / n,
            cap_hit_rate,
            flags,
        }
    }
}

/// Summary of a Monte Carlo run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub mean: f64,
    /// `sqrt((sumsq/n - mean^2) / (n - 1))`, clamped at zero inside the root.
    pub stderr: f64,
    pub n: u64,
    pub sum: f64,
    pub sumsq: f64,
    pub min: f64,
    pub max: f64,
    pub indicator_hit_rate: f64,
    pub cap_hit_rate: f64,
    pub flags: Vec<Flag>,
}

impl EstimateRecord {
    /// `(mean - z*stderr, mean + z*stderr)` at the 99% level.
    pub fn ci99(&self) -> (f64, f64) {
        (self.mean - Z99 * self.stderr, self.mean + Z99 * self.stderr)
    }

    pub fn overlaps(&self, other: &EstimateRecord) -> bool {
        let (a, b) = self.ci99();
        let (c, d) = other.ci99();
        a <= d && c <= b
    }

    pub fn has_flag(&self, flag: Flag) -> bool {
        self.flags.contains(&flag)
    }
}

pub(crate) fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))
}

/// Accepts a draw only if its square is finite, so the standard error exists.
/// The reported exponent is `ln |value|`, which for a density weight is `p * e`.
pub fn admit(stream: u64, draw: Draw) -> Result<Draw> {
    if (draw.value * draw.value).is_finite() {
        Ok(draw)
    } else {
        Err(Error::Overflow { stream, exponent: draw.value.abs().ln() })
    }
}

/// Runs `draw` on streams `0..nsamples` with `workers` threads (`0` = all cores).
///
/// Streams are split into contiguous ranges, each folded into a private
/// accumulator; ranges are merged in ascending order. On failure the error
/// of the lowest failing stream is returned.
pub fn run_streams<F>(nsamples: u64, workers: usize, draw: F) -> Result<Accumulator>
where
    F: Fn(u64) -> Result<Draw> + Sync,
{
    let pool = thread_pool(workers)?;
    let chunks = (pool.current_num_threads() as u64 * 4).clamp(1, nsamples.max(1));
    let size = nsamples.div_ceil(chunks).max(1);
    let parts: Vec<Result<Accumulator>> = pool.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut acc = Accumulator::new(nsamples);
                for stream in (c * size)..((c + 1) * size).min(nsamples) {
                    acc.push(admit(stream, draw(stream)?)?);
                }
                Ok(acc)
            })
            .collect()
    });
    let mut total = Accumulator::new(nsamples);
    for part in parts {
        total.merge(&part?);
    }
    Ok(total)
}

/// Evaluates `f` on streams `0..nsamples` in parallel, returning results in stream order.
pub fn collect_streams<T, F>(nsamples: u64, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    let pool = thread_pool(workers)?;
    let out: Vec<Result<T>> = pool.install(|| (0..nsamples).into_par_iter().map(&f).collect());
    out.into_iter().collect()
}

/// Parameters of one truncated partition-function estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MCConfig {
    pub d: usize,
    #[serde(rename = "N")]
    pub cutoff: u32,
    pub lambda: f64,
    /// Renormalized mass cutoff; `inf` disables the indicator.
    #[serde(rename = "K", with = "crate::config::extended_float")]
    pub k: f64,
    /// Cap on `lambda * R_N`; `inf` disables it.
    #[serde(rename = "L", with = "crate::config::extended_float")]
    pub cap: f64,
    pub p: f64,
    pub nsamples: u64,
    /// Set from the run section, not from the estimator section.
    #[serde(skip)]
    pub master_seed: u64,
    #[serde(skip)]
    pub workers: usize,
}

impl MCConfig {
    pub fn validate(&self) -> Result<()> {
        crate::spectral::mode_count(self.d, self.cutoff)?;
        let bad = |msg: String| Err(Error::Config(msg));
        if self.nsamples < 2 {
            return bad(format!("nsamples must be at least 2, got {}", self.nsamples));
        }
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return bad(format!("p must be a finite number >= 1, got {}", self.p));
        }
        if self.k.is_nan() || self.k <= 0.0 {
            return bad(format!("K must be positive or inf, got {}", self.k));
        }
        if self.cap.is_nan() {
            return bad("L must be a number or inf".into());
        }
        if !self.lambda.is_finite() {
            return bad(format!("lambda must be finite, got {}", self.lambda));
        }
        Ok(())
    }
}

/// Lattice, variance and grid shared by every sample at one cutoff.
#[derive(Debug, Clone)]
pub struct FieldSetup {
    pub lattice: Arc<Lattice>,
    pub sigma: WickVariance,
    pub grid: usize,
}

impl FieldSetup {
    pub fn new(d: usize, cutoff: u32) -> Result<Self> {
        Ok(Self {
            lattice: Arc::new(Lattice::new(d, cutoff)?),
            sigma: sigma(d, cutoff)?,
            grid: dealiased_grid_size(cutoff),
        })
    }

    pub fn sample(&self, master_seed: u64, stream: u64) -> SpectralField {
        sample_field(&self.lattice, master_seed, stream)
    }

    pub fn interaction(&self, field: &SpectralField) -> Result<f64> {
        interaction_rn(&field.to_grid(self.grid)?, &self.sigma)
    }
}

/// `|int :(pi_N u)^2: dx| <= K`; always true for `K = inf`.
pub fn event_indicator(field: &SpectralField, sigma: &WickVariance, k: f64) -> Result<bool> {
    Ok(renormalized_mass(field, sigma)?.abs() <= k)
}

/// `min(lambda * r, cap)` and whether the cap was binding. Zero coupling
/// short-circuits so the quartic never has to be evaluated.
pub fn capped_potential(r: impl FnOnce() -> Result<f64>, lambda: f64, cap: f64) -> Result<(f64, bool)> {
    if lambda == 0.0 {
        return Ok((0.0f64.min(cap), 0.0 > cap));
    }
    let x = lambda * r()?;
    Ok(if x > cap { (cap, true) } else { (x, false) })
}

/// `exp(p * e)`, refusing to overflow.
pub fn density_weight(e: f64, p: f64, stream: u64) -> Result<f64> {
    let exponent = p * e;
    let w = exponent.exp();
    if w.is_finite() {
        Ok(w)
    } else {
        Err(Error::Overflow { stream, exponent })
    }
}

/// Monte Carlo mean of `1_event * exp(p * min(lambda R_N, L))`.
pub fn estimate_z(config: &MCConfig) -> Result<EstimateRecord> {
    config.validate()?;
    let setup = FieldSetup::new(config.d, config.cutoff)?;
    let acc = run_streams(config.nsamples, config.workers, |stream| {
        let u = setup.sample(config.master_seed, stream);
        let mass = renormalized_mass(&u, &setup.sigma)?;
        if mass.abs() > config.k {
            return Ok(Draw { value: 0.0, indicator: false, capped: false });
        }
        let (e, capped) = capped_potential(|| setup.interaction(&u), config.lambda, config.cap)?;
        Ok(Draw { value: density_weight(e, config.p, stream)?, indicator: true, capped })
    })?;
    Ok(acc.record())
}

/// Monte Carlo mean of `1_event * min(lambda R_N, L)`, the integrand of the
/// variational bound at zero drift.
pub fn estimate_capped_potential(config: &MCConfig) -> Result<EstimateRecord> {
    config.validate()?;
    let setup = FieldSetup::new(config.d, config.cutoff)?;
    let acc = run_streams(config.nsamples, config.workers, |stream| {
        let u = setup.sample(config.master_seed, stream);
        let mass = renormalized_mass(&u, &setup.sigma)?;
        if mass.abs() > config.k {
            return Ok(Draw { value: 0.0, indicator: false, capped: false });
        }
        let (e, capped) = capped_potential(|| setup.interaction(&u), config.lambda, config.cap)?;
        Ok(Draw { value: e, indicator: true, capped })
    })?;
    Ok(acc.record())
}

/// Monte Carlo `E|G_N - G_M|^p` for the truncated densities
/// `G = 1_event exp(min(lambda R, L))` at cutoffs `N` and `M <= N` drawn from
/// the same streams. A convergence diagnostic, not a gate.
pub fn estimate_density_difference(config: &MCConfig, coarse: u32) -> Result<EstimateRecord> {
    config.validate()?;
    if coarse > config.cutoff {
        return Err(Error::CutoffTooLarge { requested: coarse, available: config.cutoff });
    }
    let fine = FieldSetup::new(config.d, config.cutoff)?;
    let low = FieldSetup::new(config.d, coarse)?;
    let density = |setup: &FieldSetup, u: &SpectralField, stream: u64| -> Result<f64> {
        if renormalized_mass(u, &setup.sigma)?.abs() > config.k {
            return Ok(0.0);
        }
        let (e, _) = capped_potential(|| setup.interaction(u), config.lambda, config.cap)?;
        density_weight(e, 1.0, stream)
    };
    let acc = run_streams(config.nsamples, config.workers, |stream| {
        let u = fine.sample(config.master_seed, stream);
        let v = low.sample(config.master_seed, stream);
        let gap = density(&fine, &u, stream)? - density(&low, &v, stream)?;
        Ok(Draw { value: gap.abs().powf(config.p), indicator: false, capped: false })
    })?;
    Ok(acc.record())
}
