//! Sweeps over coupling schedules `lambda(N) = c / (K(N) + log N)`.
//!
//! Each `(schedule, N)` cell samples the free field once; the observables
//! `int :Y^2:`, `R_N(Y)`, the shifted mass and `R_N(Y + Theta)` are then
//! reused for every `c`, so rows at different couplings share their random
//! numbers. Every per-sample formula is the one used by the standalone
//! estimators, which makes each scan cell bit-identical to the corresponding
//! [`estimate_z`](crate::estimator::estimate_z) or
//! [`witness_lower_bound`](crate::drift::witness_lower_bound) call.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::drift::{BumpProfile, DriftProfile, ShiftedSetup};
use crate::error::{Error, Result};
use crate::estimator::{
    admit, capped_potential, collect_streams, density_weight, Accumulator, Draw, EstimateRecord, Z99,
};
use crate::wick::{interaction_rn, shifted_interaction};

/// Growth of the renormalized mass cutoff `K(N)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CutoffSchedule {
    Constant {
        #[serde(rename = "K")]
        k: f64,
    },
    /// `K(N) = kappa * log N`.
    Log { kappa: f64 },
}

impl CutoffSchedule {
    pub fn k(&self, n: u32) -> f64 {
        match *self {
            CutoffSchedule::Constant { k } => k,
            CutoffSchedule::Log { kappa } => kappa * (n as f64).ln(),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            CutoffSchedule::Constant { k } => k > 0.0 && k.is_finite(),
            CutoffSchedule::Log { kappa } => kappa > 0.0 && kappa.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid cutoff schedule {self}")))
        }
    }
}

impl fmt::Display for CutoffSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            CutoffSchedule::Constant { k } => write!(f, "K={k}"),
            CutoffSchedule::Log { kappa: 1.0 } => write!(f, "K=log N"),
            CutoffSchedule::Log { kappa } => write!(f, "K={kappa}*log N"),
        }
    }
}

/// A cutoff schedule paired with a coupling scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub cutoff: CutoffSchedule,
    pub c: f64,
}

impl Schedule {
    pub fn k(&self, n: u32) -> f64 {
        self.cutoff.k(n)
    }

    /// `lambda(N) = c / (K(N) + log N)`.
    pub fn lambda(&self, n: u32) -> f64 {
        self.c / (self.k(n) + (n as f64).ln())
    }
}

/// Parameters of a sweep; the grid is `schedules x c x N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub d: usize,
    #[serde(rename = "N")]
    pub cutoffs: Vec<u32>,
    pub c: Vec<f64>,
    pub schedules: Vec<CutoffSchedule>,
    pub gamma: f64,
    /// Cap `L(N) = lambda gamma^2 K^2 N^d * margin`.
    pub margin: f64,
    pub nsamples: u64,
    #[serde(skip)]
    pub master_seed: u64,
    #[serde(skip)]
    pub workers: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            d: 2,
            cutoffs: vec![8, 16, 32],
            c: vec![0.0, 0.1, 1.0, 4.0, 10.0, 40.0],
            schedules: vec![CutoffSchedule::Log { kappa: 1.0 }, CutoffSchedule::Constant { k: 10.0 }],
            gamma: 0.05,
            margin: 10.0,
            nsamples: 10_000,
            master_seed: 0,
            workers: 0,
        }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        crate::spectral::mode_count(self.d, 0)?;
        if self.cutoffs.is_empty() || self.c.is_empty() || self.schedules.is_empty() {
            return bad("N, c and schedules must be non-empty");
        }
        if self.cutoffs.windows(2).any(|w| w[0] >= w[1]) {
            return bad("N values must be strictly increasing");
        }
        if self.cutoffs[0] < 4 {
            return bad("N values must be at least 4 (the drift profile needs M = N >= 4)");
        }
        if self.c.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return bad("c values must be finite and >= 0");
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return bad("gamma must be finite and >= 0");
        }
        if !(self.margin > 0.0 && self.margin.is_finite()) {
            return bad("margin must be finite and > 0");
        }
        if self.nsamples < 2 {
            return bad("nsamples must be at least 2");
        }
        self.schedules.iter().try_for_each(CutoffSchedule::validate)
    }

    /// The cap rule `L(N)`.
    pub fn cap(&self, schedule: &Schedule, n: u32) -> f64 {
        let k = schedule.k(n);
        schedule.lambda(n) * self.gamma * self.gamma * k * k * (n as f64).powi(self.d as i32) * self.margin
    }
}

/// One `(schedule, c, N)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub schedule: CutoffSchedule,
    pub c: f64,
    #[serde(rename = "N")]
    pub n: u32,
    #[serde(rename = "K")]
    pub k: f64,
    pub lambda: f64,
    #[serde(rename = "L")]
    pub cap: f64,
    /// `E[1_event exp(min(lambda R_N, L))]`; `None` when the estimate failed.
    pub z1: Option<EstimateRecord>,
    /// `E[1_event exp(2 min(lambda R_N, L))]`.
    pub z2: Option<EstimateRecord>,
    pub witness: Option<EstimateRecord>,
    /// `P(|int :u_N^2: dx| <= K)`.
    pub event_prob: f64,
    /// Share of samples whose shifted quartic hit the cap.
    pub cap_hit_rate: f64,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
struct Observation {
    mass: f64,
    quartic: f64,
    shifted_mass: f64,
    shifted_quartic: f64,
}

fn observe(
    config: &ScanConfig,
    cutoff: CutoffSchedule,
    n: u32,
    profile: &BumpProfile,
) -> Result<(Vec<Observation>, f64)> {
    let drift = DriftProfile::new(profile, n, config.gamma, cutoff.k(n))?;
    let setup = ShiftedSetup::new(config.d, n, drift)?;
    let theta_grid = setup.theta_grid();
    let obs = collect_streams(config.nsamples, config.workers, |stream| {
        let y = setup.field.sample(config.master_seed, stream);
        let masses = setup.masses(&y)?;
        let grid = y.to_grid(setup.field.grid)?;
        Ok(Observation {
            mass: masses.mass,
            quartic: interaction_rn(&grid, &setup.field.sigma)?,
            shifted_mass: masses.shifted_mass,
            shifted_quartic: shifted_interaction(&grid, theta_grid, &setup.field.sigma)?,
        })
    })?;
    Ok((obs, setup.drift.theta_cost))
}

fn fold(obs: &[Observation], draw: impl Fn(u64, &Observation) -> Result<Draw>) -> Result<EstimateRecord> {
    let mut acc = Accumulator::new(obs.len() as u64);
    for (stream, o) in obs.iter().enumerate() {
        acc.push(admit(stream as u64, draw(stream as u64, o)?)?);
    }
    Ok(acc.record())
}

fn density(obs: &[Observation], k: f64, lambda: f64, cap: f64, p: f64) -> Result<EstimateRecord> {
    fold(obs, |stream, o| {
        if o.mass.abs() > k {
            return Ok(Draw { value: 0.0, indicator: false, capped: false });
        }
        let (e, capped) = capped_potential(|| Ok(o.quartic), lambda, cap)?;
        Ok(Draw { value: density_weight(e, p, stream)?, indicator: true, capped })
    })
}

fn witness(obs: &[Observation], k: f64, lambda: f64, cap: f64, half_cost: f64) -> Result<EstimateRecord> {
    fold(obs, |_, o| {
        let hit = o.shifted_mass.abs() <= k;
        let (gain, capped) =
            if hit { capped_potential(|| Ok(o.shifted_quartic), lambda, cap)? } else { (0.0, false) };
        Ok(Draw { value: gain - half_cost, indicator: hit, capped })
    })
}

fn note(flags: &mut Vec<String>, what: &str, result: Result<EstimateRecord>) -> Option<EstimateRecord> {
    match result {
        Ok(rec) => {
            flags.extend(rec.flags.iter().map(|f| format!("{what}:{f}")));
            Some(rec)
        }
        Err(Error::Overflow { .. }) => {
            flags.push(format!("{what}:overflow"));
            None
        }
        Err(e) => {
            flags.push(format!("{what}:failed({e})"));
            None
        }
    }
}

/// Runs the full grid; rows are ordered by schedule, then `c`, then `N`.
pub fn run_scan(config: &ScanConfig) -> Result<Vec<ScanRow>> {
    config.validate()?;
    let profile = BumpProfile::new(config.d)?;
    let mut cs = config.c.clone();
    cs.sort_by(f64::total_cmp);
    let mut rows = Vec::new();
    for &cutoff in &config.schedules {
        let mut cells = Vec::new();
        for &n in &config.cutoffs {
            log::info!("scan cell {cutoff}, N = {n}");
            cells.push((n, observe(config, cutoff, n, &profile)?));
        }
        for &c in &cs {
            let schedule = Schedule { cutoff, c };
            for (n, (obs, cost)) in &cells {
                let n = *n;
                let (k, lambda, cap) = (schedule.k(n), schedule.lambda(n), config.cap(&schedule, n));
                let mut flags = Vec::new();
                let z1 = note(&mut flags, "z1", density(obs, k, lambda, cap, 1.0));
                let z2 = note(&mut flags, "z2", density(obs, k, lambda, cap, 2.0));
                let w = note(&mut flags, "witness", witness(obs, k, lambda, cap, 0.5 * cost));
                let hits = obs.iter().filter(|o| o.mass.abs() <= k).count();
                rows.push(ScanRow {
                    schedule: cutoff,
                    c,
                    n,
                    k,
                    lambda,
                    cap,
                    z1,
                    z2,
                    event_prob: hits as f64 / obs.len() as f64,
                    cap_hit_rate: w.as_ref().map_or(f64::NAN, |r| r.cap_hit_rate),
                    witness: w,
                    flags,
                });
            }
        }
    }
    Ok(rows)
}

/// Heuristic regime label for one `(schedule, c)` column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    WeakLike,
    StrongLike,
    Inconclusive,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::WeakLike => "weak-like",
            Regime::StrongLike => "strong-like",
            Regime::Inconclusive => "inconclusive",
        })
    }
}

/// Pooled-stderr multiple a witness must rise by to count as divergence.
pub const STRONG_RISE: f64 = 5.0;

fn pooled(a: &EstimateRecord, b: &EstimateRecord) -> f64 {
    (a.stderr * a.stderr + b.stderr * b.stderr).sqrt()
}

/// Witness strictly increasing in `N` with total rise above [`STRONG_RISE`] pooled stderrs.
pub fn witness_rises(rows: &[ScanRow]) -> bool {
    let Some(w) = rows.iter().map(|r| r.witness.as_ref()).collect::<Option<Vec<_>>>() else {
        return false;
    };
    let (first, last) = (w[0], w[w.len() - 1]);
    w.windows(2).all(|p| p[1].mean > p[0].mean) && last.mean - first.mean > STRONG_RISE * pooled(first, last)
}

/// Every pair of `Z_2` estimates has overlapping 99% intervals.
pub fn z2_bounded(rows: &[ScanRow]) -> bool {
    let Some(z) = rows.iter().map(|r| r.z2.as_ref()).collect::<Option<Vec<_>>>() else {
        return false;
    };
    z.iter().enumerate().all(|(i, a)| z[i + 1..].iter().all(|b| a.overlaps(b)))
}

/// Some later witness exceeds an earlier one by more than the 99% pooled margin.
fn witness_moves_up(rows: &[ScanRow]) -> bool {
    let w: Vec<&EstimateRecord> = rows.iter().filter_map(|r| r.witness.as_ref()).collect();
    w.iter().enumerate().any(|(i, a)| w[i + 1..].iter().any(|b| b.mean - a.mean > Z99 * pooled(a, b)))
}

/// Labels one column; rows are sorted by `N` internally.
pub fn classify(rows: &[ScanRow]) -> Result<Regime> {
    if rows.len() < 3 {
        return Err(Error::InsufficientRows { required: 3, got: rows.len() });
    }
    let mut sorted = rows.to_vec();
    sorted.sort_by_key(|r| r.n);
    Ok(if witness_rises(&sorted) {
        Regime::StrongLike
    } else if z2_bounded(&sorted) && !witness_moves_up(&sorted) {
        Regime::WeakLike
    } else {
        Regime::Inconclusive
    })
}

/// Interval of `c` containing the weak-to-strong crossover.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    /// Largest weak-like `c` below `upper`.
    pub lower: Option<f64>,
    /// Smallest strong-like `c`.
    pub upper: Option<f64>,
}

pub fn crossover(labels: &[(f64, Regime)]) -> Bracket {
    let upper =
        labels.iter().filter(|(_, r)| *r == Regime::StrongLike).map(|(c, _)| *c).min_by(f64::total_cmp);
    let lower = labels
        .iter()
        .filter(|(c, r)| *r == Regime::WeakLike && upper.is_none_or(|u| *c < u))
        .map(|(c, _)| *c)
        .max_by(f64::total_cmp);
    Bracket { lower, upper }
}

/// Label of one `(schedule, c)` column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnLabel {
    pub schedule: CutoffSchedule,
    pub c: f64,
    pub label: Regime,
}

/// Crossover bracket of each schedule.
pub type Brackets = Vec<(CutoffSchedule, Bracket)>;

/// Classifies every column and brackets the crossover per schedule.
pub fn summarize(rows: &[ScanRow]) -> Result<(Vec<ColumnLabel>, Brackets)> {
    let mut labels: Vec<ColumnLabel> = Vec::new();
    for row in rows {
        if labels.iter().any(|l| l.schedule == row.schedule && l.c == row.c) {
            continue;
        }
        let column: Vec<ScanRow> =
            rows.iter().filter(|r| r.schedule == row.schedule && r.c == row.c).cloned().collect();
        labels.push(ColumnLabel { schedule: row.schedule, c: row.c, label: classify(&column)? });
    }
    let mut brackets: Vec<(CutoffSchedule, Bracket)> = Vec::new();
    for l in &labels {
        if brackets.iter().any(|(s, _)| *s == l.schedule) {
            continue;
        }
        let column: Vec<(f64, Regime)> =
            labels.iter().filter(|m| m.schedule == l.schedule).map(|m| (m.c, m.label)).collect();
        brackets.push((l.schedule, crossover(&column)));
    }
    Ok((labels, brackets))
}
