//! Statistical checks of free-field facts: absence of atoms, Cauchy
//! convergence of the quartic, hypercontractivity and chaos orthogonality.

use serde::{Deserialize, Serialize};

use super::{collect_streams, FieldSetup};
use crate::error::{Error, Result};
use crate::spectral::Lattice;
use crate::wick::{hermite, interaction_difference_moment, renormalized_mass};

/// Sample mean and standard error of a per-stream observable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
}

impl MomentEstimate {
    pub fn from_values(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Self { mean, stderr: (var / n).sqrt(), n: xs.len() as u64 }
    }

    /// `|mean - target|` in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.mean - target).abs() / self.stderr
    }
}

/// Monte Carlo estimate of `E[X^2]` for `X = f(stream)`.
pub fn second_moment<F>(nsamples: u64, workers: usize, f: F) -> Result<MomentEstimate>
where
    F: Fn(u64) -> Result<f64> + Sync,
{
    let xs = collect_streams(nsamples, workers, |s| f(s).map(|x| x * x))?;
    Ok(MomentEstimate::from_values(&xs))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomReport {
    pub nsamples: u64,
    pub distinct: u64,
    /// Empirical CDF jump at the sampled value nearest the probe.
    pub jump_at_probe: f64,
    /// Largest empirical CDF jump anywhere.
    pub max_jump: f64,
}

/// Empirical CDF jumps of `int :u_N^2: dx` around `probe`.
pub fn atom_check(
    d: usize,
    cutoff: u32,
    probe: f64,
    nsamples: u64,
    seed: u64,
    workers: usize,
) -> Result<AtomReport> {
    let setup = FieldSetup::new(d, cutoff)?;
    let mut xs =
        collect_streams(nsamples, workers, |s| renormalized_mass(&setup.sample(seed, s), &setup.sigma))?;
    xs.sort_by(f64::total_cmp);
    let runs: Vec<(f64, u64)> = xs.chunk_by(|a, b| a == b).map(|r| (r[0], r.len() as u64)).collect();
    let nearest =
        runs.iter().min_by(|a, b| (a.0 - probe).abs().total_cmp(&(b.0 - probe).abs())).map_or(0, |r| r.1);
    let widest = runs.iter().map(|r| r.1).max().unwrap_or(0);
    let n = nsamples as f64;
    Ok(AtomReport {
        nsamples,
        distinct: runs.len() as u64,
        jump_at_probe: nearest as f64 / n,
        max_jump: widest as f64 / n,
    })
}

/// One consecutive pair of a Cauchy table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyRow {
    pub coarse: u32,
    pub fine: u32,
    /// Exact `E[(R_fine - R_coarse)^2]`.
    pub analytic: f64,
    pub mc: MomentEstimate,
    pub z_score: f64,
}

/// Analytic and sampled `E[(R_N - R_M)^2]` for consecutive pairs of `cutoffs`.
pub fn cauchy_suite(
    d: usize,
    cutoffs: &[u32],
    nsamples: u64,
    seed: u64,
    workers: usize,
) -> Result<Vec<CauchyRow>> {
    if cutoffs.len() < 2 {
        return Err(Error::InsufficientRows { required: 2, got: cutoffs.len() });
    }
    if cutoffs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("cutoffs must be strictly increasing".into()));
    }
    cutoffs
        .windows(2)
        .map(|w| {
            let (m, n) = (w[0], w[1]);
            let analytic = interaction_difference_moment(d, n, m)?;
            let fine = FieldSetup::new(d, n)?;
            let coarse = FieldSetup::new(d, m)?;
            let mc = second_moment(nsamples, workers, |s| {
                let u = fine.sample(seed, s);
                Ok(fine.interaction(&u)? - coarse.interaction(&u.project(m))?)
            })?;
            Ok(CauchyRow { coarse: m, fine: n, analytic, mc, z_score: mc.z_score(analytic) })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypercontractivityReport {
    /// `||X||_4 / ||X||_2` for `X = int :u_N^2: dx`.
    pub ratio: f64,
    /// Delta-method standard error of the ratio.
    pub stderr: f64,
    /// Chaos-degree-2 constant `(4 - 1)^{2/2}`.
    pub bound: f64,
}

pub fn hypercontractivity(
    d: usize,
    cutoff: u32,
    nsamples: u64,
    seed: u64,
    workers: usize,
) -> Result<HypercontractivityReport> {
    let setup = FieldSetup::new(d, cutoff)?;
    let xs = collect_streams(nsamples, workers, |s| renormalized_mass(&setup.sample(seed, s), &setup.sigma))?;
    let n = xs.len() as f64;
    let x2: Vec<f64> = xs.iter().map(|x| x * x).collect();
    let x4: Vec<f64> = x2.iter().map(|x| x * x).collect();
    let (b, a) = (x2.iter().sum::<f64>() / n, x4.iter().sum::<f64>() / n);
    let cov = |u: &[f64], mu: f64, v: &[f64], mv: f64| {
        u.iter().zip(v).map(|(p, q)| (p - mu) * (q - mv)).sum::<f64>() / (n - 1.0)
    };
    let ratio = a.powf(0.25) / b.sqrt();
    let (ga, gb) = (ratio / (4.0 * a), -ratio / (2.0 * b));
    let var =
        ga * ga * cov(&x4, a, &x4, a) + 2.0 * ga * gb * cov(&x4, a, &x2, b) + gb * gb * cov(&x2, b, &x2, b);
    Ok(HypercontractivityReport { ratio, stderr: (var / n).sqrt(), bound: 3.0 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrthogonalityReport {
    /// `E[H_2(u(x)) H_3(u(y))]`, zero by orthogonality of chaoses.
    pub cross_degree: MomentEstimate,
    /// `E[H_2(u(x)) H_2(u(y))]`.
    pub same_degree: MomentEstimate,
    /// `2 C_N(x - y)^2`.
    pub same_degree_expected: f64,
}

/// Chaos orthogonality at the two points `x`, `y` of `T^d`.
pub fn orthogonality(
    d: usize,
    cutoff: u32,
    x: &[f64],
    y: &[f64],
    nsamples: u64,
    seed: u64,
    workers: usize,
) -> Result<OrthogonalityReport> {
    if x.len() != d || y.len() != d {
        return Err(Error::Shape(format!("points must have {d} coordinates")));
    }
    let setup = FieldSetup::new(d, cutoff)?;
    let s = setup.sigma.sigma;
    let pairs = collect_streams(nsamples, workers, |stream| {
        let u = setup.sample(seed, stream);
        let (a, b) = (u.eval(x), u.eval(y));
        Ok((hermite(2, a, s)? * hermite(3, b, s)?, hermite(2, a, s)? * hermite(2, b, s)?))
    })?;
    let (cross, same): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let cov = covariance(&setup.lattice, x, y);
    Ok(OrthogonalityReport {
        cross_degree: MomentEstimate::from_values(&cross),
        same_degree: MomentEstimate::from_values(&same),
        same_degree_expected: 2.0 * cov * cov,
    })
}

/// `C_N(x - y) = sum_{|n| <= N} <n>^{-d} cos(n.(x - y))`.
fn covariance(lattice: &Lattice, x: &[f64], y: &[f64]) -> f64 {
    let d = lattice.dim() as i32;
    (0..lattice.len())
        .map(|i| {
            let phase: f64 =
                lattice.mode(i).iter().zip(x.iter().zip(y)).map(|(&n, (a, b))| n as f64 * (a - b)).sum();
            lattice.bracket(i).powi(-d) * phase.cos()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covariance_at_coinciding_points_is_sigma() {
        let l = Lattice::new(2, 5).unwrap();
        let c = covariance(&l, &[0.3, 1.0], &[0.3, 1.0]);
        let s = crate::spectral::sigma(2, 5).unwrap().sigma;
        assert!((c - s).abs() < 1e-12);
    }

    #[test]
    fn atoms_at_cutoff_zero() {
        let r = atom_check(1, 0, 0.0, 2000, 3, 2).unwrap();
        assert_eq!(r.distinct, 2000);
        assert_eq!(r.max_jump, 1.0 / 2000.0);
    }

    #[test]
    fn cauchy_rejects_bad_lists() {
        assert!(cauchy_suite(1, &[2], 10, 0, 1).is_err());
        assert!(cauchy_suite(1, &[2, 2], 10, 0, 1).is_err());
    }

    #[test]
    fn moment_estimate_of_constants() {
        let m = MomentEstimate::from_values(&[2.0; 10]);
        assert_eq!((m.mean, m.stderr), (2.0, 0.0));
    }
}
