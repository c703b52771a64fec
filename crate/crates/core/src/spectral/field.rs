use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::grid::{synthesize, GridField};
use super::Lattice;
use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Fourier coefficients `c(n)`, `|n| <= N`, of a real trigonometric polynomial on `T^d`.
///
/// Coefficients are stored with every spectral weight already applied and
/// satisfy `c(-n) = conj(c(n))`. `band` is the largest radius on which the
/// coefficients may be nonzero; projections lower it without reallocating
/// the lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    lattice: Arc<Lattice>,
    coeffs: Vec<Complex64>,
    band: u32,
}

impl SpectralField {
    pub fn zeros(lattice: Arc<Lattice>) -> Self {
        let band = lattice.cutoff();
        Self { coeffs: vec![Complex64::new(0.0, 0.0); lattice.len()], lattice, band }
    }

    /// Builds a field from a coefficient rule evaluated on `n = 0` and one
    /// member of each antipodal pair; the partner gets the conjugate, and
    /// `c(0)` keeps only its real part.
    pub fn from_fn(lattice: Arc<Lattice>, mut f: impl FnMut(&[i32], u64) -> Complex64) -> Self {
        let mut field = Self::zeros(lattice);
        let lat = Arc::clone(&field.lattice);
        for i in 0..lat.len() {
            if !lat.is_representative(i) {
                continue;
            }
            let mut c = f(lat.mode(i), lat.norm2(i));
            let j = lat.neg(i);
            if i == j {
                c.im = 0.0;
            }
            field.coeffs[i] = c;
            field.coeffs[j] = c.conj();
        }
        field
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }

    /// Effective cutoff: coefficients vanish for `|n| > cutoff()`.
    pub fn cutoff(&self) -> u32 {
        self.band
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, n: &[i32]) -> Option<Complex64> {
        self.lattice.index_of(n).map(|i| self.coeffs[i])
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    /// Direct evaluation `u(x) = sum_n c(n) e^{i n.x}` at one point.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let stop = self.lattice.prefix_len(self.band);
        self.coeffs[..stop]
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let phase: f64 = self.lattice.mode(i).iter().zip(x).map(|(&n, &t)| n as f64 * t).sum();
                c.re * phase.cos() - c.im * phase.sin()
            })
            .sum()
    }

    /// `||u||^2_{L^2}` for the normalized measure (Parseval).
    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `int u v dx = sum_n c_u(n) conj(c_v(n))`; real for real fields.
    pub fn inner(&self, other: &SpectralField) -> Result<f64> {
        self.check_same_lattice(other)?;
        Ok(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a * b.conj()).re).sum())
    }

    /// `sum_n w(n) |c(n)|^2` with the weight given on the mode index.
    pub fn weighted_norm_sq(&self, w: impl Fn(usize) -> f64) -> f64 {
        self.coeffs.iter().enumerate().map(|(i, c)| w(i) * c.norm_sqr()).sum()
    }

    /// Sharp projector `pi_M`: zeroes every coefficient with `|n| > M`.
    pub fn project(&self, m: u32) -> SpectralField {
        let keep = self.lattice.prefix_len(m);
        let mut out = self.clone();
        out.coeffs[keep..].fill(Complex64::new(0.0, 0.0));
        out.band = self.band.min(m);
        out
    }

    /// Signed variant of [`project`](Self::project) for callers holding raw integers.
    pub fn project_checked(&self, m: i64) -> Result<SpectralField> {
        if m < 0 {
            return Err(Error::NegativeCutoff(m));
        }
        Ok(self.project(m.min(u32::MAX as i64) as u32))
    }

    /// Dyadic block `Pi_j`: `Pi_1 = pi_2` and `Pi_j = pi_{2^j} - pi_{2^{j-1}}` for `j >= 2`.
    pub fn dyadic_block(&self, j: u32) -> Result<SpectralField> {
        let (lo, hi) = dyadic_range(j)?;
        let mut out = self.project(hi);
        if let Some(lo) = lo {
            let start = self.lattice.prefix_len(lo);
            let stop = self.lattice.prefix_len(hi);
            out.coeffs[..start.min(stop)].fill(Complex64::new(0.0, 0.0));
        }
        Ok(out)
    }

    /// Fourier multiplier `<nabla>^{-s}`.
    pub fn smooth(&self, s: f64) -> SpectralField {
        let mut out = self.clone();
        if s == 0.0 {
            return out;
        }
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            *c *= self.lattice.bracket(i).powf(-s);
        }
        out
    }

    pub fn scale(&self, a: f64) -> SpectralField {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= a);
        out
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField> {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        self.combine(other, |a, b| a - b)
    }

    fn combine(
        &self,
        other: &SpectralField,
        op: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<SpectralField> {
        self.check_same_lattice(other)?;
        Ok(SpectralField {
            lattice: Arc::clone(&self.lattice),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| op(a, b)).collect(),
            band: self.band.max(other.band),
        })
    }

    /// Re-expresses the field on a larger lattice of the same dimension.
    pub fn extend_to(&self, lattice: &Arc<Lattice>) -> Result<SpectralField> {
        if lattice.dim() != self.dim() {
            return Err(Error::Shape(format!(
                "cannot move a d = {} field onto a d = {} lattice",
                self.dim(),
                lattice.dim()
            )));
        }
        if lattice.cutoff() < self.band {
            return Err(Error::CutoffTooLarge { requested: self.band, available: lattice.cutoff() });
        }
        let mut out = SpectralField::zeros(Arc::clone(lattice));
        let keep = self.lattice.prefix_len(self.band);
        out.coeffs[..keep].copy_from_slice(&self.coeffs[..keep]);
        out.band = self.band;
        Ok(out)
    }

    /// Values on the uniform grid `x_k = 2 pi k / G`, requiring `G >= 4N + 1`.
    pub fn to_grid(&self, g: usize) -> Result<GridField> {
        let required = 4 * self.band as usize + 1;
        if g < required {
            return Err(Error::Dealiasing { grid: g, required, cutoff: self.band });
        }
        Ok(synthesize(self, g))
    }

    /// Synthesizes on the smallest FFT-friendly dealiased grid.
    pub fn to_default_grid(&self) -> GridField {
        synthesize(self, dealiased_grid_size(self.band))
    }

    fn check_same_lattice(&self, other: &SpectralField) -> Result<()> {
        if Arc::ptr_eq(&self.lattice, &other.lattice) || *self.lattice == *other.lattice {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "fields live on different lattices (d = {}, N = {} vs d = {}, N = {})",
                self.dim(),
                self.lattice.cutoff(),
                other.dim(),
                other.lattice.cutoff()
            )))
        }
    }

    pub(crate) fn with_coeffs(lattice: Arc<Lattice>, coeffs: Vec<Complex64>, band: u32) -> Self {
        debug_assert_eq!(coeffs.len(), lattice.len());
        Self { lattice, coeffs, band }
    }
}

/// Radii `(lo, hi)` of block `j`: modes with `lo < |n| <= hi`, `lo = None` for the ball.
pub fn dyadic_range(j: u32) -> Result<(Option<u32>, u32)> {
    match j {
        0 => Err(Error::BlockIndex(0)),
        1 => Ok((None, 2)),
        j if j < 32 => Ok((Some(1 << (j - 1)), 1 << j)),
        j => Err(Error::BlockIndex(j)),
    }
}

/// Number of dyadic blocks needed to cover radius `N`: `max(1, ceil(log2 N))`.
pub fn dyadic_block_count(cutoff: u32) -> u32 {
    if cutoff <= 2 {
        1
    } else {
        32 - (cutoff - 1).leading_zeros()
    }
}

/// Smallest `G >= 4N + 1` whose prime factors are all 2, 3 or 5.
pub fn dealiased_grid_size(cutoff: u32) -> usize {
    let mut g = 4 * cutoff as usize + 1;
    loop {
        let mut r = g;
        for p in [2, 3, 5] {
            while r.is_multiple_of(p) {
                r /= p;
            }
        }
        if r == 1 {
            return g;
        }
        g += 1;
    }
}

/// Draws a sample of the log-correlated free field truncated to the lattice.
///
/// `c(n) = g_n / <n>^{d/2}` with `g_0` real standard normal and, for each
/// antipodal pair, `g_n` complex with independent `N(0, 1/2)` parts and
/// `g_{-n} = conj(g_n)`. The result depends only on `(master_seed, stream)`.
pub fn sample_field(lattice: &Arc<Lattice>, master_seed: u64, stream: u64) -> SpectralField {
    let mut rng = stream_rng(master_seed, stream);
    let d = lattice.dim() as f64;
    let half = std::f64::consts::FRAC_1_SQRT_2;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); lattice.len()];
    for i in 0..lattice.len() {
        if !lattice.is_representative(i) {
            continue;
        }
        let weight = lattice.bracket(i).powf(-d / 2.0);
        let j = lattice.neg(i);
        let g = if i == j {
            Complex64::new(rng.sample::<f64, _>(StandardNormal), 0.0)
        } else {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * half, im * half)
        };
        coeffs[i] = g * weight;
        coeffs[j] = coeffs[i].conj();
    }
    SpectralField::with_coeffs(Arc::clone(lattice), coeffs, lattice.cutoff())
}
