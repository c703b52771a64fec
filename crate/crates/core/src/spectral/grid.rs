use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{Lattice, SpectralField};
use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Real samples of a band-limited field on the uniform grid `x_k = 2 pi k / G`.
///
/// Storage is row-major over `G^d` points. Integrals against the normalized
/// Lebesgue measure are grid means; with `G >= 4N + 1` the mean of any product
/// of up to four degree-`N` polynomials is exact up to rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    d: usize,
    g: usize,
    cutoff: u32,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(d: usize, g: usize, cutoff: u32, values: Vec<f64>) -> Result<Self> {
        if values.len() != g.pow(d as u32) {
            return Err(Error::Shape(format!(
                "{} values for a {}-dimensional grid of side {}",
                values.len(),
                d,
                g
            )));
        }
        Ok(Self { d, g, cutoff, values })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn size(&self) -> usize {
        self.g
    }

    /// Cutoff of the field the grid was synthesized from.
    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Grid mean of `f(u(x))`.
    pub fn mean_of(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.values.iter().map(|&x| f(x)).sum::<f64>() / self.values.len() as f64
    }

    /// Grid mean of `f(u(x), v(x))` for two grids of identical shape.
    pub fn mean_with(&self, other: &GridField, f: impl Fn(f64, f64) -> f64) -> Result<f64> {
        self.check_shape(other)?;
        Ok(self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).sum::<f64>()
            / self.values.len() as f64)
    }

    pub fn is_dealiased(&self) -> bool {
        self.g > 4 * self.cutoff as usize
    }

    pub fn check_shape(&self, other: &GridField) -> Result<()> {
        if self.d == other.d && self.g == other.g {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "grid (d = {}, G = {}) vs grid (d = {}, G = {})",
                self.d, self.g, other.d, other.g
            )))
        }
    }

    /// Forward transform back to coefficients on `lattice`.
    pub fn to_spectral(&self, lattice: &Arc<Lattice>) -> Result<SpectralField> {
        if lattice.dim() != self.d {
            return Err(Error::Shape("dimension mismatch".into()));
        }
        if self.g < 2 * lattice.cutoff() as usize + 1 {
            return Err(Error::Dealiasing {
                grid: self.g,
                required: 2 * lattice.cutoff() as usize + 1,
                cutoff: lattice.cutoff(),
            });
        }
        let mut buf: Vec<Complex64> = self.values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        transform(&mut buf, self.d, self.g, false);
        let norm = 1.0 / self.values.len() as f64;
        let coeffs =
            (0..lattice.len()).map(|i| buf[grid_index(&lattice.mode3(i), self.d, self.g)] * norm).collect();
        Ok(SpectralField::with_coeffs(Arc::clone(lattice), coeffs, lattice.cutoff()))
    }
}

fn grid_index(m: &[i32; 3], d: usize, g: usize) -> usize {
    m[..d].iter().fold(0usize, |acc, &x| acc * g + x.rem_euclid(g as i32) as usize)
}

pub(crate) fn synthesize(field: &SpectralField, g: usize) -> GridField {
    let lattice = field.lattice();
    let d = lattice.dim();
    let mut buf = vec![Complex64::new(0.0, 0.0); g.pow(d as u32)];
    let active = lattice.prefix_len(field.cutoff());
    for (i, c) in field.coeffs()[..active].iter().enumerate() {
        buf[grid_index(&lattice.mode3(i), d, g)] += c;
    }
    transform(&mut buf, d, g, true);
    GridField { d, g, cutoff: field.cutoff(), values: buf.into_iter().map(|c| c.re).collect() }
}

/// Unnormalized `d`-dimensional DFT, one axis at a time.
fn transform(buf: &mut [Complex64], d: usize, g: usize, inverse: bool) {
    let fft: Arc<dyn Fft<f64>> = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(g)
        } else {
            p.plan_fft_forward(g)
        }
    });
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let total = buf.len();
    // Last axis is contiguous.
    fft.process_with_scratch(buf, &mut scratch);
    let mut line = vec![Complex64::new(0.0, 0.0); total];
    for axis in 0..d.saturating_sub(1) {
        let stride = g.pow((d - 1 - axis) as u32);
        let outer = total / (g * stride);
        let mut pos = 0;
        for o in 0..outer {
            for inner in 0..stride {
                let base = o * g * stride + inner;
                for k in 0..g {
                    line[pos + k] = buf[base + k * stride];
                }
                pos += g;
            }
        }
        fft.process_with_scratch(&mut line, &mut scratch);
        pos = 0;
        for o in 0..outer {
            for inner in 0..stride {
                let base = o * g * stride + inner;
                for k in 0..g {
                    buf[base + k * stride] = line[pos + k];
                }
                pos += g;
            }
        }
    }
}
