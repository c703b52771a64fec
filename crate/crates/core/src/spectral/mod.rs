//! Frequency lattices, exact samples of the log-correlated free field, sharp
//! and dyadic projections, Fourier multipliers and grid synthesis.

mod field;
mod grid;
mod lattice;
mod variance;

pub use field::{dealiased_grid_size, dyadic_block_count, dyadic_range, sample_field, SpectralField};
pub use grid::GridField;
pub use lattice::{mode_count, Lattice, DEFAULT_MODE_BUDGET};
pub use variance::{sigma, WickVariance};

pub(crate) use variance::radial_sum;
