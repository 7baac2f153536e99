//! Periodic-grid calculus: transforms, multiplier operators and norms.

mod engine;
mod fft;
mod grid;
pub mod io;
mod norms;

pub use engine::{
    apply_multiplier, apply_vector_multiplier, divergence, fourier, gaussian_semigroup, gradient,
    hermitian_fix_nyquist, inverse_fourier, inverse_fourier_complex, laplacian_power,
    riesz_potential, translate, Spectrum, SpectralEngine, REAL_TOLERANCE,
};
pub use fft::fft_nd;
pub(crate) use engine::apply_indexed;
pub use grid::{Grid, GridField, VectorField};
pub use norms::{default_besov_times, functional_norm, log_space, NormSpec};
