//! Fourier-mode decay laboratory for two Rao-Nakra sandwich-beam systems on
//! the whole line: frictional damping on the Euler-Bernoulli equation, or an
//! infinite exponential memory acting there instead.
//!
//! Everything happens mode-by-mode in Fourier space. Each frequency `xi`
//! carries a small linear system `dU/dt = -A(xi) U`; the crate assembles the
//! generator, evolves modes (adaptive Runge-Kutta and a matrix-exponential
//! oracle), evaluates the per-mode energy and Lyapunov machinery, classifies
//! stability through dense eigendecompositions, and integrates Plancherel
//! quadratures into L^2 / L^1 / L^q norm decay measurements.

pub mod config;
pub mod error;
pub mod expm;
pub mod fit;
pub mod functionals;
pub mod model;
pub mod norms;
pub mod ode;
pub mod pipeline;
pub mod report;
pub mod spectral;

pub use error::Error;
pub use model::{
    Control, FourierSymbol, InitialProfile, KernelParams, ModelParams, SpectralState, SpeedClass,
};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
