//! Two routes to the same high-frequency wave field, and the machinery to
//! compare them.
//!
//! The model problem is the Helmholtz equation
//!
//! ```text
//!     Δu + k² (1 - x) u = 0
//! ```
//!
//! on the half plane x ≥ 0, driven by an incident plane-wave packet that
//! enters at angle Θ and turns around at the fold caustic x_c = cos²Θ.
//!
//! * [`field`] builds the exact solution by Fourier decomposition in y:
//!   each spectral component solves an Airy equation in x, so the field is
//!   synthesized from Airy functions evaluated by [`airy`].
//! * [`beam`] carries the closed-form first-order Gaussian beam for the
//!   sound-speed profile n(x) = √(1-x), and [`field`] superposes beams into
//!   an approximate field, either directly in physical space or through a
//!   spectral representation built on the oscillatory integrals of [`quad`]
//!   with the phases of [`phase`].
//! * [`experiment`] measures the L∞ gap between the two routes on the
//!   caustic line over a sweep of wavenumbers and fits the decay rate,
//!   which should be close to k^(-5/6).
//!
//! Everything is plain `f64`/`Complex64` value types; all computational
//! entry points are pure functions, safe to call concurrently.

pub mod airy;
pub mod beam;
pub mod config;
pub mod experiment;
pub mod field;
pub mod fitting;
pub mod phase;
pub mod quad;
pub mod report;

pub use beam::Incidence;
pub use config::WaveConfig;
pub use field::{FieldSlice, Route, SpectralProfile};
pub use report::ConvergenceReport;

/// Everything that can go wrong inside the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("airy: {0}")]
    Airy(#[from] airy::AiryError),
    #[error("incidence angle {theta} outside admissible interval ({lo}, {hi})")]
    BadIncidence { theta: f64, lo: f64, hi: f64 },
    #[error("branch-safe sqrt argument {0} lies on the excluded ray")]
    BranchCut(num_complex::Complex<f64>),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("stationary point of the phase inside the window [{0}, {1}]")]
    StationaryPoint(f64, f64),
    #[error("eta grid under-resolved: {0}")]
    GridResolution(String),
    #[error("residual split is only defined on the caustic x = x_c (got x = {x}, x_c = {x_c})")]
    OffCaustic { x: f64, x_c: f64 },
    #[error("spectral offset eta = {eta} outside the residual-split regime |eta| <= {limit}")]
    OutOfRegime { eta: f64, limit: f64 },
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Other(String),
}

pub type Result<T> = std::result::Result<T, Error>;
