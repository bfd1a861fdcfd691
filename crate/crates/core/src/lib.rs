//! Spectral discretization, equation catalog, profile-picture evolution, rough
//! data generation and smoothing analysis for dispersive PDEs.

pub mod analyzer;
pub mod equation;
pub mod error;
pub mod evolution;
pub mod fft;
pub mod field;
pub mod gauge;
pub mod grid;
pub mod io;
pub mod norms;
pub mod product;
pub mod rough;

pub use equation::{EquationKind, EquationSpec, FrequencyTuple, Interaction, Sign};
pub use error::{Error, Result};
pub use evolution::{apply_group, duhamel_term, evolve, StepperConfig, Trajectory};
pub use field::FourierField;
pub use grid::{Dim, Freq, SpectralGrid};
pub use num_complex::Complex64;
