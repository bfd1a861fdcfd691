//! Frequency-lattice realizations of multilinear dispersive operators: the
//! phase-smoothed and phase-band operators, norm estimation and exponent sweeps,
//! and the first steps of the normal form reduction.

pub mod estimate;
pub mod infr;
pub mod kernel;
pub mod lattice;
pub mod probe;
pub mod tuples;

pub use estimate::{estimate_norm, norm_ratio, EstimateOptions, InputNorm, NormEstimate};
pub use infr::{beta_threshold, boundary_bracket, boundary_term, sharp_profile, split_resonant, verify_norm_scalings, verify_scalings, InfrConfig, InfrScaling, SplitTerms};
pub use kernel::{CellAveraged, FnKernel, Kernel, PhaseKernel, Restriction};
pub use lattice::{Lattice, LatticeField};
pub use probe::{sweep_m_scaling, sweep_sigma_bound, BoundProbe, FeasibilityTable, OperatorKind, ScalingSweep};
pub use tuples::{apply_kernel, Streamed, Tabulated, TupleSource};
