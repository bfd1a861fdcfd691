//! Regularity-gain measurements on Duhamel terms.

pub mod gain;
pub mod refinement;
pub mod spectrum;

pub use gain::{estimate_gain, gain_between, LadderRow, SeedOutcome, SmoothingConfig, SmoothingReport};
pub use refinement::{lipschitz_probe, refinement_diagnostic, LipschitzProbe, RefinementTable};
pub use spectrum::{fit_decay, linear_fit, shell_spectrum, Shell, SlopeFit};
