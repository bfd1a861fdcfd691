//! Pass/warn thresholds applied to every run.

use nlsmooth_core::EquationKind;

pub const PERSISTENCE_MAX: f64 = 5.0;
pub const WIDTH_EXPONENT_MAX: f64 = 0.65;
pub const INFR_SLOPE_TOL: f64 = 0.15;
pub const REFINE_FLAT: (f64, f64) = (0.9, 1.1);
pub const REFINE_GROWTH: f64 = 1.2;
/// Distance above the smoothing threshold from which operators must be unbounded.
pub const UNBOUNDED_MARGIN: f64 = 0.3;

const TABULATED_GAINS: [(EquationKind, f64, f64); 6] = [
    (EquationKind::Nls, 0.3, 0.40),
    (EquationKind::Mkdv, 0.5, 0.33),
    (EquationKind::Mkdv, 0.75, 0.60),
    (EquationKind::Kdv, 0.5, 0.33),
    (EquationKind::Dnls, 0.75, 0.30),
    (EquationKind::Mzk, 1.75, 0.25),
];

/// Smallest acceptable measured gain: tabulated cases, otherwise two thirds of theory.
pub fn smoothing_min(kind: EquationKind, s: f64, eps_th: f64) -> f64 {
    TABULATED_GAINS
        .iter()
        .find(|(k, s0, _)| *k == kind && (s - s0).abs() < 1e-9)
        .map(|t| t.2)
        .unwrap_or(2.0 * eps_th / 3.0)
}

pub fn alpha_exponent_max(kind: EquationKind) -> f64 {
    match kind {
        EquationKind::Dnls => 0.35,
        _ => 0.15,
    }
}
