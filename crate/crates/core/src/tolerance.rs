//! Numerical tolerances shared by every module.

/// Positivity tolerance: eigenvalues and Bloch norms may exceed their
/// bounds by this much before a verdict flips.
pub const EPS_POS: f64 = 1e-10;

/// Tolerance for identities that hold exactly in real arithmetic.
pub const EPS_NUM: f64 = 1e-12;

/// Floor for probabilities used as denominators.
pub const EPS_DEN: f64 = 1e-14;

/// Half-width of the band around `|t_X| = 1` and `min P = 0` that the
/// equivalence audits refuse to judge.
pub const BOUNDARY_BAND: f64 = 1e-9;
