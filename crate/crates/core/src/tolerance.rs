//! Numerical tolerances shared by the verification checks.

/// Relative tolerance for identities that hold exactly in exact arithmetic.
pub const IDENTITY_REL: f64 = 1e-12;

/// Multiplicative slack `(1 + INEQUALITY_SLACK)` granted to the larger side
/// of an inequality.
pub const INEQUALITY_SLACK: f64 = 1e-12;

/// Log-convexity goes through two nested Hölder steps, each with its own
/// rounding in the `powf` calls.
pub const LOG_CONVEXITY_REL: f64 = 1e-9;

/// Allowed violation of the triangle inequality when a distance matrix is
/// ingested.
pub const TRIANGLE: f64 = 1e-9;

/// Relative gap below which `α·τ_j` is treated as coinciding with a pairwise
/// distance.
pub const TIE_REL: f64 = 1e-12;

/// `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn relative_defect(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Amount by which `lhs <= rhs * (1 + slack)` is violated, relative to `rhs`.
/// Non-positive when the inequality holds.
pub fn inequality_excess(lhs: f64, rhs: f64) -> f64 {
    let scale = rhs.abs().max(f64::MIN_POSITIVE);
    (lhs - rhs) / scale
}
