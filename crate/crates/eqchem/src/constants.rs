//! Physical constants. Strict SI throughout.

/// Universal gas constant, J/mol/K (CODATA 2018).
pub const R_UNIVERSAL: f64 = 8.31446261815324;

/// Standard pressure for tabulated thermodynamic data, Pa.
pub const P_STANDARD: f64 = 1.0e5;

/// Temperature bounds for equilibrium solves with unknown T, K.
/// Matches the span of the bundled database segments.
pub const T_SOLVE_MIN: f64 = 200.0;
pub const T_SOLVE_MAX: f64 = 20000.0;
