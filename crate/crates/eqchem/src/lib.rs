//! Chemical equilibrium for high-temperature gas mixtures.
//!
//! Computes equilibrium compositions by constrained minimisation of
//! thermodynamic potentials (Gibbs for fixed temperature/pressure, Helmholtz
//! for fixed density/energy), using the method of element potentials and a
//! damped Newton iteration on log-space molarities.  Application routines for
//! normal shocks, reflected shocks, nozzle expansions, and pitot pressures
//! are layered on top, together with independent analytic oracles used for
//! verification.
//!
//! The species database is the NASA Glenn 9-coefficient polynomial format
//! (`thermo.inp`); a curated air/combustion subset is bundled.

pub mod constants;
pub mod eqsolver;
pub mod oracles;
pub mod shocktools;
pub mod thermo;

pub use eqsolver::{SolveReport, SolverConfig};
pub use thermo::{GasState, MixtureModel, SpeciesRecord};

/// Bundled species database (curated NASA Glenn 9-coefficient subset).
pub const BUNDLED_THERMO_DB: &str = include_str!("../data/thermo.inp");
