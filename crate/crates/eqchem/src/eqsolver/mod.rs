//! Equilibrium composition by constrained minimisation of thermodynamic
//! potentials, in three modes:
//!
//! - [`solve_pt`]: fixed temperature and pressure (Gibbs energy)
//! - [`solve_rhoe`]: fixed density and internal energy (Helmholtz energy)
//! - [`solve_ps`]: fixed pressure and entropy
//!
//! The nonlinear stationarity system is solved by Newton iteration on the
//! log-space unknowns `ln(n_s)` with the per-species equations eliminated
//! analytically, leaving a reduced linear system in the element potentials
//! plus `ln n` and/or `ln T`.  Robustness comes from an under-relaxation
//! factor on the updates, a floored initial guess, and an abundance-weighted
//! residual norm that ignores vanishing species.

mod core;
mod linalg;

pub use self::core::{solve_ps, solve_pt, solve_rhoe};

use crate::constants::R_UNIVERSAL;
use crate::thermo::MixtureModel;

/// Solver tuning knobs.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Convergence tolerance on the weighted residual norm.
    pub tol: f64,
    /// Newton iteration cap.
    pub max_iter: usize,
    /// Fraction of |ln n| (or |ln T|) allowed per update.
    pub relax_fraction: f64,
    /// Initial-guess floor for absent species, as a fraction of total n.
    pub trace_floor_fraction: f64,
    /// Emit a per-iteration trace on standard error.
    pub verbose: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-11,
            max_iter: 200,
            relax_fraction: 0.5,
            trace_floor_fraction: 1e-4,
            verbose: false,
        }
    }
}

/// Convergence record for one solve.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub converged: bool,
    /// Newton steps taken.
    pub iterations: usize,
    /// Weighted residual norm at the top of each iteration.
    pub residual_history: Vec<f64>,
    pub final_residual: f64,
    /// Shared relaxation factor per step.
    pub lambda_history: Vec<f64>,
    /// Final element potentials, aligned with the model's element rows.
    pub element_potentials: Vec<f64>,
    /// Some thermo evaluation was clamped outside its fitted range.
    pub out_of_range: bool,
}

/// Structural failures. Running out of iterations is not an error: it yields
/// a report with `converged = false` so outer loops can react.
#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error("invalid input: {0}")]
    BadInput(String),
    #[error("singular reduced system at unknown {unknown:?}")]
    SingularSystem { unknown: String },
    #[error("element {element:?} has a nonzero total but no active species")]
    ElementWithoutSpecies { element: String },
    #[error("target {quantity} unreachable within the database range: pinned at T = {bound} K")]
    TargetUnreachable { quantity: &'static str, bound: f64 },
    #[error(transparent)]
    Thermo(#[from] crate::thermo::ThermoError),
}

/// Residual families of the fixed-(T,p) stationarity system.
#[derive(Debug, Clone)]
pub struct Residuals {
    /// Per-species stationarity residuals F_s (dimensionless).
    pub f_species: Vec<f64>,
    /// Per-element constraint residuals F_j (mol/kg).
    pub f_elements: Vec<f64>,
    /// Total-molarity residual F_n (mol/kg).
    pub f_total: f64,
}

/// Evaluate the fixed-(T,p) residuals at a given iterate.
///
/// `lnns` are the first-class log molarities; `ns` must equal `exp(lnns)`
/// elementwise (zero after underflow is fine).  `pi` are element potentials;
/// `n0` is the per-species initial-composition constraint vector.
#[allow(clippy::too_many_arguments)]
pub fn residuals_pt(
    model: &MixtureModel,
    t: f64,
    p: f64,
    lnns: &[f64],
    ns: &[f64],
    n: f64,
    pi: &[f64],
    n0: &[f64],
) -> Residuals {
    let lnn = n.ln();
    let lnpr = (p / crate::constants::P_STANDARD).ln();
    let f_species: Vec<f64> = model
        .species()
        .iter()
        .enumerate()
        .map(|(s, sp)| {
            let g0_rt = {
                let h = sp.h0(t).value;
                let s0 = sp.s0(t).value;
                (h - t * s0) / (R_UNIVERSAL * t)
            };
            let mut f = g0_rt + (lnns[s] - lnn) + lnpr;
            for j in 0..model.n_elements() {
                f -= model.a(j, s) * pi[j];
            }
            f
        })
        .collect();
    let totals = model.element_totals(ns);
    let targets = model.element_totals(n0);
    let f_elements: Vec<f64> = totals.iter().zip(&targets).map(|(a, b)| a - b).collect();
    let f_total = ns.iter().sum::<f64>() - n;
    Residuals {
        f_species,
        f_elements,
        f_total,
    }
}

/// Abundance-weighted residual norm
/// `sqrt(sum (n_s F_s)^2 + sum F_j^2 + F_n^2)`.
///
/// Weighting by `n_s` removes the log-singularity of F_s for vanishing
/// species: an absent species contributes nothing regardless of F_s.
pub fn residual_norm(r: &Residuals, ns: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (f, n) in r.f_species.iter().zip(ns) {
        let w = f * n;
        acc += w * w;
    }
    for f in &r.f_elements {
        acc += f * f;
    }
    acc += r.f_total * r.f_total;
    acc.sqrt()
}

/// The Lagrangian of the fixed-(T,p) minimisation, J/kg.
///
/// `n` is taken as the sum of `ns`; `lambda` holds one multiplier per
/// element row.  Not used by the solver itself -- this exists so converged
/// states can be verified as stationary points by finite differences.
pub fn lagrangian_value(
    model: &MixtureModel,
    t: f64,
    p: f64,
    ns: &[f64],
    n0: &[f64],
    lambda: &[f64],
) -> Result<f64, SolveError> {
    for (i, &v) in ns.iter().enumerate() {
        if !(v > 0.0) {
            return Err(SolveError::BadInput(format!(
                "nonpositive molarity {v} for species index {i}"
            )));
        }
    }
    let n: f64 = ns.iter().sum();
    let lnpr = (p / crate::constants::P_STANDARD).ln();
    let mut l = 0.0;
    for (s, sp) in model.species().iter().enumerate() {
        let g0 = sp.g0(t).value;
        l += ns[s] * (g0 + R_UNIVERSAL * t * ((ns[s] / n).ln() + lnpr));
    }
    for j in 0..model.n_elements() {
        let mut c = 0.0;
        for s in 0..model.n_species() {
            c += model.a(j, s) * (ns[s] - n0[s]);
        }
        l += lambda[j] * c;
    }
    Ok(l)
}

/// Central-finite-difference gradient of the Lagrangian w.r.t. each species
/// molarity, and its L2 norm.  At a converged equilibrium this should vanish
/// up to finite-difference noise.
///
/// The probe step is `rel_step * n_s` with an absolute floor tied to the
/// rounding granule of the Lagrangian itself; without the floor, a trace
/// species divides a one-ulp wobble of a ~1e7 J/kg quantity by a ~1e-11
/// step and reports pure noise.
pub fn verify_stationarity(
    model: &MixtureModel,
    t: f64,
    p: f64,
    ns: &[f64],
    n0: &[f64],
    lambda: &[f64],
    rel_step: f64,
) -> Result<(Vec<f64>, f64), SolveError> {
    let l0 = lagrangian_value(model, t, p, ns, n0, lambda)?;
    let h_floor = 2.0 * l0.abs() * f64::EPSILON;
    let mut grad = Vec::with_capacity(ns.len());
    let mut norm2 = 0.0;
    for s in 0..ns.len() {
        let h = (rel_step * ns[s]).max(h_floor).min(0.5 * ns[s].max(1e-300));
        let mut up = ns.to_vec();
        up[s] = ns[s] + h;
        let mut dn = ns.to_vec();
        dn[s] = ns[s] - h;
        let lu = lagrangian_value(model, t, p, &up, n0, lambda)?;
        let ld = lagrangian_value(model, t, p, &dn, n0, lambda)?;
        let d = (lu - ld) / (2.0 * h);
        norm2 += d * d;
        grad.push(d);
    }
    Ok((grad, norm2.sqrt()))
}

/// Initial guess per the floored protocol: `n = 1/M0`,
/// `ns[s] = max(X0[s]/M0, n * floor_fraction)`, and the one and only
/// log evaluation `lnns = ln(ns)`.
pub fn initial_guess(model: &MixtureModel, x0: &[f64], config: &SolverConfig) -> (Vec<f64>, f64) {
    let xsum: f64 = x0.iter().sum();
    let m0 = model.mean_molar_mass(x0);
    let n = 1.0 / m0;
    let lnns = x0
        .iter()
        .map(|&x| (x / xsum / m0).max(n * config.trace_floor_fraction).ln())
        .collect();
    (lnns, n.ln())
}

/// Under-relaxation factors for one Newton update.
///
/// Every unknown is limited by its own update: species `s` gets
/// `min(1, f |ln n| / |dln n_s|)`, the total gets the same formula on its
/// own `dln n`, and the temperature variant swaps in `|ln T|`.  Limiting
/// `ln n` by the worst species instead would chain the fast unknowns to a
/// slowly descending trace species and stall the weighted residual.
#[derive(Debug, Clone)]
pub struct Relaxation {
    /// One factor per species.
    pub per_species: Vec<f64>,
    /// Factor for the `dln n` update.
    pub total: f64,
    /// Factor for the `dln T` update.
    pub temperature: f64,
}

impl Relaxation {
    /// The most severe factor of the step (what a trace reports as Lambda).
    pub fn most_limited(&self) -> f64 {
        self.per_species
            .iter()
            .copied()
            .fold(self.total.min(self.temperature), f64::min)
    }
}

fn limit(cap: f64, step: f64) -> f64 {
    if step.abs() > cap {
        cap / step.abs()
    } else {
        1.0
    }
}

/// Compute relaxation factors; `lnt`/`dlnt` only matter in modes where the
/// temperature is an unknown.
pub fn relaxation_factors(
    dlnns: &[f64],
    dlnn: f64,
    dlnt: f64,
    lnn: f64,
    lnt: f64,
    relax_fraction: f64,
) -> Relaxation {
    let cap_n = relax_fraction * lnn.abs();
    let per_species = dlnns.iter().map(|&d| limit(cap_n, d)).collect();
    Relaxation {
        per_species,
        total: limit(cap_n, dlnn),
        temperature: limit(relax_fraction * lnt.abs(), dlnt),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relaxation_full_step_when_updates_small() {
        let r = relaxation_factors(&[0.1, -0.2, 0.05], 0.01, 0.0, (35.0_f64).ln(), 0.0, 0.5);
        assert!(r.per_species.iter().all(|&l| l == 1.0));
        assert_eq!(r.total, 1.0);
        assert_eq!(r.most_limited(), 1.0);
    }

    #[test]
    fn relaxation_limits_large_species_update() {
        // cap = 0.5 * |ln n|; a large dlnns gets lambda = cap / |dlnns|
        let lnn = (34.55_f64).ln();
        let r = relaxation_factors(&[-146.8798, -0.12], 0.0, 0.0, lnn, 0.0, 0.5);
        let expect = 0.5 * lnn / 146.8798;
        assert!((r.per_species[0] - expect).abs() < 1e-12);
        assert_eq!(r.per_species[1], 1.0);
        // the slow species does not drag the total-molarity update down
        assert_eq!(r.total, 1.0);
        assert_eq!(r.most_limited(), r.per_species[0]);
    }

    #[test]
    fn relaxation_temperature_uses_ln_t() {
        let lnt = (3000.0_f64).ln();
        let r = relaxation_factors(&[-0.5], 0.0, -20.0, (35.0_f64).ln(), lnt, 0.5);
        let expect = 0.5 * lnt / 20.0;
        assert!((r.temperature - expect).abs() < 1e-12);
        assert_eq!(r.per_species[0], 1.0);
    }

    #[test]
    fn underflowed_species_keep_norm_finite() {
        // lnns < -746 underflows to ns = 0.0; the weighted norm stays finite
        let lnns = -800.0_f64;
        let ns = lnns.exp();
        assert_eq!(ns, 0.0);
        let f_s = 1.0e3; // large residual on an absent species
        assert_eq!(ns * f_s, 0.0);
    }

    #[test]
    fn zero_residuals_norm_is_zero() {
        let r = Residuals {
            f_species: vec![0.0, 0.0],
            f_elements: vec![0.0],
            f_total: 0.0,
        };
        assert_eq!(residual_norm(&r, &[1.0, 2.0]), 0.0);
    }
}
