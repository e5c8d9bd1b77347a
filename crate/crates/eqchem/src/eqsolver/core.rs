//! The shared Newton iteration driver behind the three solve modes.
//!
//! Unknowns are the per-species log molarities; the per-species Newton rows
//! are eliminated analytically, leaving a reduced system in the element
//! potentials plus `dln n` (fixed-pressure modes) and/or `dln T` (unknown-
//! temperature modes).  The update protocol:
//!
//! 1. floored initial guess, logs taken exactly once;
//! 2. every later `ns` comes from `exp(lnns)` -- never the other way;
//! 3. underflow to `ns = 0.0` is permitted, the abundance-weighted residual
//!    norm keeps absent species out of the convergence decision;
//! 4. convergence is judged on the unrelaxed residuals at the top of each
//!    iteration, before stepping.

use super::linalg::solve_dense;
use super::{relaxation_factors, SolveError, SolveReport, SolverConfig};
use crate::constants::{P_STANDARD, R_UNIVERSAL, T_SOLVE_MAX, T_SOLVE_MIN};
use crate::thermo::{GasState, MixtureModel};

#[derive(Debug, Clone, Copy)]
enum Target {
    TP { t: f64, p: f64 },
    RhoE { rho: f64, e0: f64 },
    PS { p: f64, s0: f64 },
}

impl Target {
    fn has_unknown_n(&self) -> bool {
        matches!(self, Target::TP { .. } | Target::PS { .. })
    }
    fn has_unknown_t(&self) -> bool {
        matches!(self, Target::RhoE { .. } | Target::PS { .. })
    }
}

/// Equilibrium at fixed pressure and temperature.
pub fn solve_pt(
    model: &MixtureModel,
    p: f64,
    t: f64,
    x0: &[f64],
    config: &SolverConfig,
) -> Result<(GasState, SolveReport), SolveError> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(SolveError::BadInput(format!("pressure {p} Pa")));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(SolveError::BadInput(format!("temperature {t} K")));
    }
    run(model, Target::TP { t, p }, x0, config, None)
}

/// Equilibrium at fixed density and specific internal energy.
pub fn solve_rhoe(
    model: &MixtureModel,
    rho: f64,
    e0: f64,
    x0: &[f64],
    config: &SolverConfig,
    t_guess: Option<f64>,
) -> Result<(GasState, SolveReport), SolveError> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(SolveError::BadInput(format!("density {rho} kg/m3")));
    }
    if !e0.is_finite() {
        return Err(SolveError::BadInput(format!("internal energy {e0} J/kg")));
    }
    run(model, Target::RhoE { rho, e0 }, x0, config, t_guess)
}

/// Equilibrium at fixed pressure and specific entropy.
pub fn solve_ps(
    model: &MixtureModel,
    p: f64,
    s0: f64,
    x0: &[f64],
    config: &SolverConfig,
    t_guess: Option<f64>,
) -> Result<(GasState, SolveReport), SolveError> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(SolveError::BadInput(format!("pressure {p} Pa")));
    }
    if !s0.is_finite() {
        return Err(SolveError::BadInput(format!("entropy {s0} J/kg/K")));
    }
    run(model, Target::PS { p, s0 }, x0, config, t_guess)
}

struct Setup {
    n0: Vec<f64>,
    b0: Vec<f64>,
    frozen: Vec<bool>,
    active_elements: Vec<usize>,
    lnns: Vec<f64>,
    lnn: f64,
}

fn prepare(model: &MixtureModel, x0: &[f64], config: &SolverConfig) -> Result<Setup, SolveError> {
    let nsp = model.n_species();
    if x0.len() != nsp {
        return Err(SolveError::BadInput(format!(
            "composition has {} entries for {} species",
            x0.len(),
            nsp
        )));
    }
    if x0.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(SolveError::BadInput("negative mole fraction".into()));
    }
    let xsum: f64 = x0.iter().sum();
    if !(xsum > 0.0) {
        return Err(SolveError::BadInput("empty initial composition".into()));
    }

    let m0 = model.mean_molar_mass(x0);
    let n0: Vec<f64> = x0.iter().map(|&x| x / xsum / m0).collect();
    let b0 = model.element_totals(&n0);

    // Elements absent from the initial composition cannot appear at
    // equilibrium: prune their rows and freeze every species carrying them,
    // otherwise the reduced matrix is structurally singular.  A zero-total
    // row with mixed-sign entries (the charge row of an ionised mixture) is
    // a live constraint and stays.
    let mut frozen = vec![false; nsp];
    let mut pruned = vec![false; model.n_elements()];
    loop {
        let mut changed = false;
        for j in 0..model.n_elements() {
            if pruned[j] || b0[j] != 0.0 {
                continue;
            }
            let mut pos = false;
            let mut neg = false;
            for s in 0..nsp {
                if frozen[s] {
                    continue;
                }
                let a = model.a(j, s);
                pos |= a > 0.0;
                neg |= a < 0.0;
            }
            if pos && neg {
                continue;
            }
            pruned[j] = true;
            changed = true;
            for s in 0..nsp {
                if model.a(j, s) != 0.0 {
                    frozen[s] = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let active_elements: Vec<usize> = (0..model.n_elements()).filter(|&j| !pruned[j]).collect();
    for &j in &active_elements {
        let alive = (0..nsp).any(|s| !frozen[s] && model.a(j, s) != 0.0);
        if !alive {
            return Err(SolveError::ElementWithoutSpecies {
                element: model.element_names()[j].clone(),
            });
        }
    }
    if frozen.iter().all(|&f| f) {
        return Err(SolveError::BadInput(
            "no active species after element pruning".into(),
        ));
    }

    let n = 1.0 / m0;
    let lnns: Vec<f64> = (0..nsp)
        .map(|s| {
            if frozen[s] {
                -800.0 // exp underflows to exactly 0.0
            } else {
                n0[s].max(n * config.trace_floor_fraction).ln()
            }
        })
        .collect();
    Ok(Setup {
        n0,
        b0,
        frozen,
        active_elements,
        lnns,
        lnn: n.ln(),
    })
}

fn run(
    model: &MixtureModel,
    target: Target,
    x0: &[f64],
    config: &SolverConfig,
    t_guess: Option<f64>,
) -> Result<(GasState, SolveReport), SolveError> {
    let setup = prepare(model, x0, config)?;
    let nsp = model.n_species();
    let nel = model.n_elements();
    let active = &setup.active_elements;
    let na = active.len();

    let mut lnns = setup.lnns;
    let mut ns: Vec<f64> = lnns.iter().map(|l| l.exp()).collect();
    let mut lnn = setup.lnn;
    let mut lnt = match target {
        Target::TP { t, .. } => t.ln(),
        _ => t_guess.unwrap_or(3000.0).ln(),
    };
    let mut pi = vec![0.0; nel];

    let mut history = Vec::new();
    let mut lambdas = Vec::new();
    let mut out_of_range = false;
    let mut converged = false;
    let mut steps = 0;
    let mut pinned_at_bound = 0usize;

    let mut h_rt = vec![0.0; nsp];
    let mut s_r = vec![0.0; nsp];
    let mut cp_r = vec![0.0; nsp];
    let mut mu = vec![0.0; nsp];
    let mut sig = vec![0.0; nsp];

    for _ in 0..=config.max_iter {
        let t = lnt.exp();
        for (s, sp) in model.species().iter().enumerate() {
            let h = sp.h0(t);
            let s0 = sp.s0(t);
            let cp = sp.cp0(t);
            out_of_range |= h.out_of_range || s0.out_of_range || cp.out_of_range;
            h_rt[s] = h.value / (R_UNIVERSAL * t);
            s_r[s] = s0.value / R_UNIVERSAL;
            cp_r[s] = cp.value / R_UNIVERSAL;
        }

        let n = lnn.exp();
        let sum_ns: f64 = ns.iter().sum();
        match target {
            Target::TP { p, .. } | Target::PS { p, .. } => {
                let lnpr = (p / P_STANDARD).ln();
                for s in 0..nsp {
                    mu[s] = (h_rt[s] - s_r[s]) + (lnns[s] - lnn) + lnpr;
                    sig[s] = s_r[s] - (lnns[s] - lnn) - lnpr;
                }
            }
            Target::RhoE { rho, .. } => {
                let lnc = (rho * R_UNIVERSAL * t / P_STANDARD).ln();
                for s in 0..nsp {
                    mu[s] = (h_rt[s] - s_r[s]) + lnns[s] + lnc;
                }
            }
        }

        // residual norm on the unrelaxed state
        let mut eps2 = 0.0;
        for s in 0..nsp {
            let mut f = mu[s];
            for j in 0..nel {
                f -= model.a(j, s) * pi[j];
            }
            let w = ns[s] * f;
            eps2 += w * w;
        }
        for j in 0..nel {
            let mut fj = -setup.b0[j];
            for s in 0..nsp {
                fj += model.a(j, s) * ns[s];
            }
            eps2 += fj * fj;
        }
        match target {
            Target::TP { .. } => {
                let fn_ = sum_ns - n;
                eps2 += fn_ * fn_;
            }
            Target::RhoE { e0, .. } => {
                let fe = e0 / (R_UNIVERSAL * t) - ns.iter().zip(&h_rt).map(|(n, h)| n * (h - 1.0)).sum::<f64>();
                eps2 += fe * fe;
            }
            Target::PS { s0, .. } => {
                let fn_ = sum_ns - n;
                let fs = s0 / R_UNIVERSAL - ns.iter().zip(&sig).map(|(n, s)| n * s).sum::<f64>();
                eps2 += fn_ * fn_ + fs * fs;
            }
        }
        let eps = eps2.sqrt();
        history.push(eps);
        if !eps.is_finite() {
            break;
        }
        if eps < config.tol {
            converged = true;
            break;
        }
        if steps == config.max_iter {
            break;
        }

        // reduced Newton system over the active elements
        let extra = usize::from(target.has_unknown_n()) + usize::from(target.has_unknown_t());
        let dim = na + extra;
        let col_n = na; // valid when has_unknown_n
        let col_t = na + usize::from(target.has_unknown_n());
        let mut m = vec![vec![0.0; dim]; dim];
        let mut rhs = vec![0.0; dim];

        for (jj, &j) in active.iter().enumerate() {
            let mut asum = 0.0; // sum_s a_js n_s
            let mut amu = 0.0; // sum_s a_js n_s mu_s
            let mut ah = 0.0; // sum_s a_js n_s H_s/RuT  (or E_s/RuT)
            for s in 0..nsp {
                if ns[s] == 0.0 {
                    continue;
                }
                let a = model.a(j, s);
                if a == 0.0 {
                    continue;
                }
                let w = a * ns[s];
                asum += w;
                amu += w * mu[s];
                ah += w * match target {
                    Target::RhoE { .. } => h_rt[s] - 1.0,
                    _ => h_rt[s],
                };
                for (ii, &i) in active.iter().enumerate() {
                    m[jj][ii] += w * model.a(i, s);
                }
            }
            if target.has_unknown_n() {
                m[jj][col_n] = asum;
            }
            if target.has_unknown_t() {
                m[jj][col_t] = ah;
            }
            rhs[jj] = (setup.b0[j] - asum) + amu;
        }

        if target.has_unknown_n() {
            let row = col_n;
            for (ii, &i) in active.iter().enumerate() {
                m[row][ii] = (0..nsp).map(|s| model.a(i, s) * ns[s]).sum();
            }
            m[row][col_n] = sum_ns - n;
            if target.has_unknown_t() {
                m[row][col_t] = ns.iter().zip(&h_rt).map(|(v, h)| v * h).sum();
            }
            rhs[row] = (n - sum_ns) + ns.iter().zip(&mu).map(|(v, g)| v * g).sum::<f64>();
        }

        if target.has_unknown_t() {
            let row = col_t;
            match target {
                Target::RhoE { e0, .. } => {
                    for (ii, &i) in active.iter().enumerate() {
                        m[row][ii] = (0..nsp)
                            .map(|s| model.a(i, s) * ns[s] * (h_rt[s] - 1.0))
                            .sum();
                    }
                    m[row][col_t] = (0..nsp)
                        .map(|s| ns[s] * ((cp_r[s] - 1.0) + (h_rt[s] - 1.0) * (h_rt[s] - 1.0)))
                        .sum();
                    let fe = e0 / (R_UNIVERSAL * t)
                        - ns.iter().zip(&h_rt).map(|(v, h)| v * (h - 1.0)).sum::<f64>();
                    rhs[row] = fe
                        + (0..nsp).map(|s| ns[s] * (h_rt[s] - 1.0) * mu[s]).sum::<f64>();
                }
                Target::PS { s0, .. } => {
                    for (ii, &i) in active.iter().enumerate() {
                        m[row][ii] = (0..nsp).map(|s| model.a(i, s) * ns[s] * sig[s]).sum();
                    }
                    m[row][col_n] = (0..nsp).map(|s| ns[s] * sig[s]).sum();
                    m[row][col_t] = (0..nsp)
                        .map(|s| ns[s] * (cp_r[s] + h_rt[s] * sig[s]))
                        .sum();
                    let fs = s0 / R_UNIVERSAL - ns.iter().zip(&sig).map(|(v, g)| v * g).sum::<f64>();
                    rhs[row] = fs
                        + (n - sum_ns)
                        + (0..nsp).map(|s| ns[s] * sig[s] * mu[s]).sum::<f64>();
                }
                Target::TP { .. } => unreachable!(),
            }
        }

        let sol = solve_dense(m, rhs).map_err(|col| SolveError::SingularSystem {
            unknown: if col < na {
                model.element_names()[active[col]].clone()
            } else if target.has_unknown_n() && col == col_n {
                "n".into()
            } else {
                "T".into()
            },
        })?;

        for (ii, &i) in active.iter().enumerate() {
            pi[i] = sol[ii];
        }
        let dlnn = if target.has_unknown_n() { sol[col_n] } else { 0.0 };
        let dlnt = if target.has_unknown_t() { sol[col_t] } else { 0.0 };

        // back-substitute the per-species updates from the eliminated rows
        let mut dlnns = vec![0.0; nsp];
        for s in 0..nsp {
            if setup.frozen[s] {
                continue;
            }
            let mut d = -mu[s];
            for &j in active {
                d += model.a(j, s) * pi[j];
            }
            if target.has_unknown_n() {
                d += dlnn;
            }
            if target.has_unknown_t() {
                d += dlnt
                    * match target {
                        Target::RhoE { .. } => h_rt[s] - 1.0,
                        _ => h_rt[s],
                    };
            }
            dlnns[s] = d;
        }

        let relax = relaxation_factors(&dlnns, dlnn, dlnt, lnn, lnt, config.relax_fraction);
        for s in 0..nsp {
            if !setup.frozen[s] {
                lnns[s] += relax.per_species[s] * dlnns[s];
                ns[s] = lnns[s].exp();
            }
        }
        if target.has_unknown_n() {
            lnn += relax.total * dlnn;
        }
        if target.has_unknown_t() {
            let proposed = lnt + relax.temperature * dlnt;
            let clamped = proposed.clamp(T_SOLVE_MIN.ln(), T_SOLVE_MAX.ln());
            if clamped != proposed {
                pinned_at_bound += 1;
                if pinned_at_bound >= 10 {
                    return Err(SolveError::TargetUnreachable {
                        quantity: match target {
                            Target::RhoE { .. } => "internal energy",
                            _ => "entropy",
                        },
                        bound: clamped.exp(),
                    });
                }
            } else {
                pinned_at_bound = 0;
            }
            lnt = clamped;
        }
        lambdas.push(relax.most_limited());
        steps += 1;

        if config.verbose {
            let mut head = format!("iter {steps:>2}: [{:.2}]", lnn.exp());
            for &j in active {
                head.push_str(&format!(" {:.2}", pi[j]));
            }
            if target.has_unknown_n() {
                head.push_str(&format!(" {dlnn:.2}"));
            }
            if target.has_unknown_t() {
                head.push_str(&format!(" {dlnt:.2}"));
            }
            eprintln!("{head}  ({eps:.3e})");
            for (s, sp) in model.species().iter().enumerate() {
                eprintln!(
                    " sp: {:<4} lnns: {:>8.4} dlnns: {:>10.6} lambda: {:>7.4}",
                    sp.name, lnns[s], dlnns[s], relax.per_species[s]
                );
            }
        }
    }

    let t = lnt.exp();
    let n_total: f64 = ns.iter().sum();
    let state = match target {
        Target::TP { t, p } => GasState {
            temperature: t,
            pressure: p,
            density: p / (n_total * R_UNIVERSAL * t),
            ns,
            n: n_total,
        },
        Target::RhoE { rho, .. } => GasState {
            temperature: t,
            pressure: rho * n_total * R_UNIVERSAL * t,
            density: rho,
            ns,
            n: n_total,
        },
        Target::PS { p, .. } => GasState {
            temperature: t,
            pressure: p,
            density: p / (n_total * R_UNIVERSAL * t),
            ns,
            n: n_total,
        },
    };
    let final_residual = history.last().copied().unwrap_or(f64::NAN);
    Ok((
        state,
        SolveReport {
            converged,
            iterations: steps,
            residual_history: history,
            final_residual,
            lambda_history: lambdas,
            element_potentials: pi,
            out_of_range,
        },
    ))
}
