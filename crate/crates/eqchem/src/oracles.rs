//! Independent analytic oracles used to verify the equilibrium solver.
//!
//! These routines share no residual or Jacobian code with the solver: the
//! carbon dioxide dissociation system is reduced to a single-reaction cubic
//! in the progress variable, and the dice-roll counter is plain integer
//! combinatorics.  Tests compare their output against the full solver.

use crate::constants::R_UNIVERSAL;
use num_bigint::BigUint;
use num_traits::{One, Zero};

/// Errors from oracle evaluation.
#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("no root of the dissociation cubic in [0, 1] (Kp = {kp}, p = {p} Pa)")]
    NoPhysicalRoot { kp: f64, p: f64 },
    #[error("reaction progress {0} outside [0, 1]")]
    BadAlpha(f64),
}

/// Equilibrium constant of CO2 <-> CO + 1/2 O2:
/// `Kp = exp[(G0_CO2 - G0_CO - 1/2 G0_O2) / (Ru T)]`.
pub fn co2_kp(t: f64, g0_co2: f64, g0_co: f64, g0_o2: f64) -> f64 {
    ((g0_co2 - g0_co - 0.5 * g0_o2) / (R_UNIVERSAL * t)).exp()
}

/// Reaction progress from the dissociation cubic
/// `alpha^3 (1 - (p/p0)/Kp^2) - 3 alpha + 2 = 0`, unique real root in [0, 1].
///
/// Solved by safeguarded Newton-bisection to 1e-14; the cubic is +2 at
/// alpha = 0 and negative at alpha = 1 whenever dissociation is partial,
/// which guarantees the bracket.
pub fn co2_alpha(kp: f64, p: f64) -> Result<f64, OracleError> {
    let c3 = 1.0 - (p / crate::constants::P_STANDARD) / (kp * kp);
    let f = |a: f64| c3 * a * a * a - 3.0 * a + 2.0;
    let df = |a: f64| 3.0 * c3 * a * a - 3.0;

    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(OracleError::NoPhysicalRoot { kp, p });
    }
    let mut a = 2.0 / 3.0; // exact root when the cubic term vanishes
    for _ in 0..200 {
        let fa = f(a);
        if fa.abs() < 1e-14 {
            return Ok(a);
        }
        if fa.signum() == flo.signum() {
            lo = a;
        } else {
            hi = a;
        }
        let d = df(a);
        let newton = a - fa / d;
        a = if d != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (hi - lo) < 1e-15 {
            return Ok(a);
        }
    }
    Ok(a)
}

/// Mole fractions of the CO2/CO/O2 mixture at reaction progress `alpha`:
/// starting from pure CO2, the totals are (1-a, a, a/2) over (1 + a/2).
pub fn co2_mole_fractions(alpha: f64) -> Result<(f64, f64, f64), OracleError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(OracleError::BadAlpha(alpha));
    }
    let denom = 1.0 + 0.5 * alpha;
    let x_co2 = (1.0 - alpha) / denom;
    let x_co = alpha / denom;
    let x_o2 = 1.0 - (x_co2 + x_co); // exact complement, sums to 1 by construction
    Ok((x_co2, x_co, x_o2))
}

fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Number of ways `n` six-sided dice can total `S`:
/// `sum_k (-1)^k C(n,k) C(S-6k-1, n-1)` for `k = 0..floor((S-n)/6)`.
/// Returns 0 outside the representable range `n <= S <= 6n`.
pub fn dice_microstates(n: u64, total: u64) -> BigUint {
    if n == 0 || total < n || total > 6 * n {
        return BigUint::zero();
    }
    let kmax = (total - n) / 6;
    let mut acc = BigUint::zero();
    let mut negative = BigUint::zero();
    for k in 0..=kmax {
        let term = binomial(n, k) * binomial(total - 6 * k - 1, n - 1);
        if k % 2 == 0 {
            acc += term;
        } else {
            negative += term;
        }
    }
    acc - negative
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kp_unity_for_zero_delta_g() {
        assert_eq!(co2_kp(3000.0, 100.0, 50.0, 100.0), 1.0);
    }

    #[test]
    fn alpha_degenerate_linear_case() {
        // Kp^2 = p/p0 kills the cubic term: -3a + 2 = 0
        let p = crate::constants::P_STANDARD * 4.0;
        let a = co2_alpha(2.0, p).unwrap();
        assert!((a - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn alpha_full_dissociation_limit() {
        // Kp -> inf: a^3 - 3a + 2 = (a-1)^2 (a+2)
        let a = co2_alpha(1e12, crate::constants::P_STANDARD).unwrap();
        assert!((a - 1.0).abs() < 1e-6);
    }

    #[test]
    fn mole_fractions_limits() {
        assert_eq!(co2_mole_fractions(0.0).unwrap(), (1.0, 0.0, 0.0));
        let (c, co, o2) = co2_mole_fractions(1.0).unwrap();
        assert_eq!(c, 0.0);
        assert!((co - 2.0 / 3.0).abs() < 1e-15);
        assert!((o2 - 1.0 / 3.0).abs() < 1e-15);
        let (c, co, o2) = co2_mole_fractions(2.0 / 3.0).unwrap();
        assert!((c - 0.25).abs() < 1e-15);
        assert!((co - 0.5).abs() < 1e-15);
        assert!((o2 - 0.25).abs() < 1e-15);
        assert!(co2_mole_fractions(1.5).is_err());
    }

    #[test]
    fn mole_fractions_sum_exactly_one() {
        for k in 0..=100 {
            let (a, b, c) = co2_mole_fractions(k as f64 / 100.0).unwrap();
            assert_eq!(a + b + c, 1.0);
        }
    }

    #[test]
    fn two_dice_counts() {
        assert_eq!(dice_microstates(2, 7), BigUint::from(6u32));
        assert_eq!(dice_microstates(2, 2), BigUint::from(1u32));
        assert_eq!(dice_microstates(2, 12), BigUint::from(1u32));
        assert_eq!(dice_microstates(2, 13), BigUint::zero());
        assert_eq!(dice_microstates(2, 1), BigUint::zero());
    }

    #[test]
    fn totals_sum_to_six_to_the_n() {
        for n in 1..=6u64 {
            let mut acc = BigUint::zero();
            for s in n..=6 * n {
                acc += dice_microstates(n, s);
            }
            let mut expect = BigUint::one();
            for _ in 0..n {
                expect *= BigUint::from(6u32);
            }
            assert_eq!(acc, expect, "n = {n}");
        }
    }

    #[test]
    fn microstate_symmetry() {
        for n in 1..=5u64 {
            for s in n..=6 * n {
                assert_eq!(
                    dice_microstates(n, s),
                    dice_microstates(n, 7 * n - s),
                    "n={n} S={s}"
                );
            }
        }
    }

    #[test]
    fn large_n_is_exact_integer_arithmetic() {
        // n = 1000 at the central total; value has hundreds of digits
        let v = dice_microstates(1000, 3500);
        assert!(v.to_string().len() > 200);
    }
}
