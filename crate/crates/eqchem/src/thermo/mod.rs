//! Species thermodynamic data and property evaluation.
//!
//! Standard-state properties come from NASA Glenn 9-coefficient polynomial
//! fits, evaluated per temperature segment:
//!
//! ```text
//! Cp/Ru   = a1/T^2 + a2/T + a3 + a4 T + a5 T^2 + a6 T^3 + a7 T^4
//! H/(RuT) = -a1/T^2 + a2 ln(T)/T + a3 + a4 T/2 + a5 T^2/3 + a6 T^3/4 + a7 T^4/5 + b1/T
//! S/Ru    = -a1/(2T^2) - a2/T + a3 ln(T) + a4 T + a5 T^2/2 + a6 T^3/3 + a7 T^4/4 + b2
//! ```
//!
//! Temperatures outside a species' fitted range are clamped to the nearest
//! segment bound and flagged, never extrapolated.

mod mixture;
mod parse;

pub use mixture::{
    mixture_props, n_from_x, x_from_n, y_from_n, GasState, MixtureModel, MixtureProps,
};
pub use parse::parse_thermo_db;

use crate::constants::{P_STANDARD, R_UNIVERSAL};
use std::collections::BTreeMap;

/// Errors from thermodynamic data handling.
#[derive(Debug, thiserror::Error)]
pub enum ThermoError {
    #[error("line {line}: {reason} (species {species:?})")]
    Malformed {
        species: String,
        line: usize,
        reason: String,
    },
    #[error("duplicate species {name:?} at line {line}")]
    DuplicateSpecies { name: String, line: usize },
    #[error("unknown species {name:?}; available: {available}")]
    UnknownSpecies { name: String, available: String },
    #[error("species {species:?} carries no tracked element or charge")]
    EmptySpecies { species: String },
    #[error("nonpositive temperature {0} K")]
    NonpositiveTemperature(f64),
    #[error("species entropy undefined for mole fraction {0}")]
    BadMoleFraction(f64),
    #[error("nonpositive pressure {0} Pa")]
    NonpositivePressure(f64),
    #[error("negative composition entry {value} at index {index}")]
    NegativeComposition { index: usize, value: f64 },
}

/// Property value plus a flag marking clamped out-of-range evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prop {
    pub value: f64,
    pub out_of_range: bool,
}

/// One temperature interval of a 9-coefficient polynomial fit.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermoSegment {
    /// Lower temperature bound, K.
    pub t_low: f64,
    /// Upper temperature bound, K.
    pub t_high: f64,
    /// Polynomial coefficients for Cp/Ru.
    pub a: [f64; 7],
    /// Integration constants for H and S.
    pub b: [f64; 2],
}

impl ThermoSegment {
    /// Cp/Ru at `t`.
    pub fn cp_r(&self, t: f64) -> f64 {
        let a = &self.a;
        a[0] / (t * t) + a[1] / t + a[2] + t * (a[3] + t * (a[4] + t * (a[5] + t * a[6])))
    }

    /// H/(Ru T) at `t`.
    pub fn h_rt(&self, t: f64) -> f64 {
        let a = &self.a;
        -a[0] / (t * t)
            + a[1] * t.ln() / t
            + a[2]
            + t * (a[3] / 2.0 + t * (a[4] / 3.0 + t * (a[5] / 4.0 + t * a[6] / 5.0)))
            + self.b[0] / t
    }

    /// S/Ru at `t`.
    pub fn s_r(&self, t: f64) -> f64 {
        let a = &self.a;
        -a[0] / (2.0 * t * t) - a[1] / t
            + a[2] * t.ln()
            + t * (a[3] + t * (a[4] / 2.0 + t * (a[5] / 3.0 + t * a[6] / 4.0)))
            + self.b[1]
    }
}

/// One chemical species: identity, elemental makeup, and thermo polynomials.
#[derive(Debug, Clone)]
pub struct SpeciesRecord {
    pub name: String,
    /// Molar mass, kg/mol.
    pub molar_mass: f64,
    /// Element symbol -> atom count. The charge pseudo-element is excluded.
    pub elements: BTreeMap<String, f64>,
    /// Net charge: 0 for neutrals, -1 for the electron, +1 for singly ionised.
    pub charge: i32,
    /// Fit segments, ascending and contiguous in temperature.
    pub segments: Vec<ThermoSegment>,
}

impl SpeciesRecord {
    /// Clamp `t` into the fitted range; flag when clamping occurred.
    fn clamped_t(&self, t: f64) -> (f64, bool) {
        let lo = self.segments.first().map(|s| s.t_low).unwrap_or(0.0);
        let hi = self.segments.last().map(|s| s.t_high).unwrap_or(f64::MAX);
        if t < lo {
            (lo, true)
        } else if t > hi {
            (hi, true)
        } else {
            (t, false)
        }
    }

    fn segment_at(&self, t: f64) -> &ThermoSegment {
        self.segments
            .iter()
            .find(|s| t <= s.t_high)
            .unwrap_or_else(|| self.segments.last().expect("at least one segment"))
    }

    /// Standard-state molar heat capacity, J/mol/K.
    pub fn cp0(&self, t: f64) -> Prop {
        let (te, flag) = self.clamped_t(t);
        Prop {
            value: self.segment_at(te).cp_r(te) * R_UNIVERSAL,
            out_of_range: flag,
        }
    }

    /// Standard-state molar enthalpy (includes formation enthalpy), J/mol.
    pub fn h0(&self, t: f64) -> Prop {
        let (te, flag) = self.clamped_t(t);
        Prop {
            value: self.segment_at(te).h_rt(te) * R_UNIVERSAL * te,
            out_of_range: flag,
        }
    }

    /// Standard-state molar entropy at `P_STANDARD`, J/mol/K.
    pub fn s0(&self, t: f64) -> Prop {
        let (te, flag) = self.clamped_t(t);
        Prop {
            value: self.segment_at(te).s_r(te) * R_UNIVERSAL,
            out_of_range: flag,
        }
    }

    /// Standard-state molar Gibbs energy h0 - T s0, J/mol.
    pub fn g0(&self, t: f64) -> Prop {
        let h = self.h0(t);
        let s = self.s0(t);
        Prop {
            value: h.value - t * s.value,
            out_of_range: h.out_of_range || s.out_of_range,
        }
    }

    /// Molar entropy at mole fraction `x_s` and mixture pressure `p`:
    /// S = S0 - Ru ln(x_s) - Ru ln(p/p0).
    pub fn species_entropy(&self, t: f64, p: f64, x_s: f64) -> Result<Prop, ThermoError> {
        if t <= 0.0 {
            return Err(ThermoError::NonpositiveTemperature(t));
        }
        if p <= 0.0 {
            return Err(ThermoError::NonpositivePressure(p));
        }
        if !(x_s > 0.0 && x_s <= 1.0) {
            return Err(ThermoError::BadMoleFraction(x_s));
        }
        let s = self.s0(t);
        Ok(Prop {
            value: s.value - R_UNIVERSAL * x_s.ln() - R_UNIVERSAL * (p / P_STANDARD).ln(),
            out_of_range: s.out_of_range,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::BUNDLED_THERMO_DB;
    use approx::assert_relative_eq;

    fn db() -> Vec<SpeciesRecord> {
        parse_thermo_db(BUNDLED_THERMO_DB).expect("bundled db parses")
    }

    fn species(name: &str) -> SpeciesRecord {
        db().into_iter().find(|s| s.name == name).unwrap()
    }

    #[test]
    fn n2_standard_state() {
        let n2 = species("N2");
        // independently evaluated from the published coefficients
        assert_relative_eq!(n2.cp0(298.15).value, 29.124, epsilon = 0.1);
        assert!(n2.h0(298.15).value.abs() < 50.0);
        assert_relative_eq!(n2.s0(298.15).value, 191.609, epsilon = 0.2);
        assert_relative_eq!(n2.g0(298.15).value, -57_128.1, epsilon = 30.0);
    }

    #[test]
    fn g0_is_h0_minus_t_s0() {
        for sp in db() {
            for &t in &[250.0, 298.15, 1000.0, 2500.0, 5500.0] {
                let g = sp.g0(t).value;
                let h = sp.h0(t).value;
                let s = sp.s0(t).value;
                assert_eq!(g, h - t * s, "{} at {t} K", sp.name);
            }
        }
    }

    #[test]
    fn segment_join_continuity() {
        for sp in db() {
            for pair in sp.segments.windows(2) {
                let t = pair[0].t_high;
                let below = pair[0].cp_r(t);
                let above = pair[1].cp_r(t);
                assert!(
                    (below - above).abs() / below.abs() < 1e-4,
                    "{} cp discontinuous at {t} K: {below} vs {above}",
                    sp.name
                );
            }
        }
    }

    #[test]
    fn derivative_consistency() {
        // d(h0)/dT = cp0 and d(s0)/dT = cp0/T by central finite difference
        let mut u: u64 = 0x9e3779b97f4a7c15;
        let mut next = move || {
            u ^= u << 13;
            u ^= u >> 7;
            u ^= u << 17;
            (u >> 11) as f64 / (1u64 << 53) as f64
        };
        for sp in db() {
            let lo = sp.segments.first().unwrap().t_low;
            let hi = sp.segments.last().unwrap().t_high;
            for _ in 0..50 {
                let t = lo + (hi - lo) * (0.01 + 0.98 * next());
                let dt = t * 1e-6;
                if sp.clamped_t(t + dt).1 || sp.clamped_t(t - dt).1 {
                    continue;
                }
                let dh = (sp.h0(t + dt).value - sp.h0(t - dt).value) / (2.0 * dt);
                let ds = (sp.s0(t + dt).value - sp.s0(t - dt).value) / (2.0 * dt);
                let cp = sp.cp0(t).value;
                assert_relative_eq!(dh, cp, max_relative = 1e-5);
                assert_relative_eq!(ds, cp / t, max_relative = 1e-5);
            }
        }
    }

    #[test]
    fn out_of_range_is_clamped_and_flagged() {
        let n2 = species("N2");
        let low = n2.cp0(10.0);
        assert!(low.out_of_range);
        assert_eq!(low.value, n2.cp0(200.0).value);
        let high = n2.cp0(30000.0);
        assert!(high.out_of_range);
        assert_eq!(high.value, n2.cp0(20000.0).value);
        assert!(!n2.cp0(298.15).out_of_range);
    }

    #[test]
    fn species_entropy_mixing_and_pressure_terms() {
        let n2 = species("N2");
        let t = 500.0;
        let s0 = n2.s0(t).value;
        assert_eq!(n2.species_entropy(t, P_STANDARD, 1.0).unwrap().value, s0);
        assert_relative_eq!(
            n2.species_entropy(t, P_STANDARD, 0.5).unwrap().value,
            s0 + R_UNIVERSAL * 2.0_f64.ln(),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            n2.species_entropy(t, 2.0 * P_STANDARD, 1.0).unwrap().value,
            s0 - R_UNIVERSAL * 2.0_f64.ln(),
            max_relative = 1e-14
        );
        assert!(n2.species_entropy(t, P_STANDARD, 0.0).is_err());
    }
}
