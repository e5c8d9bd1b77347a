//! Gas mixtures: the element-constraint matrix, thermodynamic state, and
//! composition bookkeeping in specific molarities (mol per kg of mixture).

use super::{SpeciesRecord, ThermoError};
use crate::constants::R_UNIVERSAL;

/// Name of the charge-balance pseudo-element row.
pub const CHARGE_ELEMENT: &str = "charge";

/// An ordered species set with its element-constraint matrix.
///
/// Row `j` of `a` holds the atoms of element `j` per molecule of each species;
/// when any species is charged, a final pseudo-element row holds the signed
/// charges so that electroneutrality rides along as an ordinary constraint.
/// Immutable once built; safe to share across concurrent solves.
#[derive(Debug, Clone)]
pub struct MixtureModel {
    species: Vec<SpeciesRecord>,
    element_names: Vec<String>,
    a: Vec<Vec<f64>>,
}

impl MixtureModel {
    pub fn new(species: Vec<SpeciesRecord>) -> Result<Self, ThermoError> {
        let mut element_names: Vec<String> = Vec::new();
        for sp in &species {
            if sp.elements.is_empty() && sp.charge == 0 {
                return Err(ThermoError::EmptySpecies {
                    species: sp.name.clone(),
                });
            }
            for el in sp.elements.keys() {
                if !element_names.iter().any(|e| e == el) {
                    element_names.push(el.clone());
                }
            }
        }
        let charged = species.iter().any(|s| s.charge != 0);
        if charged {
            element_names.push(CHARGE_ELEMENT.to_string());
        }
        let mut a = vec![vec![0.0; species.len()]; element_names.len()];
        for (s, sp) in species.iter().enumerate() {
            for (j, el) in element_names.iter().enumerate() {
                a[j][s] = if el == CHARGE_ELEMENT {
                    sp.charge as f64
                } else {
                    sp.elements.get(el).copied().unwrap_or(0.0)
                };
            }
        }
        Ok(Self {
            species,
            element_names,
            a,
        })
    }

    /// Build a model by looking up `names` in a parsed database.
    pub fn from_names(db: &[SpeciesRecord], names: &[&str]) -> Result<Self, ThermoError> {
        let mut picked = Vec::with_capacity(names.len());
        for &n in names {
            let sp = db
                .iter()
                .find(|s| s.name == n)
                .ok_or_else(|| ThermoError::UnknownSpecies {
                    name: n.to_string(),
                    available: db
                        .iter()
                        .map(|s| s.name.as_str())
                        .collect::<Vec<_>>()
                        .join(", "),
                })?;
            picked.push(sp.clone());
        }
        Self::new(picked)
    }

    pub fn species(&self) -> &[SpeciesRecord] {
        &self.species
    }

    pub fn n_species(&self) -> usize {
        self.species.len()
    }

    pub fn element_names(&self) -> &[String] {
        &self.element_names
    }

    pub fn n_elements(&self) -> usize {
        self.element_names.len()
    }

    /// Constraint-matrix entry: atoms of element `j` in species `s`
    /// (signed charge for the pseudo-element row).
    pub fn a(&self, j: usize, s: usize) -> f64 {
        self.a[j][s]
    }

    /// Element totals `A . ns` for a composition vector.
    pub fn element_totals(&self, ns: &[f64]) -> Vec<f64> {
        self.a
            .iter()
            .map(|row| row.iter().zip(ns).map(|(a, n)| a * n).sum())
            .collect()
    }

    pub fn species_index(&self, name: &str) -> Option<usize> {
        self.species.iter().position(|s| s.name == name)
    }

    /// Mean molar mass of a mole-fraction composition, kg/mol.
    pub fn mean_molar_mass(&self, x: &[f64]) -> f64 {
        let sum: f64 = x.iter().sum();
        x.iter()
            .zip(&self.species)
            .map(|(xs, sp)| xs * sp.molar_mass)
            .sum::<f64>()
            / sum
    }
}

/// Thermodynamic state of a mixture.
///
/// `ns` are specific molarities (mol per kg of mixture); `n` is their total,
/// the reciprocal of the mixture molar mass.  A complete state satisfies the
/// ideal-gas relation `p = rho n Ru T`.
#[derive(Debug, Clone)]
pub struct GasState {
    /// Temperature, K.
    pub temperature: f64,
    /// Pressure, Pa.
    pub pressure: f64,
    /// Density, kg/m3.
    pub density: f64,
    /// Specific molarities, mol/kg, aligned with the model's species order.
    pub ns: Vec<f64>,
    /// Total specific molarity, mol/kg.
    pub n: f64,
}

impl GasState {
    /// Assemble a state from (T, p, ns), deriving density from the ideal-gas law.
    pub fn from_tp(temperature: f64, pressure: f64, ns: Vec<f64>) -> Self {
        let n: f64 = ns.iter().sum();
        let density = pressure / (n * R_UNIVERSAL * temperature);
        Self {
            temperature,
            pressure,
            density,
            ns,
            n,
        }
    }

    /// Mole fractions X_s = n_s / n.
    pub fn mole_fractions(&self) -> Vec<f64> {
        self.ns.iter().map(|v| v / self.n).collect()
    }

    /// Mass fractions Y_s = M_s n_s.
    pub fn mass_fractions(&self, model: &MixtureModel) -> Vec<f64> {
        self.ns
            .iter()
            .zip(model.species())
            .map(|(n, sp)| n * sp.molar_mass)
            .collect()
    }
}

fn check_nonnegative(v: &[f64]) -> Result<(), ThermoError> {
    for (i, &x) in v.iter().enumerate() {
        if x < 0.0 || !x.is_finite() {
            return Err(ThermoError::NegativeComposition { index: i, value: x });
        }
    }
    Ok(())
}

/// Mole fractions from specific molarities.
pub fn x_from_n(ns: &[f64]) -> Result<Vec<f64>, ThermoError> {
    check_nonnegative(ns)?;
    let n: f64 = ns.iter().sum();
    Ok(ns.iter().map(|v| v / n).collect())
}

/// Mass fractions from specific molarities.
pub fn y_from_n(ns: &[f64], model: &MixtureModel) -> Result<Vec<f64>, ThermoError> {
    check_nonnegative(ns)?;
    let mass: f64 = ns
        .iter()
        .zip(model.species())
        .map(|(n, sp)| n * sp.molar_mass)
        .sum();
    Ok(ns
        .iter()
        .zip(model.species())
        .map(|(n, sp)| n * sp.molar_mass / mass)
        .collect())
}

/// Specific molarities from (possibly unnormalized) mole fractions.
pub fn n_from_x(x: &[f64], model: &MixtureModel) -> Result<Vec<f64>, ThermoError> {
    check_nonnegative(x)?;
    let m0 = model.mean_molar_mass(x);
    let sum: f64 = x.iter().sum();
    Ok(x.iter().map(|xs| xs / sum / m0).collect())
}

/// Mixture thermodynamic properties, all per unit mass.
#[derive(Debug, Clone, Copy)]
pub struct MixtureProps {
    /// Specific internal energy, J/kg.
    pub e: f64,
    /// Specific enthalpy, J/kg.
    pub h: f64,
    /// Specific entropy, J/kg/K.
    pub s: f64,
    /// Frozen specific heat at constant pressure, J/kg/K.
    pub cp: f64,
    /// Frozen specific heat at constant volume, J/kg/K.
    pub cv: f64,
    /// Mixture molar mass, kg/mol.
    pub m_mix: f64,
    /// Any species was evaluated outside its fitted temperature range.
    pub out_of_range: bool,
}

/// Evaluate mixture properties at a given state.
///
/// Entropy sums `n_s S_s` with the mixing term written as
/// `-Ru n_s ln(n_s/n)`, so species with `n_s = 0` contribute nothing.
pub fn mixture_props(model: &MixtureModel, state: &GasState) -> MixtureProps {
    let t = state.temperature;
    let lnpr = (state.pressure / crate::constants::P_STANDARD).ln();
    let mut e = 0.0;
    let mut h = 0.0;
    let mut s = 0.0;
    let mut cp = 0.0;
    let mut flag = false;
    for (sp, &nsv) in model.species().iter().zip(&state.ns) {
        if nsv == 0.0 {
            continue;
        }
        let hs = sp.h0(t);
        let ss = sp.s0(t);
        let cps = sp.cp0(t);
        flag |= hs.out_of_range || ss.out_of_range || cps.out_of_range;
        h += nsv * hs.value;
        e += nsv * (hs.value - R_UNIVERSAL * t);
        s += nsv * (ss.value - R_UNIVERSAL * ((nsv / state.n).ln() + lnpr));
        cp += nsv * cps.value;
    }
    let n: f64 = state.ns.iter().sum();
    MixtureProps {
        e,
        h,
        s,
        cp,
        cv: cp - n * R_UNIVERSAL,
        m_mix: 1.0 / n,
        out_of_range: flag,
    }
}

/// Frozen-composition sound speed sqrt(gamma n Ru T), m/s.
pub fn frozen_sound_speed(model: &MixtureModel, state: &GasState) -> f64 {
    let props = mixture_props(model, state);
    let gamma = props.cp / props.cv;
    (gamma * state.n * R_UNIVERSAL * state.temperature).sqrt()
}
