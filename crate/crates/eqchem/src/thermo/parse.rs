//! Parser for the NASA Glenn 9-coefficient `thermo.inp` fixed-column format.
//!
//! Record layout (one species):
//! - line 1: name (from column 1) + free-text comment
//! - line 2: segment count, up to five element/count pairs (2-char symbol +
//!   6.2f count), phase flag, molar mass in g/mol, heat of formation
//! - per segment: T range + exponent line, then seven coefficients and the two
//!   integration constants spread over two lines of five 16-character fields
//!
//! Both `D` and `E` exponent characters are accepted.  Condensed-phase
//! records (nonzero phase flag) are skipped; the solver handles gases only.

use super::{SpeciesRecord, ThermoError, ThermoSegment};
use std::collections::BTreeMap;

const STANDARD_EXPONENTS: [f64; 8] = [-2.0, -1.0, 0.0, 1.0, 2.0, 3.0, 4.0, 0.0];

fn field(line: &str, start: usize, len: usize) -> &str {
    let end = (start + len).min(line.len());
    if start >= line.len() {
        ""
    } else {
        &line[start..end]
    }
}

fn parse_num(raw: &str, species: &str, line_no: usize) -> Result<f64, ThermoError> {
    let cleaned = raw.trim().replace(['D', 'd'], "E");
    cleaned.parse::<f64>().map_err(|_| ThermoError::Malformed {
        species: species.to_string(),
        line: line_no,
        reason: format!("unparseable number {raw:?}"),
    })
}

struct Lines<'a> {
    inner: std::str::Lines<'a>,
    no: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Option<(usize, &'a str)> {
        self.inner.next().map(|l| {
            self.no += 1;
            (self.no, l)
        })
    }
}

/// Parse a `thermo.inp`-format stream into species records.
pub fn parse_thermo_db(source: &str) -> Result<Vec<SpeciesRecord>, ThermoError> {
    let mut lines = Lines {
        inner: source.lines(),
        no: 0,
    };
    let mut records: Vec<SpeciesRecord> = Vec::new();

    // Optional file header: a line starting with "thermo" followed by the
    // global temperature-range line.
    let mut pending: Option<(usize, &str)> = None;
    while let Some((no, line)) = lines.next() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('!') || t.starts_with('#') {
            continue;
        }
        if t.to_ascii_lowercase().starts_with("thermo") {
            lines.next(); // global T-range line
            continue;
        }
        pending = Some((no, line));
        break;
    }

    loop {
        let (name_no, name_line) = match pending.take().or_else(|| lines.next()) {
            Some(v) => v,
            None => break,
        };
        let trimmed = name_line.trim();
        if trimmed.is_empty() || trimmed.starts_with('!') || trimmed.starts_with('#') {
            continue;
        }
        if trimmed.to_ascii_uppercase().starts_with("END") {
            break;
        }

        let name = field(name_line, 0, 18).trim().to_string();
        if name.is_empty() {
            return Err(ThermoError::Malformed {
                species: String::new(),
                line: name_no,
                reason: "blank species name".into(),
            });
        }

        let (meta_no, meta) = lines.next().ok_or_else(|| ThermoError::Malformed {
            species: name.clone(),
            line: name_no,
            reason: "missing metadata line".into(),
        })?;
        let nseg: usize = field(meta, 0, 2)
            .trim()
            .parse()
            .map_err(|_| ThermoError::Malformed {
                species: name.clone(),
                line: meta_no,
                reason: "bad segment count".into(),
            })?;
        if nseg == 0 {
            return Err(ThermoError::Malformed {
                species: name.clone(),
                line: meta_no,
                reason: "record has no temperature segments".into(),
            });
        }

        let mut elements = BTreeMap::new();
        let mut charge = 0.0f64;
        for k in 0..5 {
            let f = field(meta, 10 + 8 * k, 8);
            let sym = f.get(0..2).unwrap_or("").trim();
            if sym.is_empty() {
                continue;
            }
            let count = parse_num(f.get(2..).unwrap_or("0"), &name, meta_no)?;
            if count == 0.0 {
                continue;
            }
            if sym.eq_ignore_ascii_case("E") {
                // electron pseudo-element: count is electrons gained
                charge -= count;
            } else {
                *elements.entry(sym.to_ascii_uppercase()).or_insert(0.0) += count;
            }
        }

        let phase: i32 = field(meta, 50, 2).trim().parse().unwrap_or(0);
        let molar_mass = parse_num(field(meta, 52, 13), &name, meta_no)? * 1e-3;

        let mut segments = Vec::with_capacity(nseg);
        for _ in 0..nseg {
            let (rng_no, rng) = lines.next().ok_or_else(|| ThermoError::Malformed {
                species: name.clone(),
                line: meta_no,
                reason: "missing segment range line".into(),
            })?;
            let t_low = parse_num(field(rng, 0, 11), &name, rng_no)?;
            let t_high = parse_num(field(rng, 11, 11), &name, rng_no)?;
            for (k, &expect) in STANDARD_EXPONENTS.iter().enumerate() {
                let f = field(rng, 23, 40);
                let e = f
                    .get(5 * k..5 * k + 5)
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| parse_num(s, &name, rng_no))
                    .transpose()?
                    .unwrap_or(expect);
                if e != expect {
                    return Err(ThermoError::Malformed {
                        species: name.clone(),
                        line: rng_no,
                        reason: format!("unsupported polynomial exponent {e}"),
                    });
                }
            }

            let mut nums = Vec::with_capacity(10);
            for _ in 0..2 {
                let (c_no, cline) = lines.next().ok_or_else(|| ThermoError::Malformed {
                    species: name.clone(),
                    line: rng_no,
                    reason: "missing coefficient line".into(),
                })?;
                for k in 0..5 {
                    let f = field(cline, 16 * k, 16);
                    if f.trim().is_empty() {
                        nums.push(None);
                    } else {
                        nums.push(Some(parse_num(f, &name, c_no)?));
                    }
                }
            }
            // fields: a1..a5 | a6 a7 (filler) b1 b2
            let mut a = [0.0; 7];
            for (k, slot) in a.iter_mut().enumerate() {
                *slot = nums[k].ok_or_else(|| ThermoError::Malformed {
                    species: name.clone(),
                    line: rng_no,
                    reason: format!("missing coefficient a{}", k + 1),
                })?;
            }
            if let Some(filler) = nums[7] {
                if filler != 0.0 {
                    return Err(ThermoError::Malformed {
                        species: name.clone(),
                        line: rng_no,
                        reason: "nonzero eighth coefficient unsupported".into(),
                    });
                }
            }
            let b1 = nums[8].ok_or_else(|| ThermoError::Malformed {
                species: name.clone(),
                line: rng_no,
                reason: "missing integration constant b1".into(),
            })?;
            let b2 = nums[9].ok_or_else(|| ThermoError::Malformed {
                species: name.clone(),
                line: rng_no,
                reason: "missing integration constant b2".into(),
            })?;

            if !(t_low < t_high) {
                return Err(ThermoError::Malformed {
                    species: name.clone(),
                    line: rng_no,
                    reason: format!("bad temperature range [{t_low}, {t_high}]"),
                });
            }
            segments.push(ThermoSegment {
                t_low,
                t_high,
                a,
                b: [b1, b2],
            });
        }

        if phase != 0 {
            continue; // condensed-phase record: not representable, skip
        }
        if records.iter().any(|r| r.name == name) {
            return Err(ThermoError::DuplicateSpecies {
                name,
                line: name_no,
            });
        }
        if molar_mass <= 0.0 {
            return Err(ThermoError::Malformed {
                species: name.clone(),
                line: meta_no,
                reason: format!("nonpositive molar mass {molar_mass}"),
            });
        }
        for pair in segments.windows(2) {
            if (pair[1].t_low - pair[0].t_high).abs() > 0.5 {
                return Err(ThermoError::Malformed {
                    species: name.clone(),
                    line: name_no,
                    reason: format!(
                        "segments not contiguous: {} then {}",
                        pair[0].t_high, pair[1].t_low
                    ),
                });
            }
        }

        records.push(SpeciesRecord {
            name,
            molar_mass,
            elements,
            charge: charge.round() as i32,
            segments,
        });
    }

    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::BUNDLED_THERMO_DB;

    #[test]
    fn bundled_db_parses() {
        let db = parse_thermo_db(BUNDLED_THERMO_DB).unwrap();
        assert!(db.len() >= 15);
        let n2 = db.iter().find(|s| s.name == "N2").unwrap();
        assert!((n2.molar_mass - 0.0280134).abs() < 1e-9);
        assert_eq!(n2.elements.get("N"), Some(&2.0));
        assert_eq!(n2.charge, 0);
        assert_eq!(n2.segments.len(), 3);
        assert_eq!(n2.segments[0].t_low, 200.0);
        assert_eq!(n2.segments[0].t_high, 1000.0);
        assert_eq!(n2.segments[1].t_low, 1000.0);
    }

    #[test]
    fn electron_and_ion_charges() {
        let db = parse_thermo_db(BUNDLED_THERMO_DB).unwrap();
        let e = db.iter().find(|s| s.name == "e-").unwrap();
        assert!(e.elements.is_empty());
        assert_eq!(e.charge, -1);
        let nop = db.iter().find(|s| s.name == "NO+").unwrap();
        assert_eq!(nop.charge, 1);
        assert_eq!(nop.elements.get("N"), Some(&1.0));
        assert_eq!(nop.elements.get("O"), Some(&1.0));
        let om = db.iter().find(|s| s.name == "O-").unwrap();
        assert_eq!(om.charge, -1);
    }

    #[test]
    fn accepts_e_exponent_character() {
        let src = "\
TEST              synthetic
 2 none   X   1.00    0.00    0.00    0.00    0.00 0   10.0000000          0.000
    200.000   1000.0007 -2.0 -1.0  0.0  1.0  2.0  3.0  4.0  0.0            0.000
 0.000000000E+00 0.000000000E+00 2.500000000E+00 0.000000000E+00 0.000000000E+00
 0.000000000E+00 0.000000000E+00 0.000000000E+00 0.000000000E+00 1.000000000E+00
   1000.000   6000.0007 -2.0 -1.0  0.0  1.0  2.0  3.0  4.0  0.0            0.000
 0.000000000D+00 0.000000000D+00 2.500000000D+00 0.000000000D+00 0.000000000D+00
 0.000000000D+00 0.000000000D+00                 0.000000000D+00 1.000000000D+00
";
        let db = parse_thermo_db(src).unwrap();
        assert_eq!(db.len(), 1);
        assert_eq!(db[0].segments[0].a[2], 2.5);
        assert_eq!(db[0].segments[1].b[1], 1.0);
    }

    #[test]
    fn duplicate_species_rejected() {
        let one = "\
TEST              synthetic
 1 none   X   1.00    0.00    0.00    0.00    0.00 0   10.0000000          0.000
    200.000   1000.0007 -2.0 -1.0  0.0  1.0  2.0  3.0  4.0  0.0            0.000
 0.000000000D+00 0.000000000D+00 2.500000000D+00 0.000000000D+00 0.000000000D+00
 0.000000000D+00 0.000000000D+00                 0.000000000D+00 1.000000000D+00
";
        let twice = format!("{one}{one}");
        match parse_thermo_db(&twice) {
            Err(ThermoError::DuplicateSpecies { name, .. }) => assert_eq!(name, "TEST"),
            other => panic!("expected duplicate error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_number_names_species_and_line() {
        let src = "\
BAD               synthetic
 1 none   X   1.00    0.00    0.00    0.00    0.00 0   10.0000000          0.000
    200.000   1000.0007 -2.0 -1.0  0.0  1.0  2.0  3.0  4.0  0.0            0.000
 0.000000000D+00 0.0000zz000D+00 2.500000000D+00 0.000000000D+00 0.000000000D+00
 0.000000000D+00 0.000000000D+00                 0.000000000D+00 1.000000000D+00
";
        match parse_thermo_db(src) {
            Err(ThermoError::Malformed { species, line, .. }) => {
                assert_eq!(species, "BAD");
                assert_eq!(line, 4);
            }
            other => panic!("expected malformed error, got {other:?}"),
        }
    }

    #[test]
    fn condensed_phase_records_are_skipped() {
        let src = "\
SOLID(a)          synthetic condensed
 1 none   X   1.00    0.00    0.00    0.00    0.00 1   10.0000000          0.000
    200.000   1000.0007 -2.0 -1.0  0.0  1.0  2.0  3.0  4.0  0.0            0.000
 0.000000000D+00 0.000000000D+00 2.500000000D+00 0.000000000D+00 0.000000000D+00
 0.000000000D+00 0.000000000D+00                 0.000000000D+00 1.000000000D+00
";
        assert!(parse_thermo_db(src).unwrap().is_empty());
    }
}
