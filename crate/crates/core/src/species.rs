//! Species and transition-line data for ⁶Li (qubit) and ¹³³Cs (messenger).
//!
//! Linewidths and saturation intensities are the usual alkali table values.
//! Saturation intensities are the two-level values `ħω³Γ/(12πc²)`, which is
//! the convention the far-detuned potential `V = (ħΓ/8)(I/I_sat)/(Δ/Γ)` expects.
//! All of them can be replaced through an override file, see [`SpeciesOverrides`].

use std::fmt;

use serde::Serialize;

use crate::constants::{AMU, SPEED_OF_LIGHT, TWO_PI};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum LineLabel {
    /// S1/2 -> P1/2
    D1,
    /// S1/2 -> P3/2
    D2,
}

impl fmt::Display for LineLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LineLabel::D1 => f.write_str("D1"),
            LineLabel::D2 => f.write_str("D2"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransitionLine {
    pub label: LineLabel,
    /// Vacuum wavelength, m.
    pub wavelength: f64,
    /// ω₀ = 2πc/λ₀, rad/s.
    pub angular_frequency: f64,
    /// Natural linewidth Γ, rad/s.
    pub linewidth: f64,
    /// Two-level saturation intensity, W/m².
    pub saturation_intensity: f64,
}

impl TransitionLine {
    pub fn new(label: LineLabel, wavelength: f64, linewidth: f64, saturation_intensity: f64) -> Self {
        TransitionLine {
            label,
            wavelength,
            angular_frequency: TWO_PI * SPEED_OF_LIGHT / wavelength,
            linewidth,
            saturation_intensity,
        }
    }
}

/// Ground-state hyperfine label `|F, m_F⟩`, stored as doubled integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HyperfineState {
    pub f_twice: u8,
    pub mf_twice: i8,
}

impl HyperfineState {
    pub const fn new(f_twice: u8, mf_twice: i8) -> Self {
        HyperfineState { f_twice, mf_twice }
    }

    pub fn f(&self) -> f64 {
        f64::from(self.f_twice) / 2.0
    }

    pub fn m_f(&self) -> f64 {
        f64::from(self.mf_twice) / 2.0
    }
}

fn half_integer(twice: i32) -> String {
    if twice % 2 == 0 {
        format!("{}", twice / 2)
    } else {
        format!("{}/2", twice)
    }
}

impl fmt::Display for HyperfineState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|F={},m_F={}>", half_integer(i32::from(self.f_twice)), half_integer(i32::from(self.mf_twice)))
    }
}

/// Logical `|1⟩` and `|0⟩` assignments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QubitLabels {
    pub one: HyperfineState,
    pub zero: HyperfineState,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Species {
    pub name: String,
    /// Mass, kg.
    pub mass: f64,
    pub lines: Vec<TransitionLine>,
    pub qubit_states: QubitLabels,
}

impl Species {
    pub fn line(&self, label: LineLabel) -> Option<&TransitionLine> {
        self.lines.iter().find(|l| l.label == label)
    }

    /// The strongest line, D2 for alkalis.
    pub fn dominant_line(&self) -> &TransitionLine {
        self.line(LineLabel::D2).unwrap_or(&self.lines[0])
    }

    /// `(D1, D2)`: the two excited fine-structure components.
    pub fn fine_structure_pair(&self) -> Option<(&TransitionLine, &TransitionLine)> {
        Some((self.line(LineLabel::D1)?, self.line(LineLabel::D2)?))
    }

    pub fn mass_amu(&self) -> f64 {
        self.mass / AMU
    }
}

pub const LI6: &str = "Li6";
pub const CS133: &str = "Cs133";

fn lithium6() -> Species {
    let gamma = TWO_PI * 5.8724e6;
    Species {
        name: LI6.to_string(),
        mass: 6.015_122_3 * AMU,
        lines: vec![
            TransitionLine::new(LineLabel::D1, 670.992_421e-9, gamma, 25.4),
            TransitionLine::new(LineLabel::D2, 670.977_338e-9, gamma, 25.4),
        ],
        qubit_states: QubitLabels { one: HyperfineState::new(3, -1), zero: HyperfineState::new(1, 1) },
    }
}

fn cesium133() -> Species {
    Species {
        name: CS133.to_string(),
        mass: 132.905_451_931 * AMU,
        lines: vec![
            TransitionLine::new(LineLabel::D1, 894.592_959_86e-9, TWO_PI * 4.5612e6, 8.327),
            TransitionLine::new(LineLabel::D2, 852.347_275_82e-9, TWO_PI * 5.2227e6, 11.023),
        ],
        qubit_states: QubitLabels { one: HyperfineState::new(8, 0), zero: HyperfineState::new(6, 0) },
    }
}

pub fn lookup_species(name: &str) -> Result<Species> {
    match name {
        LI6 => Ok(lithium6()),
        CS133 => Ok(cesium133()),
        other => Err(Error::UnknownSpecies(other.to_string())),
    }
}

/// Laser detuning `Δ = 2πc/λ − ω₀` in rad/s; positive is blue of the line.
pub fn detuning(line: &TransitionLine, laser_wavelength: f64) -> f64 {
    TWO_PI * SPEED_OF_LIGHT / laser_wavelength - line.angular_frequency
}

/// Parsed species override file.
///
/// The file is TOML with dotted keys, e.g.
///
/// ```toml
/// Li6.D2.gamma_hz = 5.8724e6
/// Li6.D2.isat_w_m2 = 25.4
/// Cs133.mass_amu = 132.905
/// ```
#[derive(Debug, Clone, Default)]
pub struct SpeciesOverrides {
    table: toml::Table,
}

impl SpeciesOverrides {
    pub fn parse(text: &str) -> Result<Self> {
        let table: toml::Table =
            text.parse().map_err(|e: toml::de::Error| Error::Config(format!("species override file: {e}")))?;
        Self::from_table(table)
    }

    /// Validates an already-parsed table of the same shape.
    pub fn from_table(table: toml::Table) -> Result<Self> {
        for (species, value) in &table {
            if species != LI6 && species != CS133 {
                return Err(Error::UnknownSpecies(species.clone()));
            }
            let Some(inner) = value.as_table() else {
                return Err(Error::Config(format!("`{species}` must be a table of overrides")));
            };
            for (key, v) in inner {
                match key.as_str() {
                    "mass_amu" => {
                        number(v, &format!("{species}.mass_amu"))?;
                    }
                    "D1" | "D2" => {
                        let Some(line) = v.as_table() else {
                            return Err(Error::Config(format!("`{species}.{key}` must be a table")));
                        };
                        for (lk, lv) in line {
                            if lk != "gamma_hz" && lk != "isat_w_m2" {
                                return Err(Error::Config(format!("unknown key `{species}.{key}.{lk}`")));
                            }
                            number(lv, &format!("{species}.{key}.{lk}"))?;
                        }
                    }
                    _ => return Err(Error::Config(format!("unknown key `{species}.{key}`"))),
                }
            }
        }
        Ok(SpeciesOverrides { table })
    }

    pub fn table(&self) -> &toml::Table {
        &self.table
    }

    pub fn lookup(&self, name: &str) -> Result<Species> {
        let mut species = lookup_species(name)?;
        let Some(entry) = self.table.get(name).and_then(|v| v.as_table()) else {
            return Ok(species);
        };
        if let Some(m) = entry.get("mass_amu") {
            species.mass = number(m, "mass_amu")? * AMU;
        }
        for line in species.lines.iter_mut() {
            let Some(over) = entry.get(&line.label.to_string()).and_then(|v| v.as_table()) else {
                continue;
            };
            if let Some(g) = over.get("gamma_hz") {
                line.linewidth = TWO_PI * number(g, "gamma_hz")?;
            }
            if let Some(i) = over.get("isat_w_m2") {
                line.saturation_intensity = number(i, "isat_w_m2")?;
            }
        }
        Ok(species)
    }
}

fn number(v: &toml::Value, key: &str) -> Result<f64> {
    let x = match v {
        toml::Value::Float(f) => *f,
        toml::Value::Integer(i) => *i as f64,
        _ => return Err(Error::Config(format!("`{key}` must be a number"))),
    };
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Config(format!("`{key}` must be positive")));
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::HBAR;
    use std::f64::consts::PI;

    fn round_sig(x: f64, figs: i32) -> f64 {
        let scale = 10f64.powi(figs - 1 - x.abs().log10().floor() as i32);
        (x * scale).round() / scale
    }

    #[test]
    fn dominant_lines() {
        let li = lookup_species("Li6").unwrap();
        assert!((li.dominant_line().wavelength * 1e9 - 671.0).abs() < 0.1);
        let cs = lookup_species("Cs133").unwrap();
        assert!((cs.dominant_line().wavelength * 1e9 - 852.0).abs() < 0.5);
        assert_eq!(lookup_species("Na23"), Err(Error::UnknownSpecies("Na23".into())));
    }

    #[test]
    fn masses_to_five_figures() {
        assert_eq!(round_sig(lookup_species("Li6").unwrap().mass_amu(), 5), 6.0151);
        assert_eq!(round_sig(lookup_species("Cs133").unwrap().mass_amu(), 7), 132.9055);
    }

    #[test]
    fn qubit_labels() {
        let li = lookup_species("Li6").unwrap();
        assert_eq!(li.qubit_states.one.to_string(), "|F=3/2,m_F=-1/2>");
        assert_eq!(li.qubit_states.zero.to_string(), "|F=1/2,m_F=1/2>");
        let cs = lookup_species("Cs133").unwrap();
        assert_eq!(cs.qubit_states.one.to_string(), "|F=4,m_F=0>");
        assert_eq!(cs.qubit_states.zero.to_string(), "|F=3,m_F=0>");
    }

    #[test]
    fn lines_are_consistent() {
        for name in [LI6, CS133] {
            let s = lookup_species(name).unwrap();
            let (d1, d2) = s.fine_structure_pair().unwrap();
            assert!(d1.wavelength > d2.wavelength);
            for line in &s.lines {
                assert!(line.linewidth > 0.0 && line.saturation_intensity > 0.0);
                let omega = TWO_PI * SPEED_OF_LIGHT / line.wavelength;
                assert!(((line.angular_frequency - omega) / omega).abs() < 1e-9);
                // tabulated I_sat agrees with the two-level value ħω³Γ/(12πc²)
                let two_level =
                    HBAR * line.angular_frequency.powi(3) * line.linewidth / (12.0 * PI * SPEED_OF_LIGHT.powi(2));
                assert!(((line.saturation_intensity - two_level) / two_level).abs() < 0.01);
            }
        }
    }

    #[test]
    fn detuning_signs() {
        let cs = lookup_species(CS133).unwrap();
        let d2 = *cs.line(LineLabel::D2).unwrap();
        assert_eq!(detuning(&d2, d2.wavelength), 0.0);
        assert!(detuning(&d2, 681e-9) > 0.0);

        let li = lookup_species(LI6).unwrap();
        let li_d2 = *li.line(LineLabel::D2).unwrap();
        let got = detuning(&li_d2, 1064e-9);
        let direct = TWO_PI * SPEED_OF_LIGHT * (1.0 / 1064e-9 - 1.0 / 670.977_338e-9);
        assert!(got < 0.0);
        assert!(((got - direct) / direct).abs() < 1e-12);
    }

    #[test]
    fn overrides_apply() {
        let o = SpeciesOverrides::parse("Li6.D2.gamma_hz = 6.0e6\nLi6.D2.isat_w_m2 = 30.0\nCs133.mass_amu = 133\n")
            .unwrap();
        let li = o.lookup(LI6).unwrap();
        let d2 = li.line(LineLabel::D2).unwrap();
        assert!((d2.linewidth - TWO_PI * 6.0e6).abs() < 1e-3);
        assert_eq!(d2.saturation_intensity, 30.0);
        assert_eq!(li.line(LineLabel::D1).unwrap().saturation_intensity, 25.4);
        assert!((o.lookup(CS133).unwrap().mass_amu() - 133.0).abs() < 1e-9);
    }

    #[test]
    fn overrides_reject_bad_keys() {
        assert!(SpeciesOverrides::parse("Na23.mass_amu = 23").is_err());
        assert!(SpeciesOverrides::parse("Li6.D3.gamma_hz = 1").is_err());
        assert!(SpeciesOverrides::parse("Li6.D2.gamma = 1").is_err());
        assert!(SpeciesOverrides::parse("Li6.mass_amu = -1").is_err());
    }
}
