//! Run configuration: a sectioned TOML file, one table per subcommand.
//!
//! Keys carrying a physical quantity end in their unit (`_nm`, `_um`, `_khz`,
//! `_w_m2`, `_per_s`, `_rad`, `_bohr`). Frequencies given in `_khz` are
//! ordinary frequencies; angular values are `2π` times them. Each section
//! resolves into a settings struct with every default filled in, which is what
//! gets echoed into the output record.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::species::SpeciesOverrides;

fn required<T>(value: Option<T>, key: &str) -> Result<T> {
    value.ok_or_else(|| Error::Config(format!("missing key `{key}`")))
}

fn section<'a, T>(value: &'a Option<T>, name: &str) -> Result<&'a T> {
    value.as_ref().ok_or_else(|| Error::Config(format!("missing section `[{name}]`")))
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub species: Option<toml::Table>,
    pub feasibility: Option<FeasibilitySection>,
    pub gate: Option<GateSection>,
    pub transport: Option<TransportSection>,
    pub protocol: Option<ProtocolSection>,
    pub geometry: Option<GeometrySection>,
    pub stability: Option<StabilitySection>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn species_overrides(&self) -> Result<SpeciesOverrides> {
        SpeciesOverrides::from_table(self.species.clone().unwrap_or_default())
    }

    pub fn feasibility(&self) -> Result<FeasibilitySettings> {
        section(&self.feasibility, "feasibility")?.resolve()
    }

    pub fn gate(&self) -> Result<GateSettings> {
        section(&self.gate, "gate")?.resolve()
    }

    /// The transport section is optional; absent keys take reference values.
    pub fn transport(&self) -> Result<TransportSettings> {
        self.transport.clone().unwrap_or_default().resolve()
    }

    pub fn protocol(&self) -> Result<ProtocolSettings> {
        section(&self.protocol, "protocol")?.resolve()
    }

    pub fn geometry(&self) -> Result<GeometrySettings> {
        self.geometry.clone().unwrap_or_default().resolve()
    }

    pub fn stability_inputs(&self) -> Vec<PathBuf> {
        self.stability.as_ref().map(|s| s.inputs.clone()).unwrap_or_default()
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeasibilitySection {
    pub line_model: Option<String>,
    pub spacing_um: Option<f64>,
    pub qubit_wavelength_nm: Option<f64>,
    pub messenger_wavelength_nm: Option<f64>,
    pub i1_min_w_m2: Option<f64>,
    pub i1_max_w_m2: Option<f64>,
    pub i2_min_w_m2: Option<f64>,
    pub i2_max_w_m2: Option<f64>,
    pub n1: Option<usize>,
    pub n2: Option<usize>,
    pub decoherence_ceiling_per_s: Option<f64>,
    pub alpha_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilitySettings {
    pub line_model: String,
    pub spacing_um: f64,
    pub qubit_wavelength_nm: f64,
    pub messenger_wavelength_nm: f64,
    pub i1_min_w_m2: f64,
    pub i1_max_w_m2: f64,
    pub i2_min_w_m2: f64,
    pub i2_max_w_m2: f64,
    pub n1: usize,
    pub n2: usize,
    pub decoherence_ceiling_per_s: f64,
    pub alpha_max: f64,
}

impl FeasibilitySection {
    fn resolve(&self) -> Result<FeasibilitySettings> {
        Ok(FeasibilitySettings {
            line_model: self.line_model.clone().unwrap_or_else(|| "fine_structure".into()),
            spacing_um: self.spacing_um.unwrap_or(1.5),
            qubit_wavelength_nm: self.qubit_wavelength_nm.unwrap_or(681.0),
            messenger_wavelength_nm: self.messenger_wavelength_nm.unwrap_or(1064.0),
            i1_min_w_m2: required(self.i1_min_w_m2, "feasibility.i1_min_w_m2")?,
            i1_max_w_m2: required(self.i1_max_w_m2, "feasibility.i1_max_w_m2")?,
            i2_min_w_m2: required(self.i2_min_w_m2, "feasibility.i2_min_w_m2")?,
            i2_max_w_m2: required(self.i2_max_w_m2, "feasibility.i2_max_w_m2")?,
            n1: required(self.n1, "feasibility.n1")?,
            n2: required(self.n2, "feasibility.n2")?,
            decoherence_ceiling_per_s: required(
                self.decoherence_ceiling_per_s,
                "feasibility.decoherence_ceiling_per_s",
            )?,
            alpha_max: self.alpha_max.unwrap_or(1.0),
        })
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateSection {
    pub a_bohr: Option<f64>,
    pub omega0_khz: Option<f64>,
    pub delta_nm: Option<f64>,
    pub delta_vib_khz: Option<f64>,
    pub omega_r_khz: Option<f64>,
    pub r0_nm: Option<f64>,
    pub li_trap_khz: Option<f64>,
    pub cs_trap_khz: Option<f64>,
}

/// How the relative-motion trap is specified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum TrapSettings {
    Direct { omega_r_khz: f64, r0_nm: f64 },
    Frequencies { li_trap_khz: f64, cs_trap_khz: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GateSettings {
    pub a_bohr: f64,
    pub omega0_khz: f64,
    pub delta_nm: f64,
    pub delta_vib_khz: Option<f64>,
    #[serde(flatten)]
    pub trap: TrapSettings,
}

impl GateSection {
    fn resolve(&self) -> Result<GateSettings> {
        let direct = self.omega_r_khz.is_some() || self.r0_nm.is_some();
        let split = self.li_trap_khz.is_some() || self.cs_trap_khz.is_some();
        let trap =
            match (direct, split) {
                (true, true) => return Err(Error::Config(
                    "give either `gate.omega_r_khz`/`gate.r0_nm` or `gate.li_trap_khz`/`gate.cs_trap_khz`, not both"
                        .into(),
                )),
                (false, false) => return Err(Error::Config(
                    "missing key `gate.r0_nm` (with `gate.omega_r_khz`), or `gate.li_trap_khz` and `gate.cs_trap_khz`"
                        .into(),
                )),
                (true, false) => TrapSettings::Direct {
                    omega_r_khz: required(self.omega_r_khz, "gate.omega_r_khz")?,
                    r0_nm: required(self.r0_nm, "gate.r0_nm")?,
                },
                (false, true) => TrapSettings::Frequencies {
                    li_trap_khz: required(self.li_trap_khz, "gate.li_trap_khz")?,
                    cs_trap_khz: required(self.cs_trap_khz, "gate.cs_trap_khz")?,
                },
            };
        Ok(GateSettings {
            a_bohr: required(self.a_bohr, "gate.a_bohr")?,
            omega0_khz: required(self.omega0_khz, "gate.omega0_khz")?,
            delta_nm: self.delta_nm.unwrap_or(0.0),
            delta_vib_khz: self.delta_vib_khz,
            trap,
        })
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportSection {
    pub spacing_um: Option<f64>,
    pub x0_nm: Option<f64>,
    pub trap_khz: Option<f64>,
    pub alpha: Option<f64>,
    pub messenger_depth_khz: Option<f64>,
    pub fidelity_target: Option<f64>,
    pub sites: Option<Vec<u32>>,
    pub calibrate: Option<bool>,
    pub anchor_sites: Option<u32>,
    pub anchor_reduced_velocity: Option<f64>,
    pub anchor_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransportSettings {
    pub spacing_um: f64,
    pub x0_nm: f64,
    /// `None` derives the frequency from `x0_nm` and the messenger mass.
    pub trap_khz: Option<f64>,
    pub alpha: f64,
    /// Cross-talk depth is `alpha` times this depth.
    pub messenger_depth_khz: f64,
    pub fidelity_target: f64,
    pub sites: Vec<u32>,
    pub calibrate: bool,
    pub anchor_sites: u32,
    pub anchor_reduced_velocity: f64,
    pub anchor_error: f64,
}

impl TransportSection {
    fn resolve(&self) -> Result<TransportSettings> {
        Ok(TransportSettings {
            spacing_um: self.spacing_um.unwrap_or(1.5),
            x0_nm: self.x0_nm.unwrap_or(82.0),
            trap_khz: self.trap_khz,
            alpha: self.alpha.unwrap_or(0.16),
            messenger_depth_khz: self.messenger_depth_khz.unwrap_or(760.0),
            fidelity_target: self.fidelity_target.unwrap_or(0.99),
            sites: self.sites.clone().unwrap_or_else(|| vec![1, 2, 3, 4, 5, 10, 20]),
            calibrate: self.calibrate.unwrap_or(true),
            anchor_sites: self.anchor_sites.unwrap_or(1),
            anchor_reduced_velocity: self.anchor_reduced_velocity.unwrap_or(0.03),
            anchor_error: self.anchor_error.unwrap_or(0.01),
        })
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSection {
    pub ideal: Option<bool>,
    pub sites: Option<u32>,
    pub qubit_a_site: Option<[i64; 2]>,
    pub qubit_b_site: Option<[i64; 2]>,
    pub overlap_fidelity: Option<f64>,
    pub leakage: Option<f64>,
    pub transport_error: Option<f64>,
    pub trials: Option<usize>,
}

/// Transport distance, given directly or as two site coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Separation {
    Sites { sites: u32 },
    Coordinates { qubit_a_site: [i64; 2], qubit_b_site: [i64; 2] },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorBudget {
    pub overlap_fidelity: f64,
    pub leakage: f64,
    /// `None` takes the transport error at the velocity bound of `[transport]`.
    pub transport_error: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProtocolSettings {
    pub ideal: bool,
    #[serde(flatten)]
    pub separation: Separation,
    /// Absent when `ideal`.
    pub budget: Option<ErrorBudget>,
    pub trials: usize,
}

impl ProtocolSection {
    fn resolve(&self) -> Result<ProtocolSettings> {
        let separation = match (self.sites, self.qubit_a_site, self.qubit_b_site) {
            (Some(sites), None, None) => Separation::Sites { sites },
            (None, Some(a), Some(b)) => Separation::Coordinates { qubit_a_site: a, qubit_b_site: b },
            (None, None, None) => {
                return Err(Error::Config(
                    "missing key `protocol.sites` (or `protocol.qubit_a_site` and `protocol.qubit_b_site`)".into(),
                ))
            }
            (None, Some(_), None) => return Err(Error::Config("missing key `protocol.qubit_b_site`".into())),
            (None, None, Some(_)) => return Err(Error::Config("missing key `protocol.qubit_a_site`".into())),
            _ => return Err(Error::Config("give either `protocol.sites` or site coordinates, not both".into())),
        };
        let ideal = self.ideal.unwrap_or(false);
        let budget = if ideal {
            None
        } else {
            Some(ErrorBudget {
                overlap_fidelity: required(self.overlap_fidelity, "protocol.overlap_fidelity")?,
                leakage: required(self.leakage, "protocol.leakage")?,
                transport_error: self.transport_error,
            })
        };
        Ok(ProtocolSettings { ideal, separation, budget, trials: self.trials.unwrap_or(10_000) })
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub spacing_um: Option<f64>,
    pub wavelengths_nm: Option<Vec<f64>>,
    pub phases_rad: Option<[f64; 3]>,
    pub shifts_rad: Option<Vec<[f64; 3]>>,
    pub pattern_points: Option<usize>,
    pub pattern_extent_um: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometrySettings {
    pub spacing_um: f64,
    pub wavelengths_nm: Vec<f64>,
    pub phases_rad: [f64; 3],
    pub shifts_rad: Vec<[f64; 3]>,
    pub pattern_points: usize,
    pub pattern_extent_um: f64,
}

impl GeometrySection {
    fn resolve(&self) -> Result<GeometrySettings> {
        Ok(GeometrySettings {
            spacing_um: self.spacing_um.unwrap_or(1.5),
            wavelengths_nm: self.wavelengths_nm.clone().unwrap_or_else(|| vec![681.0, 1064.0]),
            phases_rad: self.phases_rad.unwrap_or([0.0; 3]),
            shifts_rad: self.shifts_rad.clone().unwrap_or_else(|| vec![[PI / 3.0; 3], [1.0, -1.0, 0.0]]),
            pattern_points: self.pattern_points.unwrap_or(101),
            pattern_extent_um: self.pattern_extent_um.unwrap_or(3.0),
        })
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilitySection {
    #[serde(default)]
    pub inputs: Vec<PathBuf>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_grid_key_is_named() {
        let cfg = RunConfig::parse("[feasibility]\ndecoherence_ceiling_per_s = 2.0\n").unwrap();
        let err = cfg.feasibility().unwrap_err();
        assert!(err.to_string().contains("feasibility.i1_min_w_m2"), "{err}");
    }

    #[test]
    fn missing_section_is_named() {
        let err = RunConfig::parse("").unwrap().gate().unwrap_err();
        assert!(err.to_string().contains("[gate]"));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::parse("[gate]\na_nm = 3\n").is_err());
        assert!(RunConfig::parse("colour = 1\n").is_err());
    }

    #[test]
    fn gate_trap_forms() {
        let direct =
            RunConfig::parse("[gate]\na_bohr = 200\nomega0_khz = 10\nomega_r_khz = 160\nr0_nm = 210\n").unwrap();
        assert!(matches!(direct.gate().unwrap().trap, TrapSettings::Direct { .. }));
        let both = RunConfig::parse("[gate]\na_bohr = 200\nomega0_khz = 10\nr0_nm = 210\nli_trap_khz = 100\n").unwrap();
        assert!(both.gate().is_err());
        let half = RunConfig::parse("[gate]\na_bohr = 200\nomega0_khz = 10\nr0_nm = 210\n").unwrap();
        assert!(half.gate().unwrap_err().to_string().contains("gate.omega_r_khz"));
    }

    #[test]
    fn protocol_needs_budget_unless_ideal() {
        let ideal = RunConfig::parse("[protocol]\nideal = true\nsites = 1\n").unwrap();
        assert_eq!(ideal.protocol().unwrap().budget, None);
        let real = RunConfig::parse("[protocol]\nsites = 1\noverlap_fidelity = 0.995\n").unwrap();
        assert!(real.protocol().unwrap_err().to_string().contains("protocol.leakage"));
        let coords = RunConfig::parse("[protocol]\nideal = true\nqubit_a_site = [0, 0]\n").unwrap();
        assert!(coords.protocol().unwrap_err().to_string().contains("qubit_b_site"));
    }

    #[test]
    fn optional_sections_default() {
        let cfg = RunConfig::parse("").unwrap();
        assert_eq!(cfg.transport().unwrap().alpha, 0.16);
        assert_eq!(cfg.geometry().unwrap().wavelengths_nm, vec![681.0, 1064.0]);
        assert!(cfg.stability_inputs().is_empty());
    }
}
