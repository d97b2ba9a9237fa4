//! Optical-lattice potentials, decoherence rates, beam geometry and the
//! two-color operating-parameter scan.

mod feasibility;
mod geometry;

pub use feasibility::{
    feasibility_region, write_feasibility_csv, BichromaticLattice, Color, FeasibilityPoint, FeasibilityRegion,
    IntensityGrid, Requirements,
};
pub use geometry::{
    intensity_pattern, pattern_gradient, translation_for_phases, write_pattern_csv, LatticeConfig, LatticeGeometry,
    PatternStats,
};

use serde::Serialize;

use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::species::{detuning, LineLabel, Species, TransitionLine};

/// Minimum |Δ|/Γ for which the far-detuned formulas are accepted.
pub const MIN_DETUNING_LINEWIDTHS: f64 = 10.0;

fn check_far_detuned(line: &TransitionLine, detuning: f64) -> Result<()> {
    if detuning.abs() <= MIN_DETUNING_LINEWIDTHS * line.linewidth {
        return Err(Error::NearResonance { detuning, linewidth: line.linewidth });
    }
    Ok(())
}

/// Two-level far-detuned light shift `V = (ħΓ/8)(I/I_sat)/(Δ/Γ)`, in J.
pub fn dipole_potential(line: &TransitionLine, intensity: f64, detuning: f64) -> Result<f64> {
    check_far_detuned(line, detuning)?;
    let gamma = line.linewidth;
    Ok(HBAR * gamma / 8.0 * (intensity / line.saturation_intensity) / (detuning / gamma))
}

/// Off-resonant photon scattering rate `Γ_sc = (V/ħ)(Γ/|Δ|)` for a light shift `V`.
pub fn scattering_rate(line: &TransitionLine, depth: f64, detuning: f64) -> Result<f64> {
    check_far_detuned(line, detuning)?;
    Ok(depth.abs() / HBAR * line.linewidth / detuning.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TunnelingEstimate {
    /// J/ħ, 1/s.
    pub rate: f64,
    /// Depth in units of the recoil energy.
    pub depth_recoils: f64,
    /// `V < E_R`: the asymptotic expression is unreliable here.
    pub shallow: bool,
}

/// Recoil energy `E_R = ħ²π²/(2 m d²)` of a lattice with period `d`.
pub fn recoil_energy(mass: f64, spacing: f64) -> f64 {
    (HBAR * std::f64::consts::PI).powi(2) / (2.0 * mass * spacing * spacing)
}

/// Nearest-neighbour tunneling rate from the deep-lattice Mathieu asymptote
/// `J = (4/√π) E_R s^{3/4} exp(−2√s)`, `s = V/E_R`.
pub fn tunneling_rate(depth: f64, mass: f64, spacing: f64) -> Result<TunnelingEstimate> {
    if !(depth > 0.0) {
        return Err(Error::InvalidArgument(format!("lattice depth must be positive, got {depth}")));
    }
    if !(mass > 0.0 && spacing > 0.0) {
        return Err(Error::InvalidArgument("mass and spacing must be positive".into()));
    }
    let er = recoil_energy(mass, spacing);
    let s = depth / er;
    let j = 4.0 / std::f64::consts::PI.sqrt() * er * s.powf(0.75) * (-2.0 * s.sqrt()).exp();
    let shallow = s < 1.0;
    if shallow {
        log::warn!("lattice depth {s:.3} E_R is below one recoil; tunneling estimate unreliable");
    }
    Ok(TunnelingEstimate { rate: j / HBAR, depth_recoils: s, shallow })
}

/// How the atomic response to lattice light is modeled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum LineModel {
    /// D2 line only, treated as a two-level atom.
    DominantLine,
    /// D1 and D2 weighted by their line strengths (1/3, 2/3).
    #[default]
    FineStructure,
}

impl std::str::FromStr for LineModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dominant_line" => Ok(LineModel::DominantLine),
            "fine_structure" => Ok(LineModel::FineStructure),
            other => {
                Err(Error::Config(format!("unknown line model `{other}` (expected dominant_line or fine_structure)")))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct LightShiftTerm {
    line: TransitionLine,
    weight: f64,
    detuning: f64,
}

/// Light shift and scattering of one species in light of one wavelength.
#[derive(Debug, Clone, PartialEq)]
pub struct LightShift {
    terms: Vec<LightShiftTerm>,
}

impl LightShift {
    pub fn new(species: &Species, wavelength: f64, model: LineModel) -> Result<Self> {
        let weighted: Vec<(TransitionLine, f64)> = match model {
            LineModel::DominantLine => vec![(*species.dominant_line(), 1.0)],
            LineModel::FineStructure => match species.fine_structure_pair() {
                Some((d1, d2)) => vec![(*d1, 1.0 / 3.0), (*d2, 2.0 / 3.0)],
                None => vec![(*species.dominant_line(), 1.0)],
            },
        };
        let terms = weighted
            .into_iter()
            .map(|(line, weight)| {
                let d = detuning(&line, wavelength);
                check_far_detuned(&line, d)?;
                Ok(LightShiftTerm { line, weight, detuning: d })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LightShift { terms })
    }

    /// Signed light shift at `intensity`, J.
    pub fn potential(&self, intensity: f64) -> f64 {
        self.terms.iter().map(|t| t.weight * dipole_potential(&t.line, intensity, t.detuning).unwrap_or(0.0)).sum()
    }

    /// Scattering rate of an atom whose light shift from this beam has
    /// magnitude set by `intensity`.
    pub fn scattering(&self, intensity: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let v = t.weight * dipole_potential(&t.line, intensity, t.detuning).unwrap_or(0.0);
                scattering_rate(&t.line, v, t.detuning).unwrap_or(0.0)
            })
            .sum()
    }

    /// Detuning from the D2 (or only) line.
    pub fn dominant_detuning(&self) -> f64 {
        self.terms.iter().find(|t| t.line.label == LineLabel::D2).unwrap_or(&self.terms[0]).detuning
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::species::{lookup_species, CS133, LI6};

    fn li_d2() -> TransitionLine {
        *lookup_species(LI6).unwrap().line(LineLabel::D2).unwrap()
    }

    #[test]
    fn potential_closed_form() {
        let line = li_d2();
        let g = line.linewidth;
        assert_eq!(dipole_potential(&line, 0.0, 1e4 * g).unwrap(), 0.0);
        let v = dipole_potential(&line, line.saturation_intensity, 1e4 * g).unwrap();
        // hand evaluation: ħΓ/8 · 1 / 1e4
        let hand = HBAR * g * g * 1e-4 / 8.0 / g;
        assert!(((v - hand) / hand).abs() < 1e-14);
        // same value written as ħΓ²·1e-4/(8Γ) with Γ in rad/s
        assert!(v > 0.0);
    }

    #[test]
    fn potential_scaling_and_parity() {
        let line = li_d2();
        let d = 3e3 * line.linewidth;
        let v = dipole_potential(&line, 100.0, d).unwrap();
        assert!((dipole_potential(&line, 200.0, d).unwrap() - 2.0 * v).abs() <= 1e-15 * v.abs());
        assert!((dipole_potential(&line, 100.0, 2.0 * d).unwrap() - 0.5 * v).abs() <= 1e-15 * v.abs());
        assert_eq!(dipole_potential(&line, 100.0, -d).unwrap(), -v);
    }

    #[test]
    fn near_resonance_rejected() {
        let line = li_d2();
        assert!(matches!(dipole_potential(&line, 1.0, 5.0 * line.linewidth), Err(Error::NearResonance { .. })));
        assert!(scattering_rate(&line, 1.0, 10.0 * line.linewidth).is_err());
    }

    #[test]
    fn scattering_scaling() {
        let line = li_d2();
        let d = 1e6 * line.linewidth;
        assert_eq!(scattering_rate(&line, 0.0, d).unwrap(), 0.0);
        let r = scattering_rate(&line, 1e-30, d).unwrap();
        let r2 = scattering_rate(&line, 1e-30, 2.0 * d).unwrap();
        assert!((r2 - r / 2.0).abs() < 1e-15 * r);
    }

    #[test]
    fn tunneling_monotone_decreasing_above_four_recoils() {
        let li = lookup_species(LI6).unwrap();
        let d = 1.5e-6;
        let er = recoil_energy(li.mass, d);
        let rates: Vec<f64> =
            (0..400).map(|i| 4.0 + 0.25 * i as f64).map(|s| tunneling_rate(s * er, li.mass, d).unwrap().rate).collect();
        assert!(rates.windows(2).all(|w| w[1] < w[0]));
        assert!(tunneling_rate(1e4 * er, li.mass, d).unwrap().rate < 1e-30);
        assert!(tunneling_rate(0.5 * er, li.mass, d).unwrap().shallow);
        assert!(tunneling_rate(0.0, li.mass, d).is_err());
    }

    #[test]
    fn fine_structure_weights_reduce_to_two_level() {
        // far from both lines the weighted shift approaches the D2-only value
        let cs = lookup_species(CS133).unwrap();
        let fs = LightShift::new(&cs, 10.6e-6, LineModel::FineStructure).unwrap();
        let dl = LightShift::new(&cs, 10.6e-6, LineModel::DominantLine).unwrap();
        let ratio = fs.potential(1.0) / dl.potential(1.0);
        assert!((ratio - 1.0).abs() < 0.1);
        assert!(fs.dominant_detuning() < 0.0);
    }
}
