//! Two-atom relative motion, atom–molecule Franck–Condon coupling and the
//! per-operation gate budget.

use std::f64::consts::PI;

use serde::Serialize;

use crate::constants::{rad_to_hz, HBAR};
use crate::error::{Error, Result};
use crate::quadrature;

/// Prefactor of the closed-form overlap `C = K (a/r₀)^{3/2}`, `K = 2π^{-1/4}`.
pub const FRANCK_CONDON_PREFACTOR: f64 = 1.502_251_088_929_885;

/// Upper end of the overlap integral in units of `r₀`.
pub const OVERLAP_CUTOFF_R0: f64 = 20.0;
/// Absolute tolerance of the overlap quadrature.
pub const OVERLAP_TOLERANCE: f64 = 1e-10;
const MAX_SEGMENTS: usize = 4000;

/// Two trapped atoms split into centre-of-mass and relative coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoAtomSystem {
    pub m1: f64,
    pub m2: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub total_mass: f64,
    pub reduced_mass: f64,
    /// Centre-of-mass trap frequency, rad/s.
    pub omega_com: f64,
    /// Relative-motion trap frequency, rad/s.
    pub omega_rel: f64,
    /// Relative-motion oscillator length `√(ħ/µω_r)`, m.
    pub r0: f64,
}

impl TwoAtomSystem {
    pub fn reduce(m1: f64, omega1: f64, m2: f64, omega2: f64) -> Result<Self> {
        if !(m1 > 0.0 && m2 > 0.0 && omega1 > 0.0 && omega2 > 0.0) {
            return Err(Error::InvalidArgument("masses and trap frequencies must be positive".into()));
        }
        let total_mass = m1 + m2;
        let reduced_mass = m1 * m2 / total_mass;
        let omega_com = ((m1 * omega1 * omega1 + m2 * omega2 * omega2) / total_mass).sqrt();
        let omega_rel = omega1 * omega2 / omega_com;
        Ok(TwoAtomSystem {
            m1,
            m2,
            omega1,
            omega2,
            total_mass,
            reduced_mass,
            omega_com,
            omega_rel,
            r0: oscillator_length(reduced_mass, omega_rel),
        })
    }
}

/// Ground-state width `√(ħ/mω)`.
pub fn oscillator_length(mass: f64, omega: f64) -> f64 {
    (HBAR / (mass * omega)).sqrt()
}

/// Inverse of [`oscillator_length`]: the trap frequency giving width `length`.
pub fn trap_frequency_for_length(mass: f64, length: f64) -> f64 {
    HBAR / (mass * length * length)
}

/// Relative-motion ground state of the trapped pair, m^{-3/2}.
pub fn pair_wavefunction(r: f64, r0: f64) -> f64 {
    (r0 * r0 * PI).powf(-0.75) * (-r * r / (2.0 * r0 * r0)).exp()
}

/// Weakly bound s-wave halo molecule of size `a`, m^{-3/2}.
pub fn molecular_wavefunction(r: f64, a: f64) -> f64 {
    (2.0 * PI * a).powf(-0.5) * (-r / a).exp() / r
}

fn check_regime(a: f64, r0: f64) -> Result<()> {
    if !(a > 0.0 && r0 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "scattering length and oscillator length must be positive (a = {a:e} m, r0 = {r0:e} m)"
        )));
    }
    if a >= 0.5 * r0 {
        return Err(Error::Regime { a, r0 });
    }
    Ok(())
}

/// Closed-form Franck–Condon factor, valid for `a ≪ r₀`.
pub fn franck_condon(a: f64, r0: f64) -> Result<f64> {
    check_regime(a, r0)?;
    Ok(FRANCK_CONDON_PREFACTOR * (a / r0).powf(1.5))
}

fn scaled_breaks(eps: f64) -> Vec<f64> {
    // resolve the molecular decay length and the trap scale
    [eps, 4.0 * eps, 16.0 * eps, 0.5, 1.0, 2.0, 4.0].to_vec()
}

/// Franck–Condon factor from adaptive quadrature of `4πr² ψ_pair ψ_mol`
/// over `(0, 20 r₀)`.
pub fn franck_condon_quadrature(a: f64, r0: f64) -> Result<f64> {
    check_regime(a, r0)?;
    let eps = a / r0;
    // x = r/r₀; the r² measure cancels the 1/r of the halo state
    let norm = 4.0 * PI * PI.powf(-0.75) * (2.0 * PI).powf(-0.5) * eps.powf(-0.5);
    let integrand = |x: f64| norm * x * (-0.5 * x * x - x / eps).exp();
    let r =
        quadrature::integrate(integrand, 0.0, OVERLAP_CUTOFF_R0, &scaled_breaks(eps), OVERLAP_TOLERANCE, MAX_SEGMENTS)?;
    Ok(r.value)
}

/// `∫4πr²ψ²dr` for the pair and molecular states, evaluated with the
/// overlap quadrature.
pub fn wavefunction_norms(a: f64, r0: f64) -> Result<(f64, f64)> {
    check_regime(a, r0)?;
    let eps = a / r0;
    let breaks = scaled_breaks(eps);
    let pair = quadrature::integrate(
        |x: f64| 4.0 / PI.sqrt() * x * x * (-x * x).exp(),
        0.0,
        OVERLAP_CUTOFF_R0,
        &breaks,
        OVERLAP_TOLERANCE,
        MAX_SEGMENTS,
    )?;
    let molecule = quadrature::integrate(
        |x: f64| 2.0 / eps * (-2.0 * x / eps).exp(),
        0.0,
        OVERLAP_CUTOFF_R0,
        &breaks,
        OVERLAP_TOLERANCE,
        MAX_SEGMENTS,
    )?;
    Ok((pair.value, molecule.value))
}

/// Molecule Rabi frequency `Ω = CΩ₀` and the two-pulse transfer time `τ = π/Ω`.
pub fn rabi_and_time(c: f64, rabi_free: f64) -> Result<(f64, f64)> {
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::InvalidArgument(format!("Franck–Condon factor must lie in (0, 1], got {c}")));
    }
    if !(rabi_free > 0.0) {
        return Err(Error::InvalidArgument(format!("free-atom Rabi frequency must be positive, got {rabi_free}")));
    }
    let omega = c * rabi_free;
    Ok((omega, PI / omega))
}

/// Overlap fidelity for a displacement `δ` along one axis.
pub fn overlap_fidelity(offset: f64, r0: f64) -> f64 {
    (-(offset / r0).powi(2)).exp()
}

/// Overlap fidelity for an equal displacement `δ` along all three axes.
pub fn overlap_fidelity_3axis(offset: f64, r0: f64) -> f64 {
    (-3.0 * (offset / r0).powi(2)).exp()
}

/// Population leaked off-resonantly per π-pulse, `(1 + Δ²/4Ω²)^{-1/2}`.
pub fn offresonant_leakage(rabi: f64, vib_detuning: f64) -> f64 {
    (1.0 + vib_detuning * vib_detuning / (4.0 * rabi * rabi)).powf(-0.5)
}

/// How the relative-motion trap is specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RelativeTrap {
    /// Per-species trap frequencies, reduced internally.
    Frequencies(TwoAtomSystem),
    /// Relative frequency and oscillator length given directly. `reduced_mass`
    /// is used only to report the length implied by `omega_rel`.
    Direct { omega_rel: f64, r0: f64, reduced_mass: f64 },
}

impl RelativeTrap {
    pub fn omega_rel(&self) -> f64 {
        match *self {
            RelativeTrap::Frequencies(sys) => sys.omega_rel,
            RelativeTrap::Direct { omega_rel, .. } => omega_rel,
        }
    }

    pub fn r0(&self) -> f64 {
        match *self {
            RelativeTrap::Frequencies(sys) => sys.r0,
            RelativeTrap::Direct { r0, .. } => r0,
        }
    }

    /// `√(ħ/µω_r)`, which differs from [`Self::r0`] only for `Direct`.
    pub fn r0_from_frequency(&self) -> f64 {
        match *self {
            RelativeTrap::Frequencies(sys) => sys.r0,
            RelativeTrap::Direct { omega_rel, reduced_mass, .. } => oscillator_length(reduced_mass, omega_rel),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateInputs {
    pub scattering_length: f64,
    pub rabi_free: f64,
    /// Residual pair separation after transport, m.
    pub offset: f64,
    pub trap: RelativeTrap,
    /// Closest competing vibrational line; `None` uses `ω_r`.
    pub vib_detuning: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingBudget {
    pub scattering_length: f64,
    pub rabi_free: f64,
    pub franck_condon: f64,
    pub franck_condon_quadrature: f64,
    pub rabi: f64,
    pub pulse_pair_time: f64,
    pub offset: f64,
    pub overlap_fidelity: f64,
    pub overlap_fidelity_3axis: f64,
    pub leakage: f64,
    pub vib_detuning: f64,
    pub omega_rel: f64,
    pub r0: f64,
    pub r0_from_frequency: f64,
}

impl CouplingBudget {
    /// Evaluates the budget with the closed-form overlap; the quadrature value
    /// is carried alongside for comparison.
    pub fn evaluate(inputs: &GateInputs) -> Result<Self> {
        let r0 = inputs.trap.r0();
        let a = inputs.scattering_length;
        let c = franck_condon(a, r0)?;
        let c_quad = franck_condon_quadrature(a, r0)?;
        let (rabi, tau) = rabi_and_time(c, inputs.rabi_free)?;
        let vib_detuning = inputs.vib_detuning.unwrap_or_else(|| inputs.trap.omega_rel());
        Ok(CouplingBudget {
            scattering_length: a,
            rabi_free: inputs.rabi_free,
            franck_condon: c,
            franck_condon_quadrature: c_quad,
            rabi,
            pulse_pair_time: tau,
            offset: inputs.offset,
            overlap_fidelity: overlap_fidelity(inputs.offset, r0),
            overlap_fidelity_3axis: overlap_fidelity_3axis(inputs.offset, r0),
            leakage: offresonant_leakage(rabi, vib_detuning),
            vib_detuning,
            omega_rel: inputs.trap.omega_rel(),
            r0,
            r0_from_frequency: inputs.trap.r0_from_frequency(),
        })
    }

    /// Budget with no error terms: perfect overlap and no leakage.
    pub fn ideal() -> Self {
        CouplingBudget {
            scattering_length: 0.0,
            rabi_free: 0.0,
            franck_condon: 1.0,
            franck_condon_quadrature: 1.0,
            rabi: 0.0,
            pulse_pair_time: 0.0,
            offset: 0.0,
            overlap_fidelity: 1.0,
            overlap_fidelity_3axis: 1.0,
            leakage: 0.0,
            vib_detuning: 0.0,
            omega_rel: 0.0,
            r0: 0.0,
            r0_from_frequency: 0.0,
        }
    }

    /// Budget carrying only the two scalar error terms.
    pub fn from_errors(overlap_fidelity: f64, leakage: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&overlap_fidelity) || !(0.0..=1.0).contains(&leakage) {
            return Err(Error::InvalidArgument(format!(
                "fidelity and leakage must lie in [0, 1] (got {overlap_fidelity}, {leakage})"
            )));
        }
        Ok(CouplingBudget { overlap_fidelity, overlap_fidelity_3axis: overlap_fidelity, leakage, ..Self::ideal() })
    }

    pub fn report(&self) -> GateReport {
        GateReport {
            omega_r_hz: rad_to_hz(self.omega_rel),
            r0_nm: self.r0 * 1e9,
            r0_from_omega_r_nm: self.r0_from_frequency * 1e9,
            a_bohr: self.scattering_length / crate::constants::BOHR_RADIUS,
            omega0_hz: rad_to_hz(self.rabi_free),
            c: self.franck_condon,
            c_closed_form: self.franck_condon,
            c_quadrature: self.franck_condon_quadrature,
            c_ratio: self.franck_condon_quadrature / self.franck_condon,
            omega_hz: rad_to_hz(self.rabi),
            tau_ms: self.pulse_pair_time * 1e3,
            delta_nm: self.offset * 1e9,
            f_per_op: self.overlap_fidelity,
            f_per_op_3axis: self.overlap_fidelity_3axis,
            delta_vib_hz: rad_to_hz(self.vib_detuning),
            dp_per_pulse: self.leakage,
        }
    }
}

/// Flat gate-budget record in reporting units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GateReport {
    pub omega_r_hz: f64,
    pub r0_nm: f64,
    pub r0_from_omega_r_nm: f64,
    pub a_bohr: f64,
    pub omega0_hz: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "C_closed_form")]
    pub c_closed_form: f64,
    #[serde(rename = "C_quadrature")]
    pub c_quadrature: f64,
    #[serde(rename = "C_ratio")]
    pub c_ratio: f64,
    pub omega_hz: f64,
    pub tau_ms: f64,
    pub delta_nm: f64,
    #[serde(rename = "F_per_op")]
    pub f_per_op: f64,
    #[serde(rename = "F_per_op_3axis")]
    pub f_per_op_3axis: f64,
    pub delta_vib_hz: f64,
    pub dp_per_pulse: f64,
}

impl GateReport {
    /// `key = value` lines, sorted by key.
    pub fn to_text(&self) -> String {
        let value = serde_json::to_value(self).expect("plain struct serializes");
        let mut out = String::new();
        if let serde_json::Value::Object(map) = value {
            for (k, v) in map {
                out.push_str(&format!("{k} = {v}\n"));
            }
        }
        out
    }
}
