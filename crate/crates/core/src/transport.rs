//! Adiabatic messenger transport: excitation error, velocity bound and the
//! end-to-end entanglement timing laws.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::constants::{khz_to_rad, m_per_s_to_um_per_ms, nm, um, AMU, HBAR};
use crate::coupling::trap_frequency_for_length;
use crate::error::{Error, Result};

/// Time spent on the four atom–molecule transitions of one entanglement, s.
pub const TRANSITIONS_TIME: f64 = 5e-3;
/// Transport contribution to the entanglement time per squared site, s.
pub const TRANSPORT_TIME_PER_SITE2: f64 = 0.4e-3;
/// Accessible qubits per squared transport distance, `4π/√3`.
pub const REACH_PER_SITE2: f64 = 7.255_197_456_936_871;

/// One-point anchor fixing the transport depth factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrationAnchor {
    pub sites: u32,
    pub reduced_velocity: f64,
    pub error: f64,
}

impl Default for CalibrationAnchor {
    fn default() -> Self {
        CalibrationAnchor { sites: 1, reduced_velocity: 0.03, error: 0.01 }
    }
}

/// Lattice and messenger-trap parameters of a transport leg.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransportParams {
    /// Lattice constant, m.
    pub spacing: f64,
    /// Messenger oscillator length, m.
    pub oscillator_length: f64,
    /// Messenger trap frequency along the motion, rad/s.
    pub trap_frequency: f64,
    /// Cross-talk factor.
    pub alpha: f64,
    /// Cross-talk depth `U*`, J.
    pub cross_talk_depth: f64,
    /// Dimensionless depth factor `g` entering the excitation rate.
    pub depth_factor: f64,
}

impl TransportParams {
    /// Raw parameters with `g = U*/(ħω)`.
    pub fn new(
        spacing: f64,
        oscillator_length: f64,
        trap_frequency: f64,
        alpha: f64,
        cross_talk_depth: f64,
    ) -> Result<Self> {
        for (name, v) in [
            ("spacing", spacing),
            ("oscillator length", oscillator_length),
            ("trap frequency", trap_frequency),
            ("cross-talk depth", cross_talk_depth),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if !(alpha >= 0.0) {
            return Err(Error::InvalidArgument(format!("cross-talk factor must be non-negative, got {alpha}")));
        }
        let depth_factor = cross_talk_depth / (HBAR * trap_frequency);
        Ok(TransportParams { spacing, oscillator_length, trap_frequency, alpha, cross_talk_depth, depth_factor })
    }

    /// Cs messenger in the 1.5 µm lattice: `x₀ = 82 nm`, `ω = ħ/(m x₀²)`,
    /// `U* = α·ħ·2π·760 kHz` with `α = 0.16`.
    pub fn reference() -> Self {
        let x0 = nm(82.0);
        let omega = trap_frequency_for_length(132.905_451_931 * AMU, x0);
        let alpha = 0.16;
        Self::new(um(1.5), x0, omega, alpha, alpha * HBAR * khz_to_rad(760.0)).expect("reference parameters are valid")
    }

    /// `U*/(ħω)` irrespective of any calibration.
    pub fn raw_depth_factor(&self) -> f64 {
        self.cross_talk_depth / (HBAR * self.trap_frequency)
    }

    pub fn with_depth_factor(self, depth_factor: f64) -> Self {
        TransportParams { depth_factor, ..self }
    }

    /// Fixes `g` so that the anchor's error is reproduced exactly.
    pub fn calibrated(self, anchor: CalibrationAnchor) -> Result<Self> {
        if anchor.sites == 0 || !(anchor.reduced_velocity > 0.0) || !(anchor.error > 0.0 && anchor.error < 1.0) {
            return Err(Error::InvalidArgument(format!("unusable calibration anchor {anchor:?}")));
        }
        let per_unit = anchor.sites as f64 * anchor.reduced_velocity * self.shape_factor();
        Ok(self.with_depth_factor(anchor.error / per_unit))
    }

    pub fn wavenumber(&self) -> f64 {
        PI / self.spacing
    }

    /// `(π/2)(kx₀)² exp(−(kx₀)²)`.
    fn shape_factor(&self) -> f64 {
        let kx2 = (self.wavenumber() * self.oscillator_length).powi(2);
        0.5 * PI * kx2 * (-kx2).exp()
    }

    /// `exp(−(kx₀)²)`.
    pub fn gaussian_factor(&self) -> f64 {
        (-(self.wavenumber() * self.oscillator_length).powi(2)).exp()
    }

    /// `ν = v k/(π ω)`.
    pub fn reduced_velocity(&self, velocity: f64) -> f64 {
        velocity * self.wavenumber() / (PI * self.trap_frequency)
    }

    /// Inverse of [`Self::reduced_velocity`].
    pub fn velocity(&self, reduced_velocity: f64) -> f64 {
        reduced_velocity * PI * self.trap_frequency / self.wavenumber()
    }

    /// Excited-state population after `sites` hops at reduced velocity `ν`,
    /// capped at 1.
    pub fn transport_error(&self, sites: u32, reduced_velocity: f64) -> Result<f64> {
        if !(reduced_velocity >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "reduced velocity must be non-negative, got {reduced_velocity}"
            )));
        }
        let p = sites as f64 * reduced_velocity * self.depth_factor * self.shape_factor();
        Ok(p.min(1.0))
    }

    /// Largest velocity, m/s, whose transport error over `sites` stays at or
    /// below `1 − fidelity_target`.
    pub fn max_velocity(&self, sites: u32, fidelity_target: f64) -> Result<f64> {
        if !(fidelity_target > 0.0 && fidelity_target < 1.0) {
            return Err(Error::InvalidArgument(format!("fidelity target must lie in (0, 1), got {fidelity_target}")));
        }
        if sites == 0 {
            return Err(Error::Infeasible("no transport over zero sites; velocity is unconstrained".into()));
        }
        let per_nu = sites as f64 * self.depth_factor * self.shape_factor();
        if !(per_nu > 0.0 && per_nu.is_finite()) {
            return Err(Error::Infeasible(format!("transport error rate {per_nu} admits no velocity bound")));
        }
        Ok(self.velocity((1.0 - fidelity_target) / per_nu))
    }
}

/// Entanglement time for messenger transport over `sites`, s.
pub fn entangle_time(sites: u32) -> f64 {
    let n = sites as f64;
    TRANSITIONS_TIME + TRANSPORT_TIME_PER_SITE2 * n * n
}

/// Qubits reachable within `sites` lattice constants.
pub fn qubit_reach(sites: u32) -> f64 {
    let n = sites as f64;
    REACH_PER_SITE2 * n * n
}

/// Entanglement time coefficient per accessible qubit, s.
pub fn reach_time_coefficient() -> f64 {
    TRANSPORT_TIME_PER_SITE2 / REACH_PER_SITE2
}

/// Entanglement time written in terms of the reachable qubit count, s.
pub fn entangle_time_for_reach(qubits: f64) -> f64 {
    TRANSITIONS_TIME + reach_time_coefficient() * qubits
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimingBreakdown {
    pub sites: u32,
    pub total: f64,
    pub transitions: f64,
    pub transport: f64,
    /// `N d / v(N)` with the velocity bound at the given fidelity target.
    pub transport_kinematic: f64,
}

pub fn entangle_timing(params: &TransportParams, sites: u32, fidelity_target: f64) -> Result<TimingBreakdown> {
    let transport_kinematic =
        if sites == 0 { 0.0 } else { sites as f64 * params.spacing / params.max_velocity(sites, fidelity_target)? };
    Ok(TimingBreakdown {
        sites,
        total: entangle_time(sites),
        transitions: TRANSITIONS_TIME,
        transport: entangle_time(sites) - TRANSITIONS_TIME,
        transport_kinematic,
    })
}

/// Site in integer coordinates along the two primitive vectors (60° apart).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct SiteCoord {
    pub i: i64,
    pub j: i64,
}

impl SiteCoord {
    pub fn new(i: i64, j: i64) -> Self {
        SiteCoord { i, j }
    }
}

/// Lattice constants traversed moving in a straight line between two sites,
/// rounded up.
pub fn site_distance(a: SiteCoord, b: SiteCoord) -> u64 {
    let di = (b.i - a.i) as i128;
    let dj = (b.j - a.j) as i128;
    // |Δi u₁ + Δj u₂|² / d² with u₁·u₂ = d²/2
    let q = (di * di + di * dj + dj * dj) as u128;
    let root = q.isqrt();
    (if root * root == q { root } else { root + 1 }) as u64
}

/// [`site_distance`] over many pairs; output order follows input order.
pub fn site_distances(pairs: &[(SiteCoord, SiteCoord)]) -> Vec<u64> {
    pairs.par_iter().map(|&(a, b)| site_distance(a, b)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimingRow {
    #[serde(rename = "N_sites")]
    pub sites: u32,
    pub v_um_per_ms: f64,
    pub p1: f64,
    pub tau_e_ms: f64,
    #[serde(rename = "Nq")]
    pub qubits: f64,
}

pub fn timing_table(params: &TransportParams, sites: &[u32], fidelity_target: f64) -> Result<Vec<TimingRow>> {
    sites
        .iter()
        .map(|&n| {
            let (v, p1) = if n == 0 {
                (f64::INFINITY, 0.0)
            } else {
                let v = params.max_velocity(n, fidelity_target)?;
                (v, params.transport_error(n, params.reduced_velocity(v))?)
            };
            Ok(TimingRow {
                sites: n,
                v_um_per_ms: m_per_s_to_um_per_ms(v),
                p1,
                tau_e_ms: entangle_time(n) * 1e3,
                qubits: qubit_reach(n),
            })
        })
        .collect()
}

pub fn write_timing_csv(rows: &[TimingRow], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "N_sites,v_um_per_ms,p1,tau_e_ms,Nq")?;
    for r in rows {
        writeln!(out, "{},{},{},{},{}", r.sites, r.v_um_per_ms, r.p1, r.tau_e_ms, r.qubits)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn calibrated() -> TransportParams {
        TransportParams::reference().calibrated(CalibrationAnchor::default()).unwrap()
    }

    #[test]
    fn reach_constant() {
        assert!((REACH_PER_SITE2 - 4.0 * PI / 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn wavenumber_times_spacing_is_pi() {
        let p = TransportParams::reference();
        assert_eq!(p.wavenumber() * p.spacing, PI);
    }

    #[test]
    fn gaussian_factor_reference() {
        let f = TransportParams::reference().gaussian_factor();
        assert!((f - 0.9709).abs() < 1e-4);
        assert!(f > 0.0 && f <= 1.0);
    }

    #[test]
    fn static_lattice_has_no_error() {
        assert_eq!(calibrated().transport_error(5, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn calibration_reproduces_anchor() {
        let p = calibrated();
        assert!((p.transport_error(1, 0.03).unwrap() - 0.01).abs() < 1e-15);
        assert!((p.transport_error(4, 0.03 / 4.0).unwrap() - 0.01).abs() < 1e-15);
        assert!((p.depth_factor - 7.41).abs() < 0.01);
        assert!((p.raw_depth_factor() - 10.75).abs() < 0.05);
    }

    #[test]
    fn velocity_bound_reference() {
        let v = m_per_s_to_um_per_ms(calibrated().max_velocity(1, 0.99).unwrap());
        assert!((v - 3.2).abs() < 0.05, "v = {v}");
    }

    #[test]
    fn velocity_bound_limits() {
        let p = calibrated();
        assert!(p.max_velocity(1, 1.0 - 1e-12).unwrap() < 1e-12);
        assert!(p.max_velocity(0, 0.99).is_err());
        assert!(p.max_velocity(1, 1.0).is_err());
        let zero = p.with_depth_factor(0.0);
        assert!(matches!(zero.max_velocity(1, 0.9), Err(Error::Infeasible(_))));
    }

    #[test]
    fn error_is_capped() {
        assert_eq!(calibrated().transport_error(1000, 10.0).unwrap(), 1.0);
        assert!(calibrated().transport_error(1, -1.0).is_err());
    }

    #[test]
    fn scaling_laws() {
        assert_eq!(entangle_time(0), 5e-3);
        assert!((entangle_time(10) - 45e-3).abs() < 1e-15);
        assert_eq!(qubit_reach(0), 0.0);
        assert!((qubit_reach(1) - 7.255).abs() < 1e-3);
        assert!((reach_time_coefficient() * 1e3 - 0.0551).abs() < 1e-4);
    }

    #[test]
    fn transport_time_decomposition() {
        // v = (4/N) µm/ms over d = 1.5 µm gives 0.375 N² ms
        for n in 1..20u32 {
            let v = 4.0 / n as f64 * 1e-3;
            let t = n as f64 * 1.5e-6 / v;
            let formula = entangle_time(n) - TRANSITIONS_TIME;
            assert!(((t - formula) / formula).abs() < 0.1);
        }
        let b = entangle_timing(&calibrated(), 3, 0.99).unwrap();
        assert!((b.transitions + b.transport - b.total).abs() < 1e-15);
        assert!(b.transport_kinematic > 0.0);
    }

    #[test]
    fn site_distance_basics() {
        let o = SiteCoord::new(0, 0);
        assert_eq!(site_distance(o, o), 0);
        for n in [(1, 0), (0, 1), (-1, 1), (1, -1), (-1, 0), (0, -1)] {
            assert_eq!(site_distance(o, SiteCoord::new(n.0, n.1)), 1);
        }
    }

    #[test]
    fn site_distance_brute_force_patch() {
        let (u1, u2) = ((1.0, 0.0), (0.5, 3f64.sqrt() / 2.0));
        let sites: Vec<SiteCoord> = (0..=10).flat_map(|i| (0..=10).map(move |j| SiteCoord::new(i, j))).collect();
        let pairs: Vec<_> = sites.iter().flat_map(|&a| sites.iter().map(move |&b| (a, b))).collect();
        let fast = site_distances(&pairs);
        for (&(a, b), &n) in pairs.iter().zip(&fast) {
            let di = (b.i - a.i) as f64;
            let dj = (b.j - a.j) as f64;
            let x = di * u1.0 + dj * u2.0;
            let y = di * u1.1 + dj * u2.1;
            let oracle = ((x * x + y * y).sqrt() - 1e-9).ceil().max(0.0) as u64;
            assert_eq!(n, oracle, "{a:?} -> {b:?}");
        }
        // opposite corners of the rhombus: long diagonal √300 ≈ 17.32
        assert_eq!(site_distance(SiteCoord::new(0, 0), SiteCoord::new(10, 10)), 18);
        assert_eq!(site_distance(SiteCoord::new(10, 0), SiteCoord::new(0, 10)), 10);
    }

    #[test]
    fn timing_rows_and_csv() {
        let rows = timing_table(&calibrated(), &[0, 1, 2], 0.99).unwrap();
        assert!((rows[1].p1 - 0.01).abs() < 1e-12);
        assert!((rows[2].v_um_per_ms * 2.0 - rows[1].v_um_per_ms).abs() < 1e-12);
        let mut buf = Vec::new();
        write_timing_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("N_sites,v_um_per_ms,p1,tau_e_ms,Nq\n"));
        assert_eq!(text.lines().count(), 4);
    }

    proptest! {
        #[test]
        fn monotone_in_each_argument(n in 1u32..50, nu in 0.0f64..0.05, g in 0.1f64..20.0, dn in 1u32..5, dnu in 0.0f64..0.01, dg in 0.0f64..5.0) {
            let p = TransportParams::reference().with_depth_factor(g);
            let base = p.transport_error(n, nu).unwrap();
            prop_assert!(p.transport_error(n + dn, nu).unwrap() >= base);
            prop_assert!(p.transport_error(n, nu + dnu).unwrap() >= base);
            prop_assert!(p.with_depth_factor(g + dg).transport_error(n, nu).unwrap() >= base);
        }

        #[test]
        fn raw_factor_monotone_in_depth(u in 1e-31f64..1e-28, du in 0.0f64..1e-28) {
            let r = TransportParams::reference();
            let a = TransportParams::new(r.spacing, r.oscillator_length, r.trap_frequency, r.alpha, u).unwrap();
            let b = TransportParams::new(r.spacing, r.oscillator_length, r.trap_frequency, r.alpha, u + du).unwrap();
            prop_assert!(b.transport_error(3, 0.01).unwrap() >= a.transport_error(3, 0.01).unwrap());
        }

        #[test]
        fn velocity_round_trip(n in 1u32..100, target in 0.5f64..0.9999) {
            let p = calibrated();
            let v = p.max_velocity(n, target).unwrap();
            let p1 = p.transport_error(n, p.reduced_velocity(v)).unwrap();
            prop_assert!((p1 - (1.0 - target)).abs() < 1e-6);
            let v2 = p.max_velocity(2 * n, target).unwrap();
            prop_assert!((v2 / v - 0.5).abs() < 1e-12);
        }

        #[test]
        fn entangle_time_pure_quadratic(n in 1u32..30) {
            let d2 = entangle_time(n + 1) - 2.0 * entangle_time(n) + entangle_time(n - 1);
            let expected = 2.0 * TRANSPORT_TIME_PER_SITE2;
            prop_assert!(((d2 - expected) / expected).abs() < 1e-12);
        }
    }
}
