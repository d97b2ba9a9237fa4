use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::register::{
    molecule_index, pair_index, LiSite, MolecularLevel, PairState, ProtocolRegister, Qubit, EMPTY_THRESHOLD,
};
use crate::coupling::CouplingBudget;
use crate::error::{Error, Result};

/// Minimum overlap with the required input form for an ideal entangle step.
pub const PRECONDITION_FIDELITY: f64 = 1.0 - 1e-9;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Resonant rf coupling between one pair state and a molecular level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Channel {
    pub pair: PairState,
    pub molecule: MolecularLevel,
    pub target: LiSite,
}

impl Channel {
    pub const fn new(pair: PairState, molecule: MolecularLevel, target: LiSite) -> Self {
        Channel { pair, molecule, target }
    }
}

/// Error terms applied per pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PulseErrors {
    pub overlap_fidelity: f64,
    pub leakage: f64,
}

impl PulseErrors {
    pub const IDEAL: PulseErrors = PulseErrors { overlap_fidelity: 1.0, leakage: 0.0 };

    pub fn new(overlap_fidelity: f64, leakage: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&overlap_fidelity) || !(0.0..=1.0).contains(&leakage) {
            return Err(Error::InvalidArgument(format!(
                "pulse errors must lie in [0, 1] (F = {overlap_fidelity}, dp = {leakage})"
            )));
        }
        Ok(PulseErrors { overlap_fidelity, leakage })
    }

    pub fn is_ideal(&self) -> bool {
        self.overlap_fidelity == 1.0 && self.leakage == 0.0
    }

    /// Population retained by one pulse.
    pub fn retention(&self) -> f64 {
        self.overlap_fidelity * (1.0 - self.leakage)
    }
}

impl From<&CouplingBudget> for PulseErrors {
    fn from(b: &CouplingBudget) -> Self {
        PulseErrors { overlap_fidelity: b.overlap_fidelity, leakage: b.leakage }
    }
}

/// Two-level pulse of area `θ` and phase `φ` on amplitudes `(g, e)`:
/// `[[c, −i e^{−iφ} s], [−i e^{iφ} s, c]]`, `c = cos θ/2`, `s = sin θ/2`.
fn rotate_pair(g: Complex64, e: Complex64, area: f64, phase: f64) -> (Complex64, Complex64) {
    let (s, c) = (0.5 * area).sin_cos();
    let down = -I * Complex64::from_polar(s, -phase);
    let up = -I * Complex64::from_polar(s, phase);
    (c * g + down * e, up * g + c * e)
}

fn check_area(area: f64) -> Result<()> {
    if !(0.0..=2.0 * PI).contains(&area) {
        return Err(Error::InvalidArgument(format!("pulse area must lie in [0, 2π], got {area}")));
    }
    Ok(())
}

fn check_free(reg: &ProtocolRegister, molecule: MolecularLevel, target: LiSite) -> Result<()> {
    let other = reg.molecular_population_except(molecule, target);
    if other > EMPTY_THRESHOLD {
        return Err(Error::MolecularLevelBusy(format!(
            "{molecule} on Li_{target:?} requested while another molecular level holds population {other:.3e}"
        )));
    }
    Ok(())
}

/// Pulse of arbitrary area on one channel; every other level is untouched.
pub fn apply_pulse(reg: &ProtocolRegister, channel: Channel, area: f64, phase: f64) -> Result<ProtocolRegister> {
    check_area(area)?;
    check_free(reg, channel.molecule, channel.target)?;
    let mut out = reg.clone();
    let amps = out.amplitudes_mut();
    for spectator in 0..2u8 {
        let g = pair_index(channel.pair, channel.target, spectator);
        let e = molecule_index(channel.molecule, channel.target, spectator);
        (amps[g], amps[e]) = rotate_pair(amps[g], amps[e], area, phase);
    }
    Ok(out)
}

/// Resonant π-pulse: `|pair⟩ → −i|M⟩`, `|M⟩ → −i|pair⟩`.
pub fn apply_pi_pulse(reg: &ProtocolRegister, channel: Channel) -> Result<ProtocolRegister> {
    apply_pulse(reg, channel, PI, 0.0)
}

/// Two-tone pulse coupling the superposition `bright = b₀|C,L0⟩ + b₁|C,L1⟩`
/// of the target qubit, within messenger state `cs`, to a molecular level.
/// The orthogonal dark state is untouched.
pub fn apply_bright_pulse(
    reg: &ProtocolRegister,
    cs: u8,
    target: LiSite,
    molecule: MolecularLevel,
    bright: [Complex64; 2],
    area: f64,
    phase: f64,
) -> Result<ProtocolRegister> {
    check_area(area)?;
    check_free(reg, molecule, target)?;
    let n = (bright[0].norm_sqr() + bright[1].norm_sqr()).sqrt();
    if !(n > 0.0) {
        return Err(Error::InvalidArgument("bright state has zero norm".into()));
    }
    let b = [bright[0] / n, bright[1] / n];
    let mut out = reg.clone();
    let amps = out.amplitudes_mut();
    for spectator in 0..2u8 {
        let i0 = pair_index(PairState::new(cs, 0), target, spectator);
        let i1 = pair_index(PairState::new(cs, 1), target, spectator);
        let e = molecule_index(molecule, target, spectator);
        let beta = b[0].conj() * amps[i0] + b[1].conj() * amps[i1];
        let dark = [amps[i0] - beta * b[0], amps[i1] - beta * b[1]];
        let (beta, m) = rotate_pair(beta, amps[e], area, phase);
        amps[i0] = dark[0] + beta * b[0];
        amps[i1] = dark[1] + beta * b[1];
        amps[e] = m;
    }
    Ok(out)
}

/// Two-pulse transfer `pair_in → molecule → pair_out` on one Li site.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PulseSpec {
    pub target: LiSite,
    pub pair_in: PairState,
    pub molecule: MolecularLevel,
    pub pair_out: PairState,
    pub area: f64,
    pub phase: f64,
    pub errors: [PulseErrors; 2],
}

impl PulseSpec {
    pub fn new(target: LiSite, pair_in: PairState, molecule: MolecularLevel, pair_out: PairState) -> Self {
        PulseSpec { target, pair_in, molecule, pair_out, area: PI, phase: 0.0, errors: [PulseErrors::IDEAL; 2] }
    }

    pub fn with_errors(self, errors: [PulseErrors; 2]) -> Self {
        PulseSpec { errors, ..self }
    }

    pub fn apply(&self, reg: &ProtocolRegister) -> Result<ProtocolRegister> {
        if self.pair_in == self.pair_out {
            return Err(Error::InvalidChannel(format!("input and output pair states coincide ({})", self.pair_in)));
        }
        let first = Channel::new(self.pair_in, self.molecule, self.target);
        let second = Channel::new(self.pair_out, self.molecule, self.target);
        let mut out = apply_pulse(reg, first, self.area, self.phase)?;
        out.attenuate(self.errors[0].retention());
        out = apply_pulse(&out, second, self.area, self.phase)?;
        out.attenuate(self.errors[1].retention());
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EntangleStep {
    /// Entangle the messenger with Li_a through `M` in the Cs=0 manifold.
    Create,
    /// Hand the messenger's entanglement to Li_b through `M'` in the Cs=1 manifold.
    Swap,
}

impl EntangleStep {
    pub fn pulses(self) -> PulseSpec {
        match self {
            EntangleStep::Create => {
                PulseSpec::new(LiSite::A, PairState::new(0, 0), MolecularLevel::M, PairState::new(0, 1))
            }
            EntangleStep::Swap => {
                PulseSpec::new(LiSite::B, PairState::new(1, 0), MolecularLevel::MPrime, PairState::new(0, 1))
            }
        }
    }

    /// Required input form (8 qubit amplitudes) for the ideal step.
    pub fn required_input(self) -> Vec<Complex64> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut v = vec![Complex64::new(0.0, 0.0); 8];
        match self {
            EntangleStep::Create => {
                v[0b000] = h.into();
                v[0b100] = h.into();
            }
            EntangleStep::Swap => {
                v[0b010] = (-h).into();
                v[0b100] = h.into();
            }
        }
        v
    }
}

/// Projection of `reg` onto the required form: messenger `|+⟩` and target
/// `|0⟩` for `Create`; messenger–Li_a pair `(−|01⟩+|10⟩)/√2` and Li_b `|0⟩`
/// for `Swap`. The remaining qubit is free.
fn precondition_fidelity(reg: &ProtocolRegister, step: EntangleStep) -> f64 {
    let q = reg.qubit_amplitudes();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match step {
        EntangleStep::Create => (0..2).map(|b| (h * (q[b] + q[0b100 | b])).norm_sqr()).sum(),
        EntangleStep::Swap => (h * (q[0b100] - q[0b010])).norm_sqr(),
    }
}

pub fn entangle_step(reg: &ProtocolRegister, step: EntangleStep, budget: &CouplingBudget) -> Result<ProtocolRegister> {
    let e = PulseErrors::from(budget);
    entangle_step_with(reg, step, [e, e])
}

/// [`entangle_step`] with separate error terms for each of the two pulses.
pub fn entangle_step_with(
    reg: &ProtocolRegister,
    step: EntangleStep,
    errors: [PulseErrors; 2],
) -> Result<ProtocolRegister> {
    if errors.iter().all(PulseErrors::is_ideal) {
        let fidelity = precondition_fidelity(reg, step);
        if fidelity < PRECONDITION_FIDELITY {
            let name = match step {
                EntangleStep::Create => "create",
                EntangleStep::Swap => "swap",
            };
            return Err(Error::Precondition { step: name, fidelity });
        }
    }
    step.pulses().with_errors(errors).apply(reg)
}

/// Loss of the transport leg: population `p₁` leaves the register.
pub fn apply_transport(reg: &ProtocolRegister, transport_error: f64) -> Result<ProtocolRegister> {
    if !(0.0..=1.0).contains(&transport_error) {
        return Err(Error::InvalidArgument(format!("transport error must lie in [0, 1], got {transport_error}")));
    }
    let mut out = reg.clone();
    out.attenuate(1.0 - transport_error);
    Ok(out)
}

/// Bloch vector `(x, y, z)` to the spinor whose `n·σ` eigenvalue is +1.
fn spinor(n: [f64; 3]) -> [Complex64; 2] {
    let theta = n[2].clamp(-1.0, 1.0).acos();
    let phi = n[1].atan2(n[0]);
    [Complex64::new((0.5 * theta).cos(), 0.0), Complex64::from_polar((0.5 * theta).sin(), phi)]
}

/// Bloch rotation `R(θ, φ) = exp(−iθ/2 (cos φ σx + sin φ σy))` of one Li
/// qubit. Realized in each messenger manifold as two resonant 2π bright-state
/// pulses: reflections about `n₁ = ẑ` then `n₂ = cos(θ/2) ẑ + sin(θ/2) m̂×ẑ`,
/// whose product is exactly `R(θ, φ)` with no global phase.
pub fn single_qubit_rotation(
    reg: &ProtocolRegister,
    target: LiSite,
    theta: f64,
    phi: f64,
    budget: &CouplingBudget,
) -> Result<ProtocolRegister> {
    let retention = PulseErrors::from(budget).retention();
    let axis = [phi.cos(), phi.sin()];
    // m̂ × ẑ = (m_y, −m_x, 0)
    let (s, c) = (0.5 * theta).sin_cos();
    let n2 = [s * axis[1], -s * axis[0], c];
    let mut out = reg.clone();
    for (cs, molecule) in [(0u8, MolecularLevel::M), (1u8, MolecularLevel::MPrime)] {
        for n in [[0.0, 0.0, 1.0], n2] {
            out = apply_bright_pulse(&out, cs, target, molecule, spinor(n), 2.0 * PI, 0.0)?;
            out.attenuate(retention);
        }
    }
    Ok(out)
}

/// Bloch rotation matrix on `{|0⟩, |1⟩}` for reference.
pub fn rotation_matrix(theta: f64, phi: f64) -> [[Complex64; 2]; 2] {
    let (s, c) = (0.5 * theta).sin_cos();
    [[c.into(), -I * Complex64::from_polar(s, -phi)], [-I * Complex64::from_polar(s, phi), c.into()]]
}

/// Applies a 2×2 unitary to one qubit of the qubit levels; test helper and
/// reference for the pulse constructions.
pub fn apply_qubit_gate(reg: &ProtocolRegister, qubit: Qubit, u: [[Complex64; 2]; 2]) -> ProtocolRegister {
    let mut out = reg.clone();
    let bit = 1usize << qubit.bit();
    let amps = out.amplitudes_mut();
    for i in 0..8 {
        if i & bit == 0 {
            let (a0, a1) = (amps[i], amps[i | bit]);
            amps[i] = u[0][0] * a0 + u[0][1] * a1;
            amps[i | bit] = u[1][0] * a0 + u[1][1] * a1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::register::Level;
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_register(rng: &mut ChaCha8Rng) -> ProtocolRegister {
        let amps: Vec<Complex64> =
            (0..8).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        ProtocolRegister::from_qubit_amplitudes(&amps).unwrap()
    }

    fn basis(cs: u8, a: u8, b: u8) -> ProtocolRegister {
        let mut v = vec![c(0.0, 0.0); 8];
        v[super::super::register::qubit_index(cs, a, b)] = c(1.0, 0.0);
        ProtocolRegister::from_qubit_amplitudes(&v).unwrap()
    }

    fn max_diff(a: &ProtocolRegister, b: &ProtocolRegister) -> f64 {
        a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    const CREATE_IN: Channel = Channel::new(PairState::new(0, 0), MolecularLevel::M, LiSite::A);

    #[test]
    fn off_channel_state_unchanged() {
        let r = basis(1, 0, 0);
        let out = apply_pi_pulse(&r, CREATE_IN).unwrap();
        assert_eq!(out, r);
    }

    #[test]
    fn pi_pulse_pair_product() {
        let r = basis(0, 0, 0);
        let m = apply_pi_pulse(&r, CREATE_IN).unwrap();
        let mol = Level::Molecule { level: MolecularLevel::M, partner: LiSite::A, spectator: 0 };
        assert!((m.amplitude(mol) - c(0.0, -1.0)).norm() < 1e-15);
        let out = apply_pi_pulse(&m, Channel::new(PairState::new(0, 1), MolecularLevel::M, LiSite::A)).unwrap();
        assert!((out.amplitude(Level::Qubits { cs: 0, li_a: 1, li_b: 0 }) - c(-1.0, 0.0)).norm() < 1e-15);
        assert!(out.molecular_population() < 1e-30);
    }

    #[test]
    fn four_pi_pulses_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = random_register(&mut rng);
        let mut out = r.clone();
        for _ in 0..4 {
            out = apply_pi_pulse(&out, CREATE_IN).unwrap();
        }
        assert!(max_diff(&out, &r) < 1e-14);
    }

    #[test]
    fn unitarity_and_inner_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let a = random_register(&mut rng);
            let b = random_register(&mut rng);
            let ch = Channel::new(
                PairState::new(rng.random_range(0..2), rng.random_range(0..2)),
                if rng.random_bool(0.5) { MolecularLevel::M } else { MolecularLevel::MPrime },
                if rng.random_bool(0.5) { LiSite::A } else { LiSite::B },
            );
            let area = rng.random_range(0.0..2.0 * PI);
            let phase = rng.random_range(0.0..2.0 * PI);
            let a2 = apply_pulse(&a, ch, area, phase).unwrap();
            let b2 = apply_pulse(&b, ch, area, phase).unwrap();
            assert!((a2.norm_sqr() - 1.0).abs() < 1e-12);
            let before: Complex64 = a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| x.conj() * y).sum();
            let after: Complex64 = a2.amplitudes().iter().zip(b2.amplitudes()).map(|(x, y)| x.conj() * y).sum();
            assert!((before - after).norm() < 1e-10);
        }
    }

    #[test]
    fn composite_rejects_identical_pairs() {
        let spec = PulseSpec::new(LiSite::A, PairState::new(0, 0), MolecularLevel::M, PairState::new(0, 0));
        assert!(matches!(spec.apply(&ProtocolRegister::initial()), Err(Error::InvalidChannel(_))));
    }

    #[test]
    fn busy_molecular_level_rejected() {
        let half = apply_pi_pulse(&basis(0, 0, 0), CREATE_IN).unwrap();
        let other = Channel::new(PairState::new(1, 0), MolecularLevel::MPrime, LiSite::B);
        assert!(matches!(apply_pi_pulse(&half, other), Err(Error::MolecularLevelBusy(_))));
    }

    #[test]
    fn bad_area_rejected() {
        assert!(apply_pulse(&ProtocolRegister::initial(), CREATE_IN, 7.0, 0.0).is_err());
    }

    #[test]
    fn create_then_swap_ideal() {
        let ideal = CouplingBudget::ideal();
        let r1 = entangle_step(&ProtocolRegister::initial(), EntangleStep::Create, &ideal).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let q = r1.qubit_amplitudes();
        assert!((q[0b010] - c(-h, 0.0)).norm() < 1e-12);
        assert!((q[0b100] - c(h, 0.0)).norm() < 1e-12);
        let r2 = entangle_step(&r1, EntangleStep::Swap, &ideal).unwrap();
        let q = r2.qubit_amplitudes();
        assert!((q[0b010] - c(-h, 0.0)).norm() < 1e-12);
        assert!((q[0b001] - c(-h, 0.0)).norm() < 1e-12);
        assert!(r2.molecular_population() < 1e-24);
    }

    #[test]
    fn precondition_enforced_in_ideal_mode() {
        let wrong = basis(0, 1, 0);
        let err = entangle_step(&wrong, EntangleStep::Create, &CouplingBudget::ideal()).unwrap_err();
        assert!(matches!(err, Error::Precondition { step: "create", .. }));
        let err =
            entangle_step(&ProtocolRegister::initial(), EntangleStep::Swap, &CouplingBudget::ideal()).unwrap_err();
        assert!(matches!(err, Error::Precondition { step: "swap", .. }));
        let noisy = CouplingBudget::from_errors(0.99, 0.0).unwrap();
        assert!(entangle_step(&wrong, EntangleStep::Create, &noisy).is_ok());
    }

    #[test]
    fn noisy_steps_lose_population_multiplicatively() {
        let b = CouplingBudget::from_errors(0.99, 0.002).unwrap();
        let r1 = entangle_step(&ProtocolRegister::initial(), EntangleStep::Create, &b).unwrap();
        let r2 = entangle_step(&apply_transport(&r1, 0.01).unwrap(), EntangleStep::Swap, &b).unwrap();
        let expected = (0.99f64 * 0.998).powi(4) * 0.99;
        assert!((r2.norm_sqr() - expected).abs() < 1e-12);
        assert!((r2.norm_sqr() + r2.lost() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_matches_reference_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let ideal = CouplingBudget::ideal();
        for _ in 0..100 {
            let r = random_register(&mut rng);
            let theta = rng.random_range(0.0..2.0 * PI);
            let phi = rng.random_range(-PI..PI);
            let site = if rng.random_bool(0.5) { LiSite::A } else { LiSite::B };
            let got = single_qubit_rotation(&r, site, theta, phi, &ideal).unwrap();
            let want = apply_qubit_gate(&r, site.qubit(), rotation_matrix(theta, phi));
            assert!(max_diff(&got, &want) < 1e-12);
            assert!(got.molecular_population() < 1e-24);
        }
    }

    #[test]
    fn rotation_special_cases() {
        let ideal = CouplingBudget::ideal();
        let r = basis(0, 0, 1);
        assert!(max_diff(&single_qubit_rotation(&r, LiSite::A, 0.0, 0.3, &ideal).unwrap(), &r) < 1e-15);
        let flipped = single_qubit_rotation(&r, LiSite::A, PI, 0.0, &ideal).unwrap();
        assert!((flipped.fidelity(basis(0, 1, 1).qubit_amplitudes()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let ideal = CouplingBudget::ideal();
        for _ in 0..100 {
            let r = random_register(&mut rng);
            let (t1, t2) = (rng.random_range(0.0..PI), rng.random_range(0.0..PI));
            let phi = rng.random_range(-PI..PI);
            let two = single_qubit_rotation(
                &single_qubit_rotation(&r, LiSite::B, t1, phi, &ideal).unwrap(),
                LiSite::B,
                t2,
                phi,
                &ideal,
            )
            .unwrap();
            let one = single_qubit_rotation(&r, LiSite::B, t1 + t2, phi, &ideal).unwrap();
            assert!(max_diff(&two, &one) < 1e-12);
        }
    }
}
