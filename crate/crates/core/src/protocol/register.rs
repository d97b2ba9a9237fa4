use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Number of basis levels: 8 qubit states plus two molecular blocks of 8.
pub const LEVELS: usize = 24;
const QUBIT_LEVELS: usize = 8;
/// Population below which a level counts as empty.
pub const EMPTY_THRESHOLD: f64 = 1e-20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Qubit {
    Cs,
    LiA,
    LiB,
}

impl Qubit {
    pub(crate) fn bit(self) -> usize {
        match self {
            Qubit::Cs => 2,
            Qubit::LiA => 1,
            Qubit::LiB => 0,
        }
    }
}

impl fmt::Display for Qubit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Qubit::Cs => "Cs",
            Qubit::LiA => "Li_a",
            Qubit::LiB => "Li_b",
        })
    }
}

/// Lithium qubit site addressed by a molecular channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum LiSite {
    A,
    B,
}

impl LiSite {
    pub fn qubit(self) -> Qubit {
        match self {
            LiSite::A => Qubit::LiA,
            LiSite::B => Qubit::LiB,
        }
    }

    pub fn other(self) -> LiSite {
        match self {
            LiSite::A => LiSite::B,
            LiSite::B => LiSite::A,
        }
    }

    fn index(self) -> usize {
        match self {
            LiSite::A => 0,
            LiSite::B => 1,
        }
    }
}

/// Spin-channel-selective molecular bound state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum MolecularLevel {
    M,
    MPrime,
}

impl MolecularLevel {
    fn block(self) -> usize {
        match self {
            MolecularLevel::M => 1,
            MolecularLevel::MPrime => 2,
        }
    }
}

impl fmt::Display for MolecularLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MolecularLevel::M => "M",
            MolecularLevel::MPrime => "M'",
        })
    }
}

/// Computational state of the Cs messenger and one Li qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct PairState {
    pub cs: u8,
    pub li: u8,
}

impl PairState {
    pub const fn new(cs: u8, li: u8) -> Self {
        PairState { cs, li }
    }
}

impl fmt::Display for PairState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|C{},L{}>", self.cs, self.li)
    }
}

/// Basis level of the register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    Qubits { cs: u8, li_a: u8, li_b: u8 },
    Molecule { level: MolecularLevel, partner: LiSite, spectator: u8 },
}

pub(crate) fn qubit_index(cs: u8, li_a: u8, li_b: u8) -> usize {
    ((cs as usize) << 2) | ((li_a as usize) << 1) | li_b as usize
}

pub(crate) fn pair_index(pair: PairState, target: LiSite, spectator: u8) -> usize {
    match target {
        LiSite::A => qubit_index(pair.cs, pair.li, spectator),
        LiSite::B => qubit_index(pair.cs, spectator, pair.li),
    }
}

pub(crate) fn molecule_index(level: MolecularLevel, partner: LiSite, spectator: u8) -> usize {
    QUBIT_LEVELS * level.block() + 2 * partner.index() + spectator as usize
}

impl Level {
    pub fn index(self) -> usize {
        match self {
            Level::Qubits { cs, li_a, li_b } => qubit_index(cs, li_a, li_b),
            Level::Molecule { level, partner, spectator } => molecule_index(level, partner, spectator),
        }
    }

    /// Inverse of [`Level::index`]; `None` for padding slots of the molecular blocks.
    pub fn from_index(i: usize) -> Option<Level> {
        if i < QUBIT_LEVELS {
            return Some(Level::Qubits { cs: (i >> 2 & 1) as u8, li_a: (i >> 1 & 1) as u8, li_b: (i & 1) as u8 });
        }
        let level = match i / QUBIT_LEVELS {
            1 => MolecularLevel::M,
            2 => MolecularLevel::MPrime,
            _ => return None,
        };
        let slot = i % QUBIT_LEVELS;
        let partner = match slot / 2 {
            0 => LiSite::A,
            1 => LiSite::B,
            _ => return None,
        };
        Some(Level::Molecule { level, partner, spectator: (slot & 1) as u8 })
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Level::Qubits { cs, li_a, li_b } => write!(f, "|{cs}{li_a}{li_b}>"),
            Level::Molecule { level, partner, spectator } => {
                write!(f, "|{level}(Cs+{}),{}={spectator}>", partner.qubit(), partner.other().qubit())
            }
        }
    }
}

/// Amplitudes over the 24 register levels plus the population lost to a
/// traced-out sink. `‖amplitudes‖² + lost = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolRegister {
    amplitudes: [Complex64; LEVELS],
    lost: f64,
}

impl ProtocolRegister {
    /// Product state of the three qubits, each given as `(amp₀, amp₁)`.
    pub fn product(cs: [Complex64; 2], li_a: [Complex64; 2], li_b: [Complex64; 2]) -> Result<Self> {
        let mut amplitudes = [Complex64::new(0.0, 0.0); LEVELS];
        for c in 0..2u8 {
            for a in 0..2u8 {
                for b in 0..2u8 {
                    amplitudes[qubit_index(c, a, b)] = cs[c as usize] * li_a[a as usize] * li_b[b as usize];
                }
            }
        }
        Self::from_qubit_amplitudes(&amplitudes[..QUBIT_LEVELS])
    }

    /// Normalizes the given 8 qubit amplitudes (index `cs·4 + li_a·2 + li_b`).
    pub fn from_qubit_amplitudes(qubits: &[Complex64]) -> Result<Self> {
        if qubits.len() != QUBIT_LEVELS {
            return Err(Error::InvalidArgument(format!("expected 8 qubit amplitudes, got {}", qubits.len())));
        }
        let norm: f64 = qubits.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidArgument("state has zero or non-finite norm".into()));
        }
        let mut amplitudes = [Complex64::new(0.0, 0.0); LEVELS];
        for (dst, src) in amplitudes.iter_mut().zip(qubits) {
            *dst = src / norm;
        }
        Ok(ProtocolRegister { amplitudes, lost: 0.0 })
    }

    /// Messenger in `(|0⟩+|1⟩)/√2`, both Li qubits in `|0⟩`.
    pub fn initial() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self::product([one * h, one * h], [one, zero], [one, zero]).expect("normalized")
    }

    pub fn amplitudes(&self) -> &[Complex64; LEVELS] {
        &self.amplitudes
    }

    pub fn amplitude(&self, level: Level) -> Complex64 {
        self.amplitudes[level.index()]
    }

    pub fn qubit_amplitudes(&self) -> &[Complex64] {
        &self.amplitudes[..QUBIT_LEVELS]
    }

    /// Population lost to the sink.
    pub fn lost(&self) -> f64 {
        self.lost
    }

    /// Population remaining in the register levels.
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn molecular_population(&self) -> f64 {
        self.amplitudes[QUBIT_LEVELS..].iter().map(|a| a.norm_sqr()).sum()
    }

    pub(crate) fn molecular_population_except(&self, level: MolecularLevel, partner: LiSite) -> f64 {
        let keep = [molecule_index(level, partner, 0), molecule_index(level, partner, 1)];
        (QUBIT_LEVELS..LEVELS).filter(|i| !keep.contains(i)).map(|i| self.amplitudes[i].norm_sqr()).sum()
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64; LEVELS] {
        &mut self.amplitudes
    }

    /// Scales every amplitude by `√keep`, moving the remainder to the sink.
    pub(crate) fn attenuate(&mut self, keep: f64) {
        let before = self.norm_sqr();
        let factor = keep.clamp(0.0, 1.0).sqrt();
        for a in self.amplitudes.iter_mut() {
            *a *= factor;
        }
        self.lost += before - self.norm_sqr();
    }

    /// `⟨target|ψ⟩` over the qubit levels; `target` is indexed as in
    /// [`Self::from_qubit_amplitudes`].
    pub fn overlap(&self, target: &[Complex64]) -> Complex64 {
        target.iter().zip(self.qubit_amplitudes()).map(|(t, a)| t.conj() * a).sum()
    }

    /// `|⟨target|ψ⟩|²`; sink population counts as infidelity.
    pub fn fidelity(&self, target: &[Complex64]) -> f64 {
        self.overlap(target).norm_sqr()
    }

    /// Non-negligible components as `(level, amplitude)`, in index order.
    pub fn ket(&self, threshold: f64) -> Vec<(Level, Complex64)> {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() >= threshold)
            .filter_map(|(i, &a)| Level::from_index(i).map(|l| (l, a)))
            .collect()
    }
}

impl fmt::Display for ProtocolRegister {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.ket(1e-6);
        if terms.is_empty() {
            return f.write_str("0");
        }
        for (n, (level, a)) in terms.iter().enumerate() {
            if n > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({:+.6}{:+.6}i){level}", a.re, a.im)?;
        }
        if self.lost > 0.0 {
            write!(f, "  [lost {:.3e}]", self.lost)?;
        }
        Ok(())
    }
}
