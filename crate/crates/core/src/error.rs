use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown species `{0}` (expected one of: Li6, Cs133)")]
    UnknownSpecies(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("detuning {detuning:.4e} rad/s is within 10 linewidths of resonance (linewidth {linewidth:.4e} rad/s)")]
    NearResonance { detuning: f64, linewidth: f64 },

    #[error("geometry: 2*lambda/(3*d) = {0:.6} exceeds 1, no real beam angle exists")]
    Geometry(f64),

    #[error("phase shifts {0:?} do not correspond to a rigid translation of the pattern")]
    NonTranslational([f64; 3]),

    #[error("scattering length {a:.4e} m is outside the halo regime 0 < a < r0/2 (r0 = {r0:.4e} m)")]
    Regime { a: f64, r0: f64 },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("invalid pulse channel: {0}")]
    InvalidChannel(String),

    #[error("molecular level busy: {0}")]
    MolecularLevelBusy(String),

    #[error("input state does not satisfy the `{step}` precondition (fidelity {fidelity:.3e} to required form)")]
    Precondition { step: &'static str, fidelity: f64 },

    #[error("register has {0:.3e} population in molecular levels")]
    MolecularOccupied(f64),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("timestamps of the two channels are not aligned")]
    MisalignedTimestamps,

    #[error("sampling is not uniform: {0}")]
    NonUniformSampling(String),

    #[error("degenerate detunings: D_FS denominator vanishes")]
    DegenerateDetuning,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config: {0}")]
    Config(String),

    #[error("numerical: {0}")]
    Numerical(String),

    #[error("i/o: {0}")]
    Io(String),
}
