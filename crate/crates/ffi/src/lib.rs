//! C ABI for `licsq`.
//!
//! Every fallible call returns a [`LicsqStatus`]; on failure the message is
//! available from [`licsq_last_error`] on the same thread. Objects cross the
//! boundary as opaque handles that the caller releases with the matching
//! `_free` function. No Rust panic unwinds into C: panics are caught and
//! reported as `LICSQ_STATUS_PANIC`.
//!
//! # Safety
//!
//! Pointer arguments must be null or valid for the access implied by the
//! parameter: handles must come from this library and not yet be freed,
//! strings must be NUL-terminated, and out-pointers must be writable. Null is
//! always detected and reported as `LICSQ_STATUS_NULL_POINTER`.

// The contract above covers every entry point.
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use licsq::coupling::{CouplingBudget, GateInputs, RelativeTrap};
use licsq::lattice::{BichromaticLattice, LineModel, Requirements};
use licsq::protocol::{
    apply_transport, concurrence, entangle_step_with, error_injected_run, final_target, purity, EntangleStep,
    ProtocolRegister, PulseErrors, Qubit, SequenceErrors, LEVELS,
};
use licsq::species::{lookup_species, Species};
use licsq::stability::{analyze, read_series, species_dfs};
use licsq::transport::{entangle_time, qubit_reach, site_distance, CalibrationAnchor, SiteCoord, TransportParams};
use licsq::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LicsqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnknownSpecies = 3,
    Regime = 4,
    Infeasible = 5,
    Precondition = 6,
    InsufficientData = 7,
    Parse = 8,
    Io = 9,
    Numerical = 10,
    Panic = 11,
}

impl From<&Error> for LicsqStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::UnknownSpecies(_) => LicsqStatus::UnknownSpecies,
            Error::Regime { .. } => LicsqStatus::Regime,
            Error::Infeasible(_) => LicsqStatus::Infeasible,
            Error::Precondition { .. } | Error::MolecularOccupied(_) | Error::MolecularLevelBusy(_) => {
                LicsqStatus::Precondition
            }
            Error::InsufficientData(_) | Error::NonUniformSampling(_) => LicsqStatus::InsufficientData,
            Error::Parse { .. } | Error::Config(_) | Error::MisalignedTimestamps => LicsqStatus::Parse,
            Error::Io(_) => LicsqStatus::Io,
            Error::Numerical(_) | Error::DegenerateDetuning => LicsqStatus::Numerical,
            _ => LicsqStatus::InvalidArgument,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

enum Failure {
    Null(&'static str),
    Model(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Model(e)
    }
}

type Outcome = Result<(), Failure>;

/// Runs `body`, translating errors and panics into a status.
fn guard(body: impl FnOnce() -> Outcome) -> LicsqStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => LicsqStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("null pointer: {what}"));
            LicsqStatus::NullPointer
        }
        Ok(Err(Failure::Model(e))) => {
            set_last_error(e.to_string());
            LicsqStatus::from(&e)
        }
        Err(panic) => {
            let message = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {message}"));
            LicsqStatus::Panic
        }
    }
}

fn deref<'a, T>(ptr: *const T, what: &'static str) -> Result<&'a T, Failure> {
    // SAFETY: the caller passes either null or a pointer obtained from this library.
    unsafe { ptr.as_ref() }.ok_or(Failure::Null(what))
}

fn deref_mut<'a, T>(ptr: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    // SAFETY: as for `deref`, and the caller guarantees exclusive access.
    unsafe { ptr.as_mut() }.ok_or(Failure::Null(what))
}

fn write<T>(out: *mut T, value: T, what: &'static str) -> Outcome {
    *deref_mut(out, what)? = value;
    Ok(())
}

fn read_str<'a>(ptr: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(Failure::Null(what));
    }
    // SAFETY: non-null and NUL-terminated per the API contract.
    let s = unsafe { CStr::from_ptr(ptr) };
    s.to_str().map_err(|_| Failure::Model(Error::InvalidArgument(format!("{what} is not valid UTF-8"))))
}

fn into_handle<T>(value: T, out: *mut *mut T, what: &'static str) -> Outcome {
    let slot = deref_mut(out, what)?;
    *slot = Box::into_raw(Box::new(value));
    Ok(())
}

fn free_handle<T>(ptr: *mut T) {
    if !ptr.is_null() {
        // SAFETY: non-null handles come from `into_handle` and are freed once.
        drop(unsafe { Box::from_raw(ptr) });
    }
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn licsq_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn licsq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

// ---- species ----------------------------------------------------------------

pub struct LicsqSpecies(Species);

/// Looks up `"Li6"` or `"Cs133"`.
#[no_mangle]
pub unsafe extern "C" fn licsq_species_new(name: *const c_char, out: *mut *mut LicsqSpecies) -> LicsqStatus {
    guard(|| {
        let species = lookup_species(read_str(name, "name")?)?;
        into_handle(LicsqSpecies(species), out, "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn licsq_species_free(species: *mut LicsqSpecies) {
    free_handle(species);
}

#[no_mangle]
pub unsafe extern "C" fn licsq_species_mass_kg(species: *const LicsqSpecies, out: *mut f64) -> LicsqStatus {
    guard(|| write(out, deref(species, "species")?.0.mass, "out"))
}

/// Vector light-shift constant `D_FS` in light of `wavelength_m`.
#[no_mangle]
pub unsafe extern "C" fn licsq_species_dfs(
    species: *const LicsqSpecies,
    wavelength_m: f64,
    out: *mut f64,
) -> LicsqStatus {
    guard(|| {
        let d = species_dfs(&deref(species, "species")?.0, wavelength_m)?;
        write(out, d, "out")
    })
}

// ---- gate -------------------------------------------------------------------

/// Gate budget in SI units (rad/s, s, m).
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LicsqGateBudget {
    pub franck_condon: f64,
    pub franck_condon_quadrature: f64,
    pub rabi: f64,
    pub pulse_pair_time: f64,
    pub overlap_fidelity: f64,
    pub overlap_fidelity_3axis: f64,
    pub leakage: f64,
    pub vib_detuning: f64,
    pub r0: f64,
}

/// Budget for scattering length `a`, free Rabi rate `rabi_free`, pair offset
/// `offset` and a relative trap given as `(omega_rel, r0)`. A non-positive
/// `vib_detuning` selects `omega_rel`.
#[no_mangle]
pub unsafe extern "C" fn licsq_gate_budget(
    scattering_length: f64,
    rabi_free: f64,
    offset: f64,
    omega_rel: f64,
    r0: f64,
    reduced_mass: f64,
    vib_detuning: f64,
    out: *mut LicsqGateBudget,
) -> LicsqStatus {
    guard(|| {
        let inputs = GateInputs {
            scattering_length,
            rabi_free,
            offset,
            trap: RelativeTrap::Direct { omega_rel, r0, reduced_mass },
            vib_detuning: (vib_detuning > 0.0).then_some(vib_detuning),
        };
        let b = CouplingBudget::evaluate(&inputs)?;
        write(
            out,
            LicsqGateBudget {
                franck_condon: b.franck_condon,
                franck_condon_quadrature: b.franck_condon_quadrature,
                rabi: b.rabi,
                pulse_pair_time: b.pulse_pair_time,
                overlap_fidelity: b.overlap_fidelity,
                overlap_fidelity_3axis: b.overlap_fidelity_3axis,
                leakage: b.leakage,
                vib_detuning: b.vib_detuning,
                r0: b.r0,
            },
            "out",
        )
    })
}

// ---- transport --------------------------------------------------------------

pub struct LicsqTransport(TransportParams);

/// Reference Cs transport parameters, optionally calibrated to 1 % error at
/// reduced velocity 0.03 over one site.
#[no_mangle]
pub unsafe extern "C" fn licsq_transport_reference(calibrated: bool, out: *mut *mut LicsqTransport) -> LicsqStatus {
    guard(|| {
        let p = TransportParams::reference();
        let p = if calibrated { p.calibrated(CalibrationAnchor::default())? } else { p };
        into_handle(LicsqTransport(p), out, "out")
    })
}

/// Raw parameters: spacing (m), oscillator length (m), trap frequency
/// (rad/s), cross-talk factor, cross-talk depth (J).
#[no_mangle]
pub unsafe extern "C" fn licsq_transport_new(
    spacing: f64,
    oscillator_length: f64,
    trap_frequency: f64,
    alpha: f64,
    cross_talk_depth: f64,
    out: *mut *mut LicsqTransport,
) -> LicsqStatus {
    guard(|| {
        let p = TransportParams::new(spacing, oscillator_length, trap_frequency, alpha, cross_talk_depth)?;
        into_handle(LicsqTransport(p), out, "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn licsq_transport_free(transport: *mut LicsqTransport) {
    free_handle(transport);
}

/// Re-anchors the depth factor so that `error` is reached at
/// `reduced_velocity` over `sites`.
#[no_mangle]
pub unsafe extern "C" fn licsq_transport_calibrate(
    transport: *mut LicsqTransport,
    sites: u32,
    reduced_velocity: f64,
    error: f64,
) -> LicsqStatus {
    guard(|| {
        let t = deref_mut(transport, "transport")?;
        t.0 = t.0.calibrated(CalibrationAnchor { sites, reduced_velocity, error })?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn licsq_transport_error(
    transport: *const LicsqTransport,
    sites: u32,
    reduced_velocity: f64,
    out: *mut f64,
) -> LicsqStatus {
    guard(|| {
        let p = deref(transport, "transport")?.0.transport_error(sites, reduced_velocity)?;
        write(out, p, "out")
    })
}

/// Largest velocity (m/s) keeping the transport fidelity at `fidelity_target`.
#[no_mangle]
pub unsafe extern "C" fn licsq_transport_max_velocity(
    transport: *const LicsqTransport,
    sites: u32,
    fidelity_target: f64,
    out: *mut f64,
) -> LicsqStatus {
    guard(|| {
        let v = deref(transport, "transport")?.0.max_velocity(sites, fidelity_target)?;
        write(out, v, "out")
    })
}

/// Entanglement time for transport over `sites`, s.
#[no_mangle]
pub extern "C" fn licsq_entangle_time(sites: u32) -> f64 {
    entangle_time(sites)
}

/// Qubits reachable within `sites` lattice constants.
#[no_mangle]
pub extern "C" fn licsq_qubit_reach(sites: u32) -> f64 {
    qubit_reach(sites)
}

/// Sites traversed between `(i1, j1)` and `(i2, j2)` on the triangular lattice.
#[no_mangle]
pub extern "C" fn licsq_site_distance(i1: i64, j1: i64, i2: i64, j2: i64) -> u64 {
    site_distance(SiteCoord::new(i1, j1), SiteCoord::new(i2, j2))
}

// ---- lattice ----------------------------------------------------------------

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LicsqLineModel {
    DominantLine = 0,
    FineStructure = 1,
}

pub struct LicsqLattice(BichromaticLattice);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LicsqFeasibilityPoint {
    pub alpha: f64,
    pub independent_control_ok: bool,
    pub li_tunneling_ok: bool,
    pub cs_tunneling_ok: bool,
    pub li_scattering_ok: bool,
    pub cs_scattering_ok: bool,
    pub feasible: bool,
}

/// 1.5 µm lattice, 681 nm for Li and 1064 nm for Cs.
#[no_mangle]
pub unsafe extern "C" fn licsq_lattice_standard(model: LicsqLineModel, out: *mut *mut LicsqLattice) -> LicsqStatus {
    guard(|| {
        let model = match model {
            LicsqLineModel::DominantLine => LineModel::DominantLine,
            LicsqLineModel::FineStructure => LineModel::FineStructure,
        };
        into_handle(LicsqLattice(BichromaticLattice::standard(model)?), out, "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn licsq_lattice_free(lattice: *mut LicsqLattice) {
    free_handle(lattice);
}

/// Intensity ratio `I1/I2` with equal cross-talk for both species, and that
/// cross-talk factor.
#[no_mangle]
pub unsafe extern "C" fn licsq_lattice_balanced_ratio(
    lattice: *const LicsqLattice,
    ratio: *mut f64,
    alpha: *mut f64,
) -> LicsqStatus {
    guard(|| {
        let (r, a) = deref(lattice, "lattice")?.0.balanced_ratio();
        write(ratio, r, "ratio")?;
        write(alpha, a, "alpha")
    })
}

/// Evaluates one operating point; intensities in W/m², ceiling in 1/s.
#[no_mangle]
pub unsafe extern "C" fn licsq_lattice_evaluate(
    lattice: *const LicsqLattice,
    i1: f64,
    i2: f64,
    decoherence_ceiling: f64,
    alpha_max: f64,
    out: *mut LicsqFeasibilityPoint,
) -> LicsqStatus {
    guard(|| {
        let req = Requirements { decoherence_ceiling, alpha_max };
        let p = deref(lattice, "lattice")?.0.evaluate(i1, i2, &req)?;
        write(
            out,
            LicsqFeasibilityPoint {
                alpha: p.alpha,
                independent_control_ok: p.independent_control_ok,
                li_tunneling_ok: p.li_tunneling_ok,
                cs_tunneling_ok: p.cs_tunneling_ok,
                li_scattering_ok: p.li_scattering_ok,
                cs_scattering_ok: p.cs_scattering_ok,
                feasible: p.feasible(),
            },
            "out",
        )
    })
}

// ---- register ---------------------------------------------------------------

/// Number of register levels addressable by [`licsq_register_amplitude`].
pub const LICSQ_REGISTER_LEVELS: usize = 24;
const _: () = assert!(LICSQ_REGISTER_LEVELS == LEVELS);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LicsqQubit {
    Cs = 0,
    LiA = 1,
    LiB = 2,
}

impl From<LicsqQubit> for Qubit {
    fn from(q: LicsqQubit) -> Self {
        match q {
            LicsqQubit::Cs => Qubit::Cs,
            LicsqQubit::LiA => Qubit::LiA,
            LicsqQubit::LiB => Qubit::LiB,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LicsqStep {
    Create = 0,
    Swap = 1,
}

pub struct LicsqRegister(ProtocolRegister);

/// `(|000⟩ + |100⟩)/√2`: messenger in superposition, both Li qubits in 0.
#[no_mangle]
pub unsafe extern "C" fn licsq_register_initial(out: *mut *mut LicsqRegister) -> LicsqStatus {
    guard(|| into_handle(LicsqRegister(ProtocolRegister::initial()), out, "out"))
}

#[no_mangle]
pub unsafe extern "C" fn licsq_register_free(register: *mut LicsqRegister) {
    free_handle(register);
}

/// Applies an ideal create or swap step in place.
#[no_mangle]
pub unsafe extern "C" fn licsq_register_step(register: *mut LicsqRegister, step: LicsqStep) -> LicsqStatus {
    guard(|| {
        let r = deref_mut(register, "register")?;
        let step = match step {
            LicsqStep::Create => EntangleStep::Create,
            LicsqStep::Swap => EntangleStep::Swap,
        };
        r.0 = entangle_step_with(&r.0, step, [PulseErrors::IDEAL; 2])?;
        Ok(())
    })
}

/// Moves the messenger, losing population `transport_error`.
#[no_mangle]
pub unsafe extern "C" fn licsq_register_transport(register: *mut LicsqRegister, transport_error: f64) -> LicsqStatus {
    guard(|| {
        let r = deref_mut(register, "register")?;
        r.0 = apply_transport(&r.0, transport_error)?;
        Ok(())
    })
}

/// Amplitude of level `index`. Indices 0–7 are the qubit levels `|Cs Li_a Li_b⟩`
/// in binary order; 8 + 8·m + 2·p + s is molecular level `m` (0 or 1) formed
/// with Li qubit `p` (0 = a, 1 = b) and spectator state `s`. Padding slots
/// (offsets 4–7 within each molecular block) are rejected.
#[no_mangle]
pub unsafe extern "C" fn licsq_register_amplitude(
    register: *const LicsqRegister,
    index: usize,
    re: *mut f64,
    im: *mut f64,
) -> LicsqStatus {
    guard(|| {
        let level = licsq::protocol::Level::from_index(index)
            .ok_or_else(|| Error::InvalidArgument(format!("level index {index} out of range 0..{LEVELS}")))?;
        let r = deref(register, "register")?;
        let a = r.0.amplitude(level);
        write(re, a.re, "re")?;
        write(im, a.im, "im")
    })
}

/// Fidelity with `−(|010⟩ + |001⟩)/√2`.
#[no_mangle]
pub unsafe extern "C" fn licsq_register_final_fidelity(register: *const LicsqRegister, out: *mut f64) -> LicsqStatus {
    guard(|| write(out, deref(register, "register")?.0.fidelity(&final_target()), "out"))
}

#[no_mangle]
pub unsafe extern "C" fn licsq_register_concurrence(
    register: *const LicsqRegister,
    first: LicsqQubit,
    second: LicsqQubit,
    out: *mut f64,
) -> LicsqStatus {
    guard(|| {
        let c = concurrence(&deref(register, "register")?.0, (first.into(), second.into()))?;
        write(out, c, "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn licsq_register_purity(
    register: *const LicsqRegister,
    qubit: LicsqQubit,
    out: *mut f64,
) -> LicsqStatus {
    guard(|| write(out, purity(&deref(register, "register")?.0, qubit.into())?, "out"))
}

// ---- protocol ---------------------------------------------------------------

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LicsqFidelityReport {
    pub multiplicative: f64,
    pub register_fidelity: f64,
    pub monte_carlo: f64,
    pub monte_carlo_sigma: f64,
}

/// Full create–transport–swap sequence with the same overlap fidelity and
/// leakage on each of the four pulses.
#[no_mangle]
pub unsafe extern "C" fn licsq_protocol_fidelity(
    overlap_fidelity: f64,
    leakage: f64,
    transport_error: f64,
    trials: usize,
    seed: u64,
    out: *mut LicsqFidelityReport,
) -> LicsqStatus {
    guard(|| {
        let pulse = CouplingBudget::from_errors(overlap_fidelity, leakage)?;
        let errors = SequenceErrors::from_budgets(&[pulse; 4], transport_error)?;
        let r = error_injected_run(&errors, trials, seed)?;
        write(
            out,
            LicsqFidelityReport {
                multiplicative: r.f_multiplicative,
                register_fidelity: r.f_register,
                monte_carlo: r.f_montecarlo,
                monte_carlo_sigma: r.mc_sigma,
            },
            "out",
        )
    })
}

// ---- stability --------------------------------------------------------------

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LicsqStabilitySummary {
    pub rms1_nm: f64,
    pub rms2_nm: f64,
    pub rms_diff_nm: f64,
    pub samples: usize,
    pub duration_s: f64,
    pub spectrum_computed: bool,
    /// NaN when no spectrum was computed.
    pub parseval_error_max: f64,
}

/// Reads a position CSV (`t_s,x1_nm,y1_nm,x2_nm,y2_nm`) and summarizes it.
#[no_mangle]
pub unsafe extern "C" fn licsq_stability_analyze_csv(
    path: *const c_char,
    out: *mut LicsqStabilitySummary,
) -> LicsqStatus {
    guard(|| {
        let series = read_series(Path::new(read_str(path, "path")?))?;
        let s = analyze(&series)?.summary;
        write(
            out,
            LicsqStabilitySummary {
                rms1_nm: s.rms1_nm,
                rms2_nm: s.rms2_nm,
                rms_diff_nm: s.rms_diff_nm,
                samples: s.n_samples,
                duration_s: s.duration_s,
                spectrum_computed: s.spectrum_computed,
                parseval_error_max: s.parseval_error_max.unwrap_or(f64::NAN),
            },
            "out",
        )
    })
}
