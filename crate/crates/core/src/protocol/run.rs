use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use super::diagnostics::{concurrence, purity};
use super::pulses::{apply_transport, entangle_step_with, EntangleStep, PulseErrors};
use super::register::{ProtocolRegister, Qubit};
use crate::coupling::CouplingBudget;
use crate::error::{Error, Result};

/// Amplitudes at or above this are listed in traces.
pub const TRACE_THRESHOLD: f64 = 1e-6;
/// Pulses in one create–transport–swap sequence.
pub const PULSES: usize = 4;

fn ket(entries: &[(usize, f64)]) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); 8];
    for &(i, a) in entries {
        v[i] = a.into();
    }
    v
}

/// `(−|010⟩ + |100⟩)/√2`: messenger entangled with Li_a.
pub fn intermediate_target() -> Vec<Complex64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    ket(&[(0b010, -h), (0b100, h)])
}

/// `−|0⟩ ⊗ (|10⟩ + |01⟩)/√2`: Li_a and Li_b entangled, messenger free.
pub fn final_target() -> Vec<Complex64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    ket(&[(0b010, -h), (0b001, -h)])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KetTerm {
    pub level: String,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStep {
    pub operation: String,
    pub ket: Vec<KetTerm>,
    pub lost: f64,
    #[serde(skip)]
    pub text: String,
}

impl TraceStep {
    fn record(operation: &str, reg: &ProtocolRegister) -> Self {
        let ket = reg
            .ket(TRACE_THRESHOLD)
            .into_iter()
            .map(|(level, a)| KetTerm { level: level.to_string(), re: a.re, im: a.im })
            .collect();
        TraceStep { operation: operation.to_string(), ket, lost: reg.lost(), text: reg.to_string() }
    }
}

/// Error terms of a full create–transport–swap sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SequenceErrors {
    pub pulses: [PulseErrors; PULSES],
    pub transport_error: f64,
}

impl SequenceErrors {
    pub const IDEAL: SequenceErrors = SequenceErrors { pulses: [PulseErrors::IDEAL; PULSES], transport_error: 0.0 };

    pub fn from_budgets(budgets: &[CouplingBudget], transport_error: f64) -> Result<Self> {
        if budgets.len() != PULSES {
            return Err(Error::InvalidArgument(format!("expected {PULSES} transition budgets, got {}", budgets.len())));
        }
        if !(0.0..=1.0).contains(&transport_error) {
            return Err(Error::InvalidArgument(format!("transport error must lie in [0, 1], got {transport_error}")));
        }
        let mut pulses = [PulseErrors::IDEAL; PULSES];
        for (p, b) in pulses.iter_mut().zip(budgets) {
            *p = PulseErrors::new(b.overlap_fidelity, b.leakage)?;
        }
        Ok(SequenceErrors { pulses, transport_error })
    }

    /// Product of all per-operation fidelities.
    pub fn multiplicative_fidelity(&self) -> f64 {
        self.pulses.iter().map(PulseErrors::retention).product::<f64>() * (1.0 - self.transport_error)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolOutcome {
    pub trace: Vec<TraceStep>,
    pub intermediate_fidelity: f64,
    pub final_fidelity: f64,
    /// Phase of `⟨target|ψ⟩` for the final state, rad.
    pub final_phase: f64,
    pub concurrence_cs_li_a_before_swap: f64,
    pub concurrence_li_a_li_b: f64,
    pub concurrence_cs_li_a: f64,
    pub purity_cs: f64,
    pub lost: f64,
    #[serde(skip)]
    pub final_register: ProtocolRegister,
}

fn sequence(
    errors: &SequenceErrors,
    mut trace: Option<&mut Vec<TraceStep>>,
) -> Result<(ProtocolRegister, ProtocolRegister)> {
    let mut log = |name: &str, r: &ProtocolRegister| {
        if let Some(t) = trace.as_deref_mut() {
            t.push(TraceStep::record(name, r));
        }
    };
    let start = ProtocolRegister::initial();
    log("initial", &start);
    let created = entangle_step_with(&start, EntangleStep::Create, [errors.pulses[0], errors.pulses[1]])?;
    log("create", &created);
    let moved = apply_transport(&created, errors.transport_error)?;
    log("transport", &moved);
    let swapped = entangle_step_with(&moved, EntangleStep::Swap, [errors.pulses[2], errors.pulses[3]])?;
    log("swap", &swapped);
    Ok((created, swapped))
}

/// Runs create → transport → swap from the initial register.
pub fn run_protocol(errors: &SequenceErrors) -> Result<ProtocolOutcome> {
    let mut trace = Vec::new();
    let (created, fin) = sequence(errors, Some(&mut trace))?;
    let overlap = fin.overlap(&final_target());
    Ok(ProtocolOutcome {
        trace,
        intermediate_fidelity: created.fidelity(&intermediate_target()),
        final_fidelity: overlap.norm_sqr(),
        final_phase: overlap.arg(),
        concurrence_cs_li_a_before_swap: concurrence(&created, (Qubit::Cs, Qubit::LiA))?,
        concurrence_li_a_li_b: concurrence(&fin, (Qubit::LiA, Qubit::LiB))?,
        concurrence_cs_li_a: concurrence(&fin, (Qubit::Cs, Qubit::LiA))?,
        purity_cs: purity(&fin, Qubit::Cs)?,
        lost: fin.lost(),
        final_register: fin,
    })
}

pub fn trace_text(trace: &[TraceStep]) -> String {
    trace.iter().map(|s| format!("{:<10} {}\n", s.operation, s.text)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FidelityReport {
    pub f_multiplicative: f64,
    pub f_register: f64,
    pub f_montecarlo: f64,
    pub mc_sigma: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Per-pulse overlap fidelity fluctuating as `exp(−s² z²)`, `z ~ N(0, 1)`,
/// with `s² = (F⁻² − 1)/2` so that its mean is `F`.
fn sample_fidelity(mean: f64, rng: &mut ChaCha8Rng) -> f64 {
    if mean >= 1.0 {
        return 1.0;
    }
    if mean <= 0.0 {
        return 0.0;
    }
    let s2 = 0.5 * (mean.powi(-2) - 1.0);
    let z: f64 = StandardNormal.sample(rng);
    (-s2 * z * z).exp()
}

fn trial_fidelity(errors: &SequenceErrors, seed: u64, trial: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let mut sampled = *errors;
    for p in sampled.pulses.iter_mut() {
        p.overlap_fidelity = sample_fidelity(p.overlap_fidelity, &mut rng);
    }
    let (_, fin) = sequence(&sampled, None)?;
    Ok(fin.fidelity(&final_target()))
}

/// Multiplicative budget, the deterministic register result, and a
/// Monte-Carlo estimate with fluctuating per-pulse overlap. Trial `i` draws
/// from ChaCha stream `i` of `seed`; results do not depend on thread count.
pub fn error_injected_run(errors: &SequenceErrors, trials: usize, seed: u64) -> Result<FidelityReport> {
    if trials < 2 {
        return Err(Error::InvalidArgument(format!("Monte-Carlo needs at least 2 trials, got {trials}")));
    }
    let (_, fin) = sequence(errors, None)?;
    let samples =
        (0..trials as u64).into_par_iter().map(|t| trial_fidelity(errors, seed, t)).collect::<Result<Vec<f64>>>()?;
    let n = trials as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(FidelityReport {
        f_multiplicative: errors.multiplicative_fidelity(),
        f_register: fin.fidelity(&final_target()),
        f_montecarlo: mean,
        mc_sigma: (var / n).sqrt(),
        trials,
        seed,
    })
}
