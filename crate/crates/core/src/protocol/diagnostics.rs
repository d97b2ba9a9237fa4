use nalgebra::{DMatrix, DVector, Matrix2, Matrix4};
use num_complex::Complex64;

use super::register::{ProtocolRegister, Qubit, EMPTY_THRESHOLD};
use crate::error::{Error, Result};

fn require_unbound(reg: &ProtocolRegister) -> Result<()> {
    let m = reg.molecular_population();
    if m > EMPTY_THRESHOLD {
        return Err(Error::MolecularOccupied(m));
    }
    Ok(())
}

fn qubit_population(reg: &ProtocolRegister) -> Result<f64> {
    let n: f64 = reg.qubit_amplitudes().iter().map(|a| a.norm_sqr()).sum();
    if !(n > 0.0) {
        return Err(Error::Numerical("register holds no population".into()));
    }
    Ok(n)
}

/// Reduced density matrix of one qubit, renormalized to unit trace.
pub fn reduced_density_1(reg: &ProtocolRegister, q: Qubit) -> Result<Matrix2<Complex64>> {
    require_unbound(reg)?;
    let norm = qubit_population(reg)?;
    let amps = reg.qubit_amplitudes();
    let bit = q.bit();
    let mut rho = Matrix2::zeros();
    for i in 0..8 {
        for j in 0..8 {
            if i & !(1 << bit) == j & !(1 << bit) {
                rho[(i >> bit & 1, j >> bit & 1)] += amps[i] * amps[j].conj();
            }
        }
    }
    Ok(rho / Complex64::from(norm))
}

/// Reduced density matrix of an ordered qubit pair (basis `|q₁q₂⟩`),
/// renormalized to unit trace.
pub fn reduced_density_2(reg: &ProtocolRegister, pair: (Qubit, Qubit)) -> Result<Matrix4<Complex64>> {
    require_unbound(reg)?;
    if pair.0 == pair.1 {
        return Err(Error::InvalidArgument(format!("concurrence needs two distinct qubits, got {} twice", pair.0)));
    }
    let norm = qubit_population(reg)?;
    let amps = reg.qubit_amplitudes();
    let (b1, b2) = (pair.0.bit(), pair.1.bit());
    let mask = (1 << b1) | (1 << b2);
    let sub = |i: usize| ((i >> b1 & 1) << 1) | (i >> b2 & 1);
    let mut rho = Matrix4::zeros();
    for i in 0..8 {
        for j in 0..8 {
            if i & !mask == j & !mask {
                rho[(sub(i), sub(j))] += amps[i] * amps[j].conj();
            }
        }
    }
    Ok(rho / Complex64::from(norm))
}

/// Eigenvalues of `ρ` below this are treated as rank deficiency.
const RANK_CUTOFF: f64 = 1e-14;

/// Wootters concurrence of a two-qubit density matrix. With
/// `ρ = Σ_k |w_k⟩⟨w_k|` over the non-negligible eigenvectors, the `λ_i` are the
/// singular values of `τ_kl = w_kᵀ (σy⊗σy) w_l`.
pub fn concurrence_of(rho: &Matrix4<Complex64>) -> f64 {
    let eig = rho.symmetric_eigen();
    let cols: Vec<DVector<Complex64>> = (0..4)
        .filter(|&k| eig.eigenvalues[k] > RANK_CUTOFF)
        .map(|k| DVector::from_iterator(4, eig.eigenvectors.column(k).iter().map(|&z| z * eig.eigenvalues[k].sqrt())))
        .collect();
    if cols.is_empty() {
        return 0.0;
    }
    let w = DMatrix::from_columns(&cols);
    // σy ⊗ σy is real: anti-diagonal (−1, 1, 1, −1)
    let mut yy = DMatrix::<Complex64>::zeros(4, 4);
    for (i, s) in [-1.0, 1.0, 1.0, -1.0].into_iter().enumerate() {
        yy[(i, 3 - i)] = Complex64::from(s);
    }
    let tau = w.transpose() * yy * &w;
    let mut lambdas: Vec<f64> = tau.singular_values().iter().copied().collect();
    lambdas.resize(4, 0.0);
    lambdas.sort_by(|a, b| b.total_cmp(a));
    (lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).clamp(0.0, 1.0)
}

/// Concurrence of the reduced state of two register qubits.
pub fn concurrence(reg: &ProtocolRegister, pair: (Qubit, Qubit)) -> Result<f64> {
    Ok(concurrence_of(&reduced_density_2(reg, pair)?))
}

/// `Tr ρ²` of one qubit's reduced state.
pub fn purity(reg: &ProtocolRegister, q: Qubit) -> Result<f64> {
    let rho = reduced_density_1(reg, q)?;
    Ok((rho * rho).trace().re)
}
