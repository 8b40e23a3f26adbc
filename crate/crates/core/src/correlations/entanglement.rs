use crate::error::{CcrError, Result};
use crate::measures::{spectrum_entropy, von_neumann_entropy};
use crate::qstate::linalg::{self, eigvalsh, kron, pauli_y, psd_sqrt, CMatrix};
use crate::qstate::{Cut, DensityMatrix, PureState};

/// `S(Tr_B |ψ><ψ|)` for the given cut.
pub fn entanglement_entropy(psi: &PureState, cut: &Cut) -> Result<f64> {
    let m = psi.coefficient_matrix(cut)?;
    // Schmidt coefficients from the smaller Gram matrix
    let gram = if m.nrows() <= m.ncols() { &m * m.adjoint() } else { m.adjoint() * &m };
    Ok(spectrum_entropy(&eigvalsh(&gram)))
}

fn two_qubit(rho: &DensityMatrix) -> Result<()> {
    if rho.dims() != [2, 2] {
        return Err(CcrError::NotTwoQubit(rho.dims().to_vec()));
    }
    Ok(())
}

/// `(σ_y ⊗ σ_y) ρ* (σ_y ⊗ σ_y)`.
pub fn spin_flip(rho: &DensityMatrix) -> Result<CMatrix> {
    two_qubit(rho)?;
    let yy = kron(&pauli_y(), &pauli_y());
    Ok(&yy * rho.matrix().conjugate() * &yy)
}

/// `Tr ρρ̃` evaluated directly from the spin-flipped state.
pub fn spin_flip_overlap(rho: &DensityMatrix) -> Result<f64> {
    let tilde = spin_flip(rho)?;
    Ok(linalg::trace(&(rho.matrix() * tilde)).re)
}

/// `1 - Tr ρ_A² - Tr ρ_B² + Tr ρ²`, which equals `Tr ρρ̃` for two qubits.
pub fn jaeger_measure(rho: &DensityMatrix) -> Result<f64> {
    two_qubit(rho)?;
    let ra = rho.partial_trace(&[0])?;
    let rb = rho.partial_trace(&[1])?;
    Ok(1.0 - ra.purity() - rb.purity() + rho.purity())
}

/// Wootters concurrence `max(0, λ₁ - λ₂ - λ₃ - λ₄)`, with `λ_i²` the
/// eigenvalues of `√ρ ρ̃ √ρ` (the same spectrum as `ρρ̃`).
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    let tilde = spin_flip(rho)?;
    let s = psd_sqrt(rho.matrix());
    let r = &s * tilde * &s;
    let lambdas: Vec<f64> = eigvalsh(&linalg::hermitian_part(&r))
        .into_iter()
        .map(|x| x.max(0.0).sqrt())
        .collect();
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}

/// Binary entropy `h(x)` in bits.
pub fn binary_entropy(x: f64) -> f64 {
    spectrum_entropy(&[x, 1.0 - x])
}

/// Two-qubit entanglement of formation from the concurrence.
pub fn formation_from_concurrence(c: f64) -> f64 {
    let c = c.clamp(0.0, 1.0);
    binary_entropy(0.5 * (1.0 + (1.0 - c * c).max(0.0).sqrt()))
}

/// Closed-form two-qubit entanglement of formation.
pub fn entanglement_of_formation_two_qubit(rho: &DensityMatrix) -> Result<f64> {
    Ok(formation_from_concurrence(concurrence(rho)?))
}

/// Entropy of the reduced state of party A, for pure states a shortcut to
/// every entanglement measure considered here.
pub fn reduced_entropy(rho: &DensityMatrix, cut: &Cut) -> Result<f64> {
    let (a, _) = cut.resolve(rho.num_subsystems())?;
    Ok(von_neumann_entropy(&rho.partial_trace(&a)?))
}
