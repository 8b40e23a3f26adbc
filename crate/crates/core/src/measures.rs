//! Entropic quantifiers of single states and bipartitions. All values are in bits.
//!
//! Basis-dependent quantities take an optional [`MeasurementBasis`]; `None`
//! means the computational basis of the whole system, which for a multipartite
//! state is the product of the local computational bases.

use serde::Serialize;

use crate::error::{CcrError, Result};
use crate::qstate::linalg::CMatrix;
use crate::qstate::{Cut, DensityMatrix, MeasurementBasis};

/// Spectra are clipped at zero; anything below this was rejected when the
/// state was validated.
const CLIP_TOL: f64 = 1e-10;

/// Named scalar produced by one of the quantifiers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantifierValue {
    pub name: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis: Option<String>,
}

impl QuantifierValue {
    pub fn new(name: impl Into<String>, value: f64) -> Self {
        QuantifierValue {
            name: name.into(),
            value,
            basis: None,
        }
    }

    pub fn in_basis(mut self, basis: impl Into<String>) -> Self {
        self.basis = Some(basis.into());
        self
    }
}

/// `-Σ λ log₂ λ` with `0 log 0 = 0`. Round-off on a unit eigenvalue would
/// otherwise give a tiny negative entropy, so the sum is floored at zero.
pub fn spectrum_entropy(values: &[f64]) -> f64 {
    let s: f64 = values
        .iter()
        .map(|&l| {
            debug_assert!(l >= -CLIP_TOL || !l.is_finite(), "eigenvalue {l} below clipping range");
            if l > 0.0 {
                -l * l.log2()
            } else {
                0.0
            }
        })
        .sum();
    s.max(0.0)
}

/// Shannon entropy of a probability list, in bits.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    spectrum_entropy(p)
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    spectrum_entropy(&rho.spectrum())
}

/// `1 - Tr ρ²`.
pub fn linear_entropy(rho: &DensityMatrix) -> f64 {
    1.0 - rho.purity()
}

fn resolve_basis(rho: &DensityMatrix, basis: Option<&MeasurementBasis>) -> Result<MeasurementBasis> {
    match basis {
        Some(b) => {
            b.check(rho)?;
            Ok(b.clone())
        }
        None => Ok(MeasurementBasis::computational(rho.dim())),
    }
}

/// Non-selective measurement `Σ_k Π_k ρ Π_k`.
pub fn dephase(rho: &DensityMatrix, basis: Option<&MeasurementBasis>) -> Result<DensityMatrix> {
    let b = resolve_basis(rho, basis)?;
    let u = b.vectors();
    let probs = b.rotated_diagonal(rho.matrix());
    let mut scaled = u.clone();
    for (k, p) in probs.iter().enumerate() {
        scaled.column_mut(k).scale_mut(*p);
    }
    let out = scaled * u.adjoint();
    Ok(DensityMatrix::from_trusted(rho.dims().to_vec(), out))
}

fn log2_dim(rho: &DensityMatrix) -> f64 {
    (rho.dim() as f64).log2()
}

/// Relative entropy of coherence `S(ρ_diag) - S(ρ)`, with the diagonal entropy
/// taken from the outcome distribution.
pub fn coherence(rho: &DensityMatrix, basis: Option<&MeasurementBasis>) -> Result<f64> {
    let b = resolve_basis(rho, basis)?;
    let diag = b.rotated_diagonal(rho.matrix());
    Ok(shannon_entropy(&diag) - von_neumann_entropy(rho))
}

/// `log₂ d - S(ρ_diag)`.
pub fn predictability(rho: &DensityMatrix, basis: Option<&MeasurementBasis>) -> Result<f64> {
    let b = resolve_basis(rho, basis)?;
    let diag = b.rotated_diagonal(rho.matrix());
    Ok(log2_dim(rho) - shannon_entropy(&diag))
}

/// Local irreality `S(Φ(ρ)) - S(ρ)`; the dephased state's entropy comes from
/// its full spectrum, independently of [`coherence`].
pub fn irreality(rho: &DensityMatrix, basis: Option<&MeasurementBasis>) -> Result<f64> {
    let dephased = dephase(rho, basis)?;
    Ok(von_neumann_entropy(&dephased) - von_neumann_entropy(rho))
}

/// Local reality `log₂ d - irreality`.
pub fn reality(rho: &DensityMatrix, basis: Option<&MeasurementBasis>) -> Result<f64> {
    Ok(log2_dim(rho) - irreality(rho, basis)?)
}

fn qubit(rho: &DensityMatrix) -> Result<&CMatrix> {
    if rho.dim() != 2 {
        return Err(CcrError::NotQubit(rho.dim()));
    }
    Ok(rho.matrix())
}

/// Greenberger-Yasin visibility `2|ρ₀₁|`.
pub fn gy_visibility(rho: &DensityMatrix) -> Result<f64> {
    Ok(2.0 * qubit(rho)?[(0, 1)].norm())
}

/// Greenberger-Yasin predictability `|ρ₀₀ - ρ₁₁|`.
pub fn gy_predictability(rho: &DensityMatrix) -> Result<f64> {
    let m = qubit(rho)?;
    Ok((m[(0, 0)].re - m[(1, 1)].re).abs())
}

/// Reduced states `(ρ_A, ρ_B)` for a cut.
pub fn marginals(rho: &DensityMatrix, cut: &Cut) -> Result<(DensityMatrix, DensityMatrix)> {
    let (a, b) = cut.resolve(rho.num_subsystems())?;
    Ok((rho.partial_trace(&a)?, rho.partial_trace(&b)?))
}

/// Entropies `(S(ρ_A), S(ρ_B), S(ρ_AB))` in one pass.
pub fn entropies(rho: &DensityMatrix, cut: &Cut) -> Result<(f64, f64, f64)> {
    let (ra, rb) = marginals(rho, cut)?;
    Ok((
        von_neumann_entropy(&ra),
        von_neumann_entropy(&rb),
        von_neumann_entropy(rho),
    ))
}

/// `S(A) + S(B) - S(AB)`.
pub fn mutual_information(rho: &DensityMatrix, cut: &Cut) -> Result<f64> {
    let (sa, sb, sab) = entropies(rho, cut)?;
    Ok(sa + sb - sab)
}

/// `S(AB) - S(B)`.
pub fn conditional_entropy(rho: &DensityMatrix, cut: &Cut) -> Result<f64> {
    let (_, sb, sab) = entropies(rho, cut)?;
    Ok(sab - sb)
}

/// `S(B) - S(AB)`.
pub fn coherent_information(rho: &DensityMatrix, cut: &Cut) -> Result<f64> {
    conditional_entropy(rho, cut).map(|s| -s)
}

fn party_dim(rho: &DensityMatrix, cut: &Cut) -> Result<usize> {
    let (a, _) = cut.resolve(rho.num_subsystems())?;
    Ok(a.iter().map(|&k| rho.dims()[k]).product())
}

/// `log₂ d_A - S_{A|B}`.
pub fn conditional_information(rho: &DensityMatrix, cut: &Cut) -> Result<f64> {
    let da = party_dim(rho, cut)?;
    Ok((da as f64).log2() - conditional_entropy(rho, cut)?)
}

/// `log₂ d - S(ρ)`.
pub fn state_information(rho: &DensityMatrix) -> f64 {
    log2_dim(rho) - von_neumann_entropy(rho)
}
