//! State representation: dense complex matrices, density matrices, pure states,
//! measurement bases, ensembles, reductions and seeded random generation.

pub mod linalg;
pub mod qc;
pub mod random;
pub mod state;

pub use linalg::{herm_eig, kron, CMatrix, CVector, HermEig};
pub use qc::{purify_quantum_classical, quantum_classical_state};
pub use random::{haar_unitary, random_mixed, random_pure};
pub use state::{Cut, DensityMatrix, Ensemble, MeasurementBasis, PureState};

use crate::error::Result;

/// `Tr_{not keep}(ρ)`.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    rho.partial_trace(keep)
}

pub fn purify(rho: &DensityMatrix) -> PureState {
    rho.purify()
}
