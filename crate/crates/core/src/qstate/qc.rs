//! Quantum-classical states `Σ_j p_j ρ_{A|j} ⊗ |j><j|` and their purification.

use rand::Rng;

use super::linalg::{c, herm_eig_trusted, CMatrix, CVector};
use super::random::random_mixed_with;
use super::state::{validate_weights, DensityMatrix, PureState};
use crate::error::{CcrError, Result};

fn check_spec(weights: &[f64], conditionals: &[DensityMatrix]) -> Result<usize> {
    if weights.is_empty() || weights.len() != conditionals.len() {
        return Err(CcrError::WeightMismatch(format!(
            "{} weights for {} conditional states",
            weights.len(),
            conditionals.len()
        )));
    }
    validate_weights(weights)?;
    let da = conditionals[0].dim();
    if let Some(bad) = conditionals.iter().find(|r| r.dim() != da) {
        return Err(CcrError::WeightMismatch(format!(
            "conditional of dimension {} differs from {da}",
            bad.dim()
        )));
    }
    Ok(da)
}

/// Block-diagonal state on `(d_A, d_B)` with `d_B = weights.len()`; B is
/// classical in its computational basis.
pub fn quantum_classical_state(weights: &[f64], conditionals: &[DensityMatrix]) -> Result<DensityMatrix> {
    let da = check_spec(weights, conditionals)?;
    let db = weights.len();
    let mut m = CMatrix::zeros(da * db, da * db);
    for (j, (p, rho)) in weights.iter().zip(conditionals).enumerate() {
        for a in 0..da {
            for b in 0..da {
                m[(a * db + j, b * db + j)] = rho.matrix()[(a, b)] * c(*p, 0.0);
            }
        }
    }
    Ok(DensityMatrix::from_trusted(vec![da, db], m))
}

/// `|Ψ> = Σ_{j,k} √(p_j a_jk) |a_jk>_A ⊗ |j>_B ⊗ |c_jk>_E` where
/// `ρ_{A|j} = Σ_k a_jk |a_jk><a_jk|` and `|c_jk>` is the computational basis
/// state `j·d_A + k` of a `d_A·d_B`-dimensional environment.
pub fn purify_quantum_classical(weights: &[f64], conditionals: &[DensityMatrix]) -> Result<PureState> {
    let da = check_spec(weights, conditionals)?;
    let db = weights.len();
    let de = da * db;
    let mut amps = CVector::zeros(da * db * de);
    for (j, (p, rho)) in weights.iter().zip(conditionals).enumerate() {
        let eig = herm_eig_trusted(rho.matrix());
        for k in 0..da {
            let w = (p * eig.values[k].max(0.0)).sqrt();
            if w == 0.0 {
                continue;
            }
            let e = j * da + k;
            for a in 0..da {
                amps[(a * db + j) * de + e] += eig.vectors[(a, k)] * w;
            }
        }
    }
    Ok(PureState::normalized(vec![da, db, de], amps))
}

/// Random weights (uniform on the simplex) and induced-measure conditionals.
pub fn random_quantum_classical_with<R: Rng + ?Sized>(
    rng: &mut R,
    da: usize,
    db: usize,
) -> (Vec<f64>, Vec<DensityMatrix>) {
    let raw: Vec<f64> = (0..db).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = raw.iter().sum();
    let weights = raw.iter().map(|x| x / total).collect();
    let conditionals = (0..db)
        .map(|_| {
            let rank = rng.random_range(1..=da);
            random_mixed_with(rng, &[da], rank)
        })
        .collect();
    (weights, conditionals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::linalg::{max_abs_diff, ZERO};
    use crate::qstate::random::{random_mixed, seeded_rng};

    fn ket(d: usize, i: usize) -> DensityMatrix {
        PureState::basis(vec![d], &[i]).unwrap().density()
    }

    #[test]
    fn single_block_is_product_with_zero() {
        let rho = random_mixed(2, 2, 11);
        let qc = quantum_classical_state(&[1.0], &[rho.clone()]).unwrap();
        // d_B = 1 here, so the state is ρ itself on (2, 1)
        assert_eq!(qc.dims(), &[2, 1]);
        assert!(max_abs_diff(qc.matrix(), rho.matrix()) < 1e-15);

        let qc = quantum_classical_state(&[1.0, 0.0], &[rho.clone(), ket(2, 1)]).unwrap();
        assert!(max_abs_diff(qc.matrix(), rho.tensor(&ket(2, 0)).matrix()) < 1e-15);
    }

    #[test]
    fn mismatched_inputs_are_rejected() {
        assert!(matches!(
            quantum_classical_state(&[0.5, 0.5], &[ket(2, 0)]),
            Err(CcrError::WeightMismatch(_))
        ));
        assert!(matches!(
            quantum_classical_state(&[0.5, 0.5], &[ket(2, 0), ket(3, 0)]),
            Err(CcrError::WeightMismatch(_))
        ));
        assert!(purify_quantum_classical(&[0.7, 0.7], &[ket(2, 0), ket(2, 1)]).is_err());
    }

    #[test]
    fn classically_correlated_blocks() {
        let qc = quantum_classical_state(&[0.5, 0.5], &[ket(2, 0), ket(2, 1)]).unwrap();
        let m = qc.matrix();
        assert!((m[(0, 0)].re - 0.5).abs() < 1e-15 && (m[(3, 3)].re - 0.5).abs() < 1e-15);
        assert_eq!(m[(1, 1)], ZERO);
    }

    #[test]
    fn purification_traces_back() {
        let psi = purify_quantum_classical(&[1.0], &[ket(2, 0)]).unwrap();
        assert_eq!(psi.dims(), &[2, 1, 2]);
        assert!((psi.amplitudes()[0].norm() - 1.0).abs() < 1e-15);

        let w = [0.5, 0.5];
        let conds = [ket(2, 0), ket(2, 1)];
        let psi = purify_quantum_classical(&w, &conds).unwrap();
        let back = psi.reduced(&[0, 1]).unwrap();
        let direct = quantum_classical_state(&w, &conds).unwrap();
        assert!(max_abs_diff(back.matrix(), direct.matrix()) < 1e-12);

        let mut rng = seeded_rng(99);
        for _ in 0..20 {
            let (w, conds) = random_quantum_classical_with(&mut rng, 3, 2);
            let back = purify_quantum_classical(&w, &conds).unwrap().reduced(&[0, 1]).unwrap();
            let direct = quantum_classical_state(&w, &conds).unwrap();
            assert!(max_abs_diff(back.matrix(), direct.matrix()) < 1e-9);
        }
    }
}
