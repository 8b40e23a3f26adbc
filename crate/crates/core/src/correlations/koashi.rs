use serde::Serialize;

use super::classical::{classical_correlation, Side};
use super::entanglement::entanglement_of_formation_two_qubit;
use super::formation::entanglement_of_formation;
use super::optimize::{OptResult, OptimizerConfig};
use crate::error::{CcrError, Result};
use crate::measures::von_neumann_entropy;
use crate::qstate::{Cut, PureState};

/// Largest factor dimension for the tripartite decomposition.
pub const MAX_FACTOR_DIM: usize = 4;

/// Terms of `S(ρ_A) = E_f(ρ_AB) + J_{A|E}(ρ_AE)` for a pure state on `A ⊗ B ⊗ E`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KoashiTerms {
    pub entropy_a: f64,
    pub formation: OptResult,
    pub classical: OptResult,
    pub residual: f64,
}

pub fn koashi_winter_terms(psi: &PureState, cfg: &OptimizerConfig) -> Result<KoashiTerms> {
    if psi.dims().len() != 3 {
        return Err(CcrError::BadCut(format!(
            "tripartite state required, got {} factors",
            psi.dims().len()
        )));
    }
    if let Some(&d) = psi.dims().iter().find(|&&d| d > MAX_FACTOR_DIM) {
        return Err(CcrError::DimTooLarge {
            dim: d,
            limit: MAX_FACTOR_DIM,
        });
    }
    let entropy_a = von_neumann_entropy(&psi.reduced(&[0])?);
    let rho_ab = psi.reduced(&[0, 1])?;
    let formation = if rho_ab.dims() == [2, 2] {
        OptResult::exact(entanglement_of_formation_two_qubit(&rho_ab)?)
    } else {
        entanglement_of_formation(&rho_ab, &Cut::first(), cfg)?
    };
    let rho_ae = psi.reduced(&[0, 2])?;
    let classical = classical_correlation(&rho_ae, &Cut::first(), Side::Second, cfg)?;
    let residual = (entropy_a - formation.value - classical.value).abs();
    Ok(KoashiTerms {
        entropy_a,
        formation,
        classical,
        residual,
    })
}

/// `|S(ρ_A) - E_f(ρ_AB) - J_{A|E}(ρ_AE)|`.
pub fn koashi_winter_residual(psi: &PureState, cfg: &OptimizerConfig) -> Result<f64> {
    Ok(koashi_winter_terms(psi, cfg)?.residual)
}
