//! Complete complementarity relations evaluated term by term on concrete
//! states, plus batch verification over random ensembles.

mod batch;
mod ccr;

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::correlations::{MeasurementClass, OptResult, OptimizerConfig};
use crate::error::CcrError;
use crate::qstate::{DensityMatrix, PureState};

pub use batch::{verify_batch, BatchSpec, BatchSummary, StateGenerator};
pub use ccr::{
    ccr_conditional, ccr_koashi, ccr_mutual_info, ccr_pure, ccr_quantum_classical, ccr_reality, ccr_tessier,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelationId {
    Pure,
    Reality,
    Koashi,
    Tessier,
    QuantumClassical,
    MutualInfo,
    Conditional,
}

impl RelationId {
    pub const ALL: [RelationId; 7] = [
        RelationId::Pure,
        RelationId::Reality,
        RelationId::Koashi,
        RelationId::Tessier,
        RelationId::QuantumClassical,
        RelationId::MutualInfo,
        RelationId::Conditional,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RelationId::Pure => "ccr-pure",
            RelationId::Reality => "ccr-reality",
            RelationId::Koashi => "ccr-koashi",
            RelationId::Tessier => "ccr-tessier",
            RelationId::QuantumClassical => "ccr-quantum-classical",
            RelationId::MutualInfo => "ccr-mutual-info",
            RelationId::Conditional => "ccr-conditional",
        }
    }

    /// One-line statement of the relation.
    pub fn statement(self) -> &'static str {
        match self {
            RelationId::Pure => "C_re(A) + P_vn(A) + S_vn(A) = log2 d_A for pure AB",
            RelationId::Reality => "reality + C_re = log2 d",
            RelationId::Koashi => "E_f(AB) + J_{A|E} + P_vn(A) + C_re(A) = log2 d_A for pure ABE",
            RelationId::Tessier => "Tr rho rho~ + S_l(AB) + (V_A^2 + P_A^2)/2 + (V_B^2 + P_B^2)/2 = 1",
            RelationId::QuantumClassical => "P_vn + C_re + S_vn = log2 d globally and for every conditional state",
            RelationId::MutualInfo => "I_{A:B} + S_vn(AB) + sum_k (P_vn(k) + C_re(k)) = log2 d_A d_B",
            RelationId::Conditional => "I_{A:B} + S_{A|B} + P_vn(A) + C_re(A) = log2 d_A",
        }
    }
}

impl fmt::Display for RelationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RelationId {
    type Err = CcrError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RelationId::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| CcrError::UnknownRelation(s.to_string()))
    }
}

impl Serialize for RelationId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Term {
    pub name: String,
    pub value: f64,
}

/// An auxiliary identity checked alongside the main relation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SideCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

impl SideCheck {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        SideCheck {
            name: name.into(),
            lhs,
            rhs,
            residual: (lhs - rhs).abs(),
        }
    }
}

/// Search diagnostics for an optimized term.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizerNote {
    pub term: String,
    pub converged: bool,
    pub spread_across_restarts: f64,
    pub restarts: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measurement: Option<MeasurementClass>,
}

impl OptimizerNote {
    pub fn from_result(term: impl Into<String>, r: &OptResult) -> Self {
        OptimizerNote {
            term: term.into(),
            converged: r.converged,
            spread_across_restarts: r.spread_across_restarts,
            restarts: r.restarts,
            measurement: r.measurement,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CcrReport {
    pub relation: RelationId,
    /// Label for reports that cover part of the input (a conditional state).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scope: Option<String>,
    pub terms: Vec<Term>,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<SideCheck>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub optimizer: Vec<OptimizerNote>,
    pub input_digest: String,
}

impl CcrReport {
    pub(crate) fn new(relation: RelationId, terms: Vec<Term>, rhs: f64, input_digest: String) -> Self {
        let lhs = terms.iter().map(|t| t.value).sum();
        CcrReport {
            relation,
            scope: None,
            terms,
            lhs,
            rhs,
            residual: (lhs - rhs).abs(),
            checks: Vec::new(),
            optimizer: Vec::new(),
            input_digest,
        }
    }

    pub fn term(&self, name: &str) -> Option<f64> {
        self.terms.iter().find(|t| t.name == name).map(|t| t.value)
    }

    /// Largest residual among the relation and its side checks.
    pub fn worst_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.residual).fold(self.residual, f64::max)
    }
}

pub(crate) fn term(name: &str, value: f64) -> Term {
    Term {
        name: name.to_string(),
        value,
    }
}

/// Fingerprint of the exact inputs of a relation.
#[derive(Default)]
pub(crate) struct InputDigest(Sha256);

impl InputDigest {
    pub fn tag(mut self, tag: &str) -> Self {
        self.0.update((tag.len() as u64).to_le_bytes());
        self.0.update(tag.as_bytes());
        self
    }

    pub fn dims(mut self, dims: &[usize]) -> Self {
        self.0.update((dims.len() as u64).to_le_bytes());
        for d in dims {
            self.0.update((*d as u64).to_le_bytes());
        }
        self
    }

    pub fn values(mut self, values: impl IntoIterator<Item = f64>) -> Self {
        for v in values {
            self.0.update(v.to_bits().to_le_bytes());
        }
        self
    }

    pub fn density(self, rho: &DensityMatrix) -> Self {
        self.dims(rho.dims()).values(rho.matrix().iter().flat_map(|z| [z.re, z.im]))
    }

    pub fn pure(self, psi: &PureState) -> Self {
        self.dims(psi.dims()).values(psi.amplitudes().iter().flat_map(|z| [z.re, z.im]))
    }

    pub fn optimizer(self, cfg: &OptimizerConfig) -> Self {
        let tag = format!(
            "{}:{}:{}:{}:{:?}:{}",
            cfg.restarts, cfg.max_iterations, cfg.tolerance, cfg.seed, cfg.ensemble_size, cfg.measurement
        );
        self.tag(&tag)
    }

    pub fn finish(self) -> String {
        self.0.finalize()[..16].iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relation_ids_round_trip() {
        for r in RelationId::ALL {
            assert_eq!(r.as_str().parse::<RelationId>().unwrap(), r);
            assert_eq!(serde_json::to_string(&r).unwrap(), format!("\"{}\"", r.as_str()));
        }
        assert!(matches!("ccr-nope".parse::<RelationId>(), Err(CcrError::UnknownRelation(_))));
    }

    #[test]
    fn digest_separates_inputs() {
        let a = InputDigest::default().dims(&[2, 2]).values([0.5, 0.5]).finish();
        let b = InputDigest::default().dims(&[4]).values([0.5, 0.5]).finish();
        let c = InputDigest::default().dims(&[2, 2]).values([0.5, 0.5]).finish();
        assert_ne!(a, b);
        assert_eq!(a, c);
        assert_eq!(a.len(), 32);
    }
}
