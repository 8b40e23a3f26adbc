use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::ccr::{
    ccr_conditional, ccr_koashi, ccr_mutual_info, ccr_pure, ccr_quantum_classical, ccr_reality, ccr_tessier,
};
use super::{CcrReport, RelationId};
use crate::correlations::{MeasurementClass, OptimizerConfig};
use crate::error::{CcrError, Result};
use crate::qstate::qc::random_quantum_classical_with;
use crate::qstate::random::{random_basis_with, random_mixed_with, random_pure_with, stream_rng, StateRng};
use crate::qstate::{Cut, DensityMatrix};

/// Random-state family used by a batch.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StateGenerator {
    /// Haar-random pure states.
    HaarPure { dims: Vec<usize> },
    /// Induced-measure mixed states; `rank: None` draws the rank uniformly per trial.
    Mixed { dims: Vec<usize>, rank: Option<usize> },
    /// `Σ_j p_j ρ_{A|j} ⊗ |j><j|` with `d_B` blocks.
    QuantumClassical { da: usize, db: usize },
}

impl StateGenerator {
    /// The family a relation is normally checked on, for the given dimensions.
    pub fn default_for(relation: RelationId, dims: Option<Vec<usize>>) -> Self {
        let or = |d: &[usize]| dims.clone().unwrap_or_else(|| d.to_vec());
        match relation {
            RelationId::Pure => StateGenerator::HaarPure { dims: or(&[2, 2]) },
            RelationId::Koashi => StateGenerator::HaarPure { dims: or(&[2, 2, 2]) },
            RelationId::Reality => StateGenerator::Mixed {
                dims: or(&[2]),
                rank: None,
            },
            RelationId::QuantumClassical => {
                let d = or(&[2, 2]);
                StateGenerator::QuantumClassical {
                    da: d[0],
                    db: d.get(1).copied().unwrap_or(1),
                }
            }
            RelationId::Tessier | RelationId::MutualInfo | RelationId::Conditional => StateGenerator::Mixed {
                dims: or(&[2, 2]),
                rank: None,
            },
        }
    }

    fn dims(&self) -> Vec<usize> {
        match self {
            StateGenerator::HaarPure { dims } | StateGenerator::Mixed { dims, .. } => dims.clone(),
            StateGenerator::QuantumClassical { da, db } => vec![*da, *db],
        }
    }

    fn validate(&self) -> Result<()> {
        let dims = self.dims();
        if dims.is_empty() || dims.contains(&0) {
            return Err(CcrError::InvalidArgument(format!("invalid dimensions {dims:?}")));
        }
        if let StateGenerator::Mixed { rank: Some(r), .. } = self {
            let d: usize = dims.iter().product();
            if *r == 0 || *r > d {
                return Err(CcrError::InvalidArgument(format!("rank {r} outside 1..={d}")));
            }
        }
        Ok(())
    }

    fn density(&self, rng: &mut StateRng) -> DensityMatrix {
        match self {
            StateGenerator::HaarPure { dims } => random_pure_with(rng, dims).density(),
            StateGenerator::Mixed { dims, rank } => {
                let d: usize = dims.iter().product();
                let r = rank.unwrap_or_else(|| rng.random_range(1..=d));
                random_mixed_with(rng, dims, r)
            }
            StateGenerator::QuantumClassical { .. } => unreachable!("checked by the batch"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchSpec {
    pub relation: RelationId,
    pub generator: StateGenerator,
    pub trials: usize,
    pub tolerance: f64,
    pub seed: u64,
    /// Draw a Haar-random measurement basis per trial (ccr-pure, ccr-reality).
    pub random_basis: bool,
    /// Exchange the second and third parties (ccr-koashi).
    pub swap: bool,
    pub optimizer: OptimizerConfig,
}

impl BatchSpec {
    pub fn new(relation: RelationId, trials: usize, tolerance: f64, seed: u64) -> Self {
        BatchSpec {
            relation,
            generator: StateGenerator::default_for(relation, None),
            trials,
            tolerance,
            seed,
            random_basis: false,
            swap: false,
            optimizer: OptimizerConfig::default(),
        }
    }

    /// Rejects relation/generator combinations that cannot be evaluated.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(CcrError::InvalidArgument("trials must be at least 1".into()));
        }
        if !(self.tolerance > 0.0) || !self.tolerance.is_finite() {
            return Err(CcrError::InvalidArgument(format!("tolerance {} must be positive", self.tolerance)));
        }
        self.generator.validate()?;
        self.optimizer.validate()?;
        let dims = self.generator.dims();
        let need = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(CcrError::InvalidArgument(format!(
                    "{} requires {what}, got {:?}",
                    self.relation, self.generator
                )))
            }
        };
        let qc = matches!(self.generator, StateGenerator::QuantumClassical { .. });
        let pure = matches!(self.generator, StateGenerator::HaarPure { .. });
        match self.relation {
            RelationId::Pure => need(pure && dims.len() >= 2, "pure states with at least two factors"),
            RelationId::Koashi => need(pure && dims.len() == 3, "pure states with three factors"),
            RelationId::Tessier => {
                if !qc && dims != [2, 2] {
                    return Err(CcrError::NotTwoQubit(dims));
                }
                need(!qc, "a two-qubit state family")
            }
            RelationId::QuantumClassical => need(qc, "the quantum-classical family"),
            RelationId::Reality => need(!qc, "a pure or mixed state family"),
            RelationId::MutualInfo | RelationId::Conditional => {
                need(!qc && dims.len() >= 2, "states with at least two factors")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchSummary {
    pub relation: RelationId,
    pub trials: usize,
    pub tolerance: f64,
    pub seed: u64,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub median_residual: f64,
    pub failures: usize,
    pub worst_trial: usize,
    /// Per trial, the largest residual over the relation and its side checks.
    pub residuals: Vec<f64>,
    /// Per trial, the largest restart spread of any optimized term.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub optimizer_spreads: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measurement: Option<MeasurementClass>,
    pub unconverged: usize,
}

impl BatchSummary {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

struct TrialOutcome {
    residual: f64,
    spread: Option<f64>,
    converged: bool,
}

fn outcome(reports: &[CcrReport]) -> TrialOutcome {
    let residual = reports.iter().map(CcrReport::worst_residual).fold(0.0, f64::max);
    let notes: Vec<_> = reports.iter().flat_map(|r| &r.optimizer).collect();
    TrialOutcome {
        residual,
        spread: (!notes.is_empty()).then(|| notes.iter().map(|n| n.spread_across_restarts).fold(0.0, f64::max)),
        converged: notes.iter().all(|n| n.converged),
    }
}

fn run_trial(spec: &BatchSpec, trial: usize) -> Result<TrialOutcome> {
    let mut rng = stream_rng(spec.seed, trial as u64);
    let reports = match spec.relation {
        RelationId::Pure => {
            let StateGenerator::HaarPure { dims } = &spec.generator else {
                unreachable!("validated")
            };
            let psi = random_pure_with(&mut rng, dims);
            let basis = spec.random_basis.then(|| random_basis_with(&mut rng, dims[0]));
            vec![ccr_pure(&psi, &Cut::first(), basis.as_ref())?]
        }
        RelationId::Reality => {
            let rho = spec.generator.density(&mut rng);
            let basis = spec.random_basis.then(|| random_basis_with(&mut rng, rho.dim()));
            vec![ccr_reality(&rho, basis.as_ref())?]
        }
        RelationId::Koashi => {
            let StateGenerator::HaarPure { dims } = &spec.generator else {
                unreachable!("validated")
            };
            let psi = random_pure_with(&mut rng, dims);
            let cfg = OptimizerConfig {
                seed: rng.random(),
                ..spec.optimizer.clone()
            };
            vec![ccr_koashi(&psi, &cfg, spec.swap)?]
        }
        RelationId::Tessier => vec![ccr_tessier(&spec.generator.density(&mut rng))?],
        RelationId::QuantumClassical => {
            let StateGenerator::QuantumClassical { da, db } = spec.generator else {
                unreachable!("validated")
            };
            let (w, conds) = random_quantum_classical_with(&mut rng, da, db);
            ccr_quantum_classical(&w, &conds)?
        }
        RelationId::MutualInfo => vec![ccr_mutual_info(&spec.generator.density(&mut rng), &Cut::first())?],
        RelationId::Conditional => vec![ccr_conditional(&spec.generator.density(&mut rng), &Cut::first())?],
    };
    Ok(outcome(&reports))
}

/// Evaluates the relation on `trials` random states. Trial `t` draws from the
/// generator stream `(seed, t)`, so the summary does not depend on scheduling.
pub fn verify_batch(spec: &BatchSpec) -> Result<BatchSummary> {
    spec.validate()?;
    let outcomes: Vec<Result<TrialOutcome>> = (0..spec.trials).into_par_iter().map(|t| run_trial(spec, t)).collect();
    let outcomes: Vec<TrialOutcome> = outcomes.into_iter().collect::<Result<_>>()?;

    let residuals: Vec<f64> = outcomes.iter().map(|o| o.residual).collect();
    let worst_trial = (0..residuals.len())
        .max_by(|&a, &b| residuals[a].total_cmp(&residuals[b]).then(b.cmp(&a)))
        .unwrap_or(0);
    let mut sorted = residuals.clone();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    let uses_optimizer = outcomes.iter().any(|o| o.spread.is_some());
    Ok(BatchSummary {
        relation: spec.relation,
        trials: spec.trials,
        tolerance: spec.tolerance,
        seed: spec.seed,
        max_residual: sorted[n - 1],
        mean_residual: residuals.iter().sum::<f64>() / n as f64,
        median_residual: median,
        failures: residuals.iter().filter(|&&r| !(r <= spec.tolerance)).count(),
        worst_trial,
        optimizer_spreads: if uses_optimizer {
            outcomes.iter().map(|o| o.spread.unwrap_or(0.0)).collect()
        } else {
            Vec::new()
        },
        measurement: (spec.relation == RelationId::Koashi).then_some(spec.optimizer.measurement),
        unconverged: outcomes.iter().filter(|o| !o.converged).count(),
        residuals,
    })
}
