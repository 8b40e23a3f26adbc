//! Classical correlation `J`: entropy of the unmeasured side minus the least
//! average entropy left after a rank-1 measurement on the other side.

use num_complex::Complex64;
use serde::Serialize;

use super::optimize::{multistart_indexed, LocalMin, MeasurementClass, NelderMead, OptResult, OptimizerConfig};
use crate::error::{CcrError, Result};
use crate::measures::{spectrum_entropy, von_neumann_entropy};
use crate::qstate::linalg::{eigvalsh, unitary_from_params, CMatrix, CVector, ZERO};
use crate::qstate::random::{gaussian_vector, haar_unitary_with, StateRng};
use crate::qstate::{Cut, DensityMatrix, MeasurementBasis};

/// Largest dimension of the measured side.
pub const MAX_MEASURED_DIM: usize = 4;

/// Outcomes with smaller probability are dropped.
pub const OUTCOME_TOL: f64 = 1e-12;

/// Which side of a bipartition is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    First,
    #[default]
    Second,
}

fn xlogx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.log2()
    } else {
        0.0
    }
}

/// Two-factor state with the measured side last.
fn oriented(rho: &DensityMatrix, cut: &Cut, measured: Side) -> Result<DensityMatrix> {
    let bip = rho.bipartite(cut)?;
    match measured {
        Side::Second => Ok(bip),
        Side::First => bip.permuted(&[1, 0]),
    }
}

/// `Σ_k p_k S(ρ_k)` for rank-1 elements `|e_k><e_k|` acting on the last factor
/// of a two-factor state.
fn average_entropy(rho: &DensityMatrix, elements: &[CVector]) -> f64 {
    let (da, d) = (rho.dims()[0], rho.dims()[1]);
    let m = rho.matrix();
    elements
        .iter()
        .map(|e| {
            // (I ⊗ e) as a (da·d) × da matrix
            let lift = CMatrix::from_fn(da * d, da, |row, col| if row / d == col { e[row % d] } else { ZERO });
            let sigma = lift.adjoint() * m * &lift;
            let p: f64 = (0..da).map(|a| sigma[(a, a)].re).sum();
            if p < OUTCOME_TOL {
                return 0.0;
            }
            xlogx(p) - eigvalsh(&sigma).into_iter().map(xlogx).sum::<f64>()
        })
        .sum()
}

/// Conditional entropy of the unmeasured side given the outcomes of a
/// projective measurement in `basis` on the measured side.
pub fn measured_conditional_entropy(
    rho: &DensityMatrix,
    cut: &Cut,
    measured: Side,
    basis: &MeasurementBasis,
) -> Result<f64> {
    let st = oriented(rho, cut, measured)?;
    if basis.dim() != st.dims()[1] {
        return Err(CcrError::DimMismatch {
            expected: st.dims()[1],
            found: basis.dim(),
        });
    }
    let elements: Vec<CVector> = (0..basis.dim()).map(|k| basis.vectors().column(k).into_owned()).collect();
    Ok(average_entropy(&st, &elements))
}

/// Elements `e_k = conj(V[k, ·])` from the first `d` columns of an `m × m` unitary.
fn povm_elements(w: &CMatrix, d: usize) -> Vec<CVector> {
    (0..w.nrows())
        .map(|k| CVector::from_fn(d, |e, _| w[(k, e)].conj()))
        .collect()
}

fn projective_elements(u: &CMatrix) -> Vec<CVector> {
    (0..u.ncols()).map(|k| u.column(k).into_owned()).collect()
}

fn flatten(elements: &[CVector]) -> Vec<f64> {
    elements.iter().flat_map(|e| e.iter().flat_map(|z| [z.re, z.im]).collect::<Vec<_>>()).collect()
}

/// Completes an isometry (orthonormal columns) to a unitary.
fn complete_unitary(v: &CMatrix, rng: &mut StateRng) -> CMatrix {
    let m = v.nrows();
    let mut q = CMatrix::zeros(m, m);
    for k in 0..v.ncols() {
        q.set_column(k, &v.column(k));
    }
    let mut k = v.ncols();
    while k < m {
        let mut x = gaussian_vector(rng, m);
        for _ in 0..2 {
            for j in 0..k {
                let qj = q.column(j);
                let proj = qj.dotc(&x);
                x -= qj * proj;
            }
        }
        let n = x.norm();
        if n > 1e-8 {
            q.set_column(k, &x.unscale(n));
            k += 1;
        }
    }
    q
}

struct Problem {
    state: DensityMatrix,
    d: usize,
    nm: NelderMead,
}

impl Problem {
    fn projective(&self, start: CMatrix) -> LocalMin {
        let d = self.d;
        let f = |x: &[f64]| average_entropy(&self.state, &projective_elements(&(&start * unitary_from_params(d, x))));
        let r = self.nm.minimize(f, &vec![0.0; d * d]);
        let u = &start * unitary_from_params(d, &r.point);
        LocalMin {
            value: r.value,
            point: flatten(&projective_elements(&u)),
            converged: r.converged,
        }
    }

    fn povm(&self, start: CMatrix) -> LocalMin {
        let (d, m) = (self.d, start.nrows());
        let f = |x: &[f64]| average_entropy(&self.state, &povm_elements(&(&start * unitary_from_params(m, x)), d));
        let r = self.nm.minimize(f, &vec![0.0; m * m]);
        let w = &start * unitary_from_params(m, &r.point);
        LocalMin {
            value: r.value,
            point: flatten(&povm_elements(&w, d)),
            converged: r.converged,
        }
    }
}

/// `J` of the unmeasured side given measurements on `measured`, maximized over
/// the measurement class in `cfg`. `argument` lists the optimal element
/// vectors `e_k` (interleaved real and imaginary parts); the POVM search is
/// seeded with the projective optimum so it never does worse.
pub fn classical_correlation(
    rho: &DensityMatrix,
    cut: &Cut,
    measured: Side,
    cfg: &OptimizerConfig,
) -> Result<OptResult> {
    cfg.validate()?;
    let state = oriented(rho, cut, measured)?;
    let d = state.dims()[1];
    if d > MAX_MEASURED_DIM {
        return Err(CcrError::DimTooLarge {
            dim: d,
            limit: MAX_MEASURED_DIM,
        });
    }
    let s_a = von_neumann_entropy(&state.partial_trace(&[0])?);
    let problem = Problem {
        state,
        d,
        nm: NelderMead {
            step: 0.5,
            max_iterations: cfg.max_iterations,
            tolerance: cfg.tolerance,
        },
    };
    let projective = multistart_indexed(cfg, |_, rng| problem.projective(haar_unitary_with(rng, d)));
    let best = match cfg.measurement {
        MeasurementClass::Projective => projective,
        MeasurementClass::Povm => {
            let m = d * d;
            let seed_iso = CMatrix::from_fn(m, d, |k, e| {
                if k < d {
                    Complex64::new(projective.argument[2 * (k * d + e)], -projective.argument[2 * (k * d + e) + 1])
                } else {
                    ZERO
                }
            });
            let povm = multistart_indexed(cfg, |r, rng| {
                if r == 0 {
                    problem.povm(complete_unitary(&seed_iso, rng))
                } else {
                    problem.povm(haar_unitary_with(rng, m))
                }
            });
            if povm.value <= projective.value {
                povm
            } else {
                projective
            }
        }
    };
    Ok(OptResult {
        value: s_a - best.value,
        measurement: Some(cfg.measurement),
        ..best
    })
}

/// Entropy of the unmeasured side, the reference point of `J`.
pub fn unmeasured_entropy(rho: &DensityMatrix, cut: &Cut, measured: Side) -> Result<f64> {
    let st = oriented(rho, cut, measured)?;
    Ok(spectrum_entropy(&st.partial_trace(&[0])?.spectrum()))
}
