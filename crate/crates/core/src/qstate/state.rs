use num_complex::Complex64;

use super::linalg::{
    self, c, herm_eig_trusted, hermitian_defect, hermitian_part, is_finite, CMatrix, CVector,
    STRUCTURE_TOL, ZERO,
};
use crate::error::{CcrError, Result};

/// Eigenvalues below this are treated as numerical zeros when counting rank.
pub const RANK_TOL: f64 = 1e-12;

fn check_dims(dims: &[usize], total: usize) -> Result<()> {
    if dims.is_empty() || dims.iter().any(|&d| d == 0) {
        return Err(CcrError::InvalidArgument(format!("bad subsystem dims {dims:?}")));
    }
    let prod: usize = dims.iter().product();
    if prod != total {
        return Err(CcrError::DimMismatch {
            expected: prod,
            found: total,
        });
    }
    Ok(())
}

/// Row-major strides: subsystem 0 is the most significant (leftmost) factor.
fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Maps every full index to its position in the reordered tensor product
/// `dims[order[0]] ⊗ dims[order[1]] ⊗ ...`.
fn permutation_map(dims: &[usize], order: &[usize]) -> Vec<usize> {
    let old_strides = strides(dims);
    let new_dims: Vec<usize> = order.iter().map(|&k| dims[k]).collect();
    let new_strides = strides(&new_dims);
    let total: usize = dims.iter().product();
    (0..total)
        .map(|idx| {
            order
                .iter()
                .enumerate()
                .map(|(pos, &k)| ((idx / old_strides[k]) % dims[k]) * new_strides[pos])
                .sum()
        })
        .collect()
}

fn check_order(order: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for &k in order {
        if k >= n {
            return Err(CcrError::BadIndex { index: k, count: n });
        }
        if seen[k] {
            return Err(CcrError::InvalidArgument(format!("repeated subsystem {k} in {order:?}")));
        }
        seen[k] = true;
    }
    if order.len() != n {
        return Err(CcrError::InvalidArgument(format!("{order:?} is not a permutation of {n} subsystems")));
    }
    Ok(())
}

/// Splits the subsystems of a state into parties A and B.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cut {
    party_a: Vec<usize>,
}

impl Cut {
    /// Party A is the given subsystem set, party B everything else.
    pub fn new(party_a: impl Into<Vec<usize>>) -> Self {
        let mut party_a = party_a.into();
        party_a.sort_unstable();
        party_a.dedup();
        Cut { party_a }
    }

    /// Subsystem 0 against the rest.
    pub fn first() -> Self {
        Cut { party_a: vec![0] }
    }

    pub fn party_a(&self) -> &[usize] {
        &self.party_a
    }

    /// Resolves the cut against `n` subsystems, returning (A, B) index lists.
    pub fn resolve(&self, n: usize) -> Result<(Vec<usize>, Vec<usize>)> {
        if let Some(&bad) = self.party_a.iter().find(|&&k| k >= n) {
            return Err(CcrError::BadCut(format!("subsystem {bad} does not exist ({n} subsystems)")));
        }
        let b: Vec<usize> = (0..n).filter(|k| !self.party_a.contains(k)).collect();
        if self.party_a.is_empty() || b.is_empty() {
            return Err(CcrError::BadCut(format!(
                "party A = {:?} leaves an empty side among {n} subsystems",
                self.party_a
            )));
        }
        Ok((self.party_a.clone(), b))
    }
}

/// A validated density matrix together with its tensor-factor dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    mat: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity (all within 1e-10).
    pub fn new(dims: Vec<usize>, mat: CMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(CcrError::DimMismatch {
                expected: mat.nrows(),
                found: mat.ncols(),
            });
        }
        check_dims(&dims, mat.nrows())?;
        if !is_finite(&mat) {
            return Err(CcrError::NonFinite("density matrix"));
        }
        let defect = hermitian_defect(&mat);
        if defect > STRUCTURE_TOL {
            return Err(CcrError::NotHermitian { defect });
        }
        let tr = linalg::trace(&mat);
        if (tr - c(1.0, 0.0)).norm() > STRUCTURE_TOL {
            return Err(CcrError::NotUnitTrace { trace: tr.re });
        }
        let mat = hermitian_part(&mat);
        let min = linalg::eigvalsh(&mat).last().copied().unwrap_or(0.0);
        if min < -STRUCTURE_TOL {
            return Err(CcrError::NotPositive { min_eigenvalue: min });
        }
        Ok(DensityMatrix { dims, mat })
    }

    /// For matrices produced by trusted operations on valid states.
    pub(crate) fn from_trusted(dims: Vec<usize>, mat: CMatrix) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), mat.nrows());
        DensityMatrix {
            dims,
            mat: hermitian_part(&mat),
        }
    }

    pub fn from_pure(psi: &PureState) -> Self {
        DensityMatrix::from_trusted(psi.dims.clone(), linalg::outer(&psi.amps, &psi.amps))
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Result<Self> {
        let d: usize = dims.iter().product();
        check_dims(&dims, d)?;
        Ok(DensityMatrix::from_trusted(dims, CMatrix::identity(d, d) * c(1.0 / d as f64, 0.0)))
    }

    /// Diagonal state with the given populations.
    pub fn diagonal(dims: Vec<usize>, populations: &[f64]) -> Result<Self> {
        let diag = CVector::from_iterator(populations.len(), populations.iter().map(|&p| c(p, 0.0)));
        DensityMatrix::new(dims, CMatrix::from_diagonal(&diag))
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn num_subsystems(&self) -> usize {
        self.dims.len()
    }

    /// Eigenvalues, descending.
    pub fn spectrum(&self) -> Vec<f64> {
        linalg::eigvalsh(&self.mat)
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn rank(&self) -> usize {
        self.spectrum().iter().filter(|&&l| l > RANK_TOL).count()
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        DensityMatrix::from_trusted(dims, linalg::kron(&self.mat, &other.mat))
    }

    /// `U ρ U^dagger`.
    pub fn conjugated(&self, u: &CMatrix) -> Result<DensityMatrix> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(CcrError::DimMismatch {
                expected: self.dim(),
                found: u.nrows(),
            });
        }
        Ok(DensityMatrix::from_trusted(self.dims.clone(), u * &self.mat * u.adjoint()))
    }

    /// Reorders the tensor factors; `order[k]` is the old index of new factor `k`.
    pub fn permuted(&self, order: &[usize]) -> Result<DensityMatrix> {
        check_order(order, self.dims.len())?;
        let map = permutation_map(&self.dims, order);
        let d = self.dim();
        let mut out = CMatrix::zeros(d, d);
        for r in 0..d {
            for col in 0..d {
                out[(map[r], map[col])] = self.mat[(r, col)];
            }
        }
        let dims = order.iter().map(|&k| self.dims[k]).collect();
        Ok(DensityMatrix::from_trusted(dims, out))
    }

    /// Traces out every subsystem not listed in `keep`. The result keeps the
    /// original relative order of the retained factors.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let n = self.dims.len();
        if let Some(&bad) = keep.iter().find(|&&k| k >= n) {
            return Err(CcrError::BadIndex { index: bad, count: n });
        }
        let mut keep: Vec<usize> = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if keep.is_empty() {
            return Err(CcrError::InvalidArgument("partial trace must keep a subsystem".into()));
        }
        let traced: Vec<usize> = (0..n).filter(|k| !keep.contains(k)).collect();
        let mut order = keep.clone();
        order.extend_from_slice(&traced);
        let dk: usize = keep.iter().map(|&k| self.dims[k]).product();
        let dt: usize = traced.iter().map(|&k| self.dims[k]).product();
        let map = permutation_map(&self.dims, &order);
        // inverse: position in (keep ⊗ traced) order -> original index
        let mut inv = vec![0; map.len()];
        for (old, &new) in map.iter().enumerate() {
            inv[new] = old;
        }
        let mut out = CMatrix::zeros(dk, dk);
        for i in 0..dk {
            for j in 0..dk {
                let mut acc = ZERO;
                for t in 0..dt {
                    acc += self.mat[(inv[i * dt + t], inv[j * dt + t])];
                }
                out[(i, j)] = acc;
            }
        }
        let dims = keep.iter().map(|&k| self.dims[k]).collect();
        Ok(DensityMatrix::from_trusted(dims, out))
    }

    /// Regroups the state into two factors `[d_A, d_B]` according to `cut`.
    pub fn bipartite(&self, cut: &Cut) -> Result<DensityMatrix> {
        let (a, b) = cut.resolve(self.dims.len())?;
        let da: usize = a.iter().map(|&k| self.dims[k]).product();
        let db: usize = b.iter().map(|&k| self.dims[k]).product();
        let mut order = a;
        order.extend(b);
        let permuted = self.permuted(&order)?;
        Ok(DensityMatrix::from_trusted(vec![da, db], permuted.mat))
    }

    /// Same matrix, different factorization.
    pub fn with_dims(&self, dims: Vec<usize>) -> Result<DensityMatrix> {
        check_dims(&dims, self.dim())?;
        Ok(DensityMatrix::from_trusted(dims, self.mat.clone()))
    }

    /// Returns the pure state vector if the state has purity 1 within `tol`.
    pub fn as_pure(&self, tol: f64) -> Result<PureState> {
        let purity = self.purity();
        if (purity - 1.0).abs() > tol {
            return Err(CcrError::NotPure { purity });
        }
        let eig = herm_eig_trusted(&self.mat);
        let v = eig.vectors.column(0).into_owned();
        Ok(PureState::normalized(self.dims.clone(), fix_phase(v)))
    }

    /// Canonical purification `Σ_i √λ_i |v_i> ⊗ |i>` onto a minimal-rank ancilla
    /// appended as the last factor.
    pub fn purify(&self) -> PureState {
        let eig = herm_eig_trusted(&self.mat);
        let rank = eig.values.iter().filter(|&&l| l > RANK_TOL).count().max(1);
        let d = self.dim();
        let mut amps = CVector::zeros(d * rank);
        for i in 0..rank {
            let w = eig.values[i].max(0.0).sqrt();
            for r in 0..d {
                amps[r * rank + i] = eig.vectors[(r, i)] * w;
            }
        }
        let mut dims = self.dims.clone();
        dims.push(rank);
        PureState::normalized(dims, amps)
    }
}

/// Rotates the global phase so the largest-magnitude amplitude is real positive.
fn fix_phase(v: CVector) -> CVector {
    let pivot = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(ZERO);
    if pivot.norm() == 0.0 {
        return v;
    }
    let phase = pivot.conj() / pivot.norm();
    v.map(|z| z * phase)
}

/// Normalized state vector with tensor-factor dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    dims: Vec<usize>,
    amps: CVector,
}

impl PureState {
    pub const NORM_TOL: f64 = 1e-10;

    pub fn new(dims: Vec<usize>, amps: CVector) -> Result<Self> {
        check_dims(&dims, amps.len())?;
        if !amps.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(CcrError::NonFinite("state vector"));
        }
        let n2 = amps.norm_squared();
        if (n2 - 1.0).abs() > Self::NORM_TOL {
            return Err(CcrError::NotNormalized(n2));
        }
        Ok(PureState { dims, amps })
    }

    /// Scales `amps` to unit norm. Panics on a zero vector.
    pub fn normalized(dims: Vec<usize>, amps: CVector) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), amps.len());
        let n = amps.norm();
        assert!(n > 0.0, "cannot normalize the zero vector");
        PureState {
            dims,
            amps: amps.unscale(n),
        }
    }

    /// Computational basis product state `|i_0 i_1 ...>`.
    pub fn basis(dims: Vec<usize>, digits: &[usize]) -> Result<Self> {
        if digits.len() != dims.len() {
            return Err(CcrError::DimMismatch {
                expected: dims.len(),
                found: digits.len(),
            });
        }
        let total: usize = dims.iter().product();
        check_dims(&dims, total)?;
        let st = strides(&dims);
        let mut idx = 0;
        for (k, &d) in digits.iter().enumerate() {
            if d >= dims[k] {
                return Err(CcrError::BadIndex { index: d, count: dims[k] });
            }
            idx += d * st[k];
        }
        let mut amps = CVector::zeros(total);
        amps[idx] = c(1.0, 0.0);
        Ok(PureState { dims, amps })
    }

    /// Builds a state from unnormalized amplitudes given as real/imag pairs.
    pub fn from_amplitudes(dims: Vec<usize>, amps: &[Complex64]) -> Result<Self> {
        let v = CVector::from_column_slice(amps);
        check_dims(&dims, v.len())?;
        if v.norm() == 0.0 {
            return Err(CcrError::NotNormalized(0.0));
        }
        Ok(PureState::normalized(dims, v))
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        PureState {
            dims,
            amps: linalg::kron_vec(&self.amps, &other.amps),
        }
    }

    pub fn permuted(&self, order: &[usize]) -> Result<PureState> {
        check_order(order, self.dims.len())?;
        let map = permutation_map(&self.dims, order);
        let mut amps = CVector::zeros(self.amps.len());
        for (old, &new) in map.iter().enumerate() {
            amps[new] = self.amps[old];
        }
        Ok(PureState {
            dims: order.iter().map(|&k| self.dims[k]).collect(),
            amps,
        })
    }

    /// Amplitudes reshaped as a `d_A × d_B` matrix for the given cut.
    pub fn coefficient_matrix(&self, cut: &Cut) -> Result<CMatrix> {
        let (a, b) = cut.resolve(self.dims.len())?;
        let da: usize = a.iter().map(|&k| self.dims[k]).product();
        let db: usize = b.iter().map(|&k| self.dims[k]).product();
        let mut order = a;
        order.extend(b);
        let p = self.permuted(&order)?;
        Ok(CMatrix::from_row_iterator(da, db, p.amps.iter().copied()))
    }

    /// Reduced state on `keep`, computed without forming the full density matrix.
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let n = self.dims.len();
        if let Some(&bad) = keep.iter().find(|&&k| k >= n) {
            return Err(CcrError::BadIndex { index: bad, count: n });
        }
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if keep.len() == n {
            return Ok(self.density());
        }
        let m = self.coefficient_matrix(&Cut::new(keep.clone()))?;
        let dims = keep.iter().map(|&k| self.dims[k]).collect();
        Ok(DensityMatrix::from_trusted(dims, &m * m.adjoint()))
    }

    /// `U |ψ>`; `u` must be unitary of matching size.
    pub fn evolved(&self, u: &CMatrix) -> Result<PureState> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(CcrError::DimMismatch {
                expected: self.dim(),
                found: u.nrows(),
            });
        }
        Ok(PureState::normalized(self.dims.clone(), u * &self.amps))
    }
}

/// Orthonormal rank-1 projector family `{|o_k><o_k|}`, stored as the unitary
/// whose columns are the `|o_k>`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementBasis {
    vectors: CMatrix,
    labels: Option<Vec<f64>>,
}

impl MeasurementBasis {
    pub fn computational(d: usize) -> Self {
        MeasurementBasis {
            vectors: linalg::identity(d),
            labels: None,
        }
    }

    /// Columns of `u` are the basis vectors.
    pub fn from_unitary(u: CMatrix) -> Result<Self> {
        if !u.is_square() {
            return Err(CcrError::BadBasis(format!("{}×{} is not square", u.nrows(), u.ncols())));
        }
        let defect = linalg::unitarity_defect(&u);
        if defect > STRUCTURE_TOL {
            return Err(CcrError::BadBasis(format!("columns not orthonormal (defect {defect:.3e})")));
        }
        Ok(MeasurementBasis { vectors: u, labels: None })
    }

    /// Accepts an explicit projector list and checks idempotence, unit trace,
    /// mutual orthogonality and completeness.
    pub fn from_projectors(projectors: &[CMatrix]) -> Result<Self> {
        let d = projectors.len();
        if d == 0 {
            return Err(CcrError::BadBasis("no projectors".into()));
        }
        let mut sum = CMatrix::zeros(d, d);
        let mut vectors = CMatrix::zeros(d, d);
        for (k, p) in projectors.iter().enumerate() {
            if p.nrows() != d || p.ncols() != d {
                return Err(CcrError::BadBasis(format!("projector {k} is not {d}×{d}")));
            }
            if hermitian_defect(p) > STRUCTURE_TOL
                || linalg::max_abs_diff(&(p * p), p) > STRUCTURE_TOL
                || (linalg::trace(p) - c(1.0, 0.0)).norm() > STRUCTURE_TOL
            {
                return Err(CcrError::BadBasis(format!("element {k} is not a rank-1 projector")));
            }
            for (j, q) in projectors.iter().enumerate().take(k) {
                if (p * q).iter().any(|z| z.norm() > STRUCTURE_TOL) {
                    return Err(CcrError::BadBasis(format!("projectors {j} and {k} overlap")));
                }
            }
            sum += p;
            let col = (0..d)
                .max_by(|&a, &b| p.column(a).norm().total_cmp(&p.column(b).norm()))
                .unwrap_or(0);
            let v = p.column(col).into_owned();
            let n = v.norm();
            vectors.set_column(k, &v.unscale(n));
        }
        if linalg::max_abs_diff(&sum, &linalg::identity(d)) > STRUCTURE_TOL {
            return Err(CcrError::BadBasis("projectors do not sum to the identity".into()));
        }
        Ok(MeasurementBasis { vectors, labels: None })
    }

    /// Attaches observable eigenvalues `o_k`.
    pub fn with_labels(mut self, labels: Vec<f64>) -> Result<Self> {
        if labels.len() != self.dim() {
            return Err(CcrError::DimMismatch {
                expected: self.dim(),
                found: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn labels(&self) -> Option<&[f64]> {
        self.labels.as_deref()
    }

    pub fn vectors(&self) -> &CMatrix {
        &self.vectors
    }

    pub fn projectors(&self) -> Vec<CMatrix> {
        (0..self.dim())
            .map(|k| {
                let v = self.vectors.column(k).into_owned();
                linalg::outer(&v, &v)
            })
            .collect()
    }

    /// Product basis `{|a_i> ⊗ |b_j>}`.
    pub fn product(&self, other: &MeasurementBasis) -> MeasurementBasis {
        MeasurementBasis {
            vectors: linalg::kron(&self.vectors, &other.vectors),
            labels: None,
        }
    }

    /// Basis rotated by a unitary: `|o_k> -> U|o_k>`.
    pub fn rotated(&self, u: &CMatrix) -> Result<MeasurementBasis> {
        if u.nrows() != self.dim() {
            return Err(CcrError::DimMismatch {
                expected: self.dim(),
                found: u.nrows(),
            });
        }
        MeasurementBasis::from_unitary(u * &self.vectors).map(|b| MeasurementBasis {
            labels: self.labels.clone(),
            ..b
        })
    }

    /// Outcome probabilities `<o_k|ρ|o_k>`.
    pub fn probabilities(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        self.check(rho)?;
        Ok(self.rotated_diagonal(rho.matrix()))
    }

    pub(crate) fn rotated_diagonal(&self, m: &CMatrix) -> Vec<f64> {
        let u = &self.vectors;
        (0..self.dim())
            .map(|k| {
                let v = u.column(k);
                (v.adjoint() * m * v)[(0, 0)].re
            })
            .collect()
    }

    pub(crate) fn check(&self, rho: &DensityMatrix) -> Result<()> {
        if self.dim() != rho.dim() {
            return Err(CcrError::DimMismatch {
                expected: rho.dim(),
                found: self.dim(),
            });
        }
        Ok(())
    }
}

/// Probability-weighted family of states sharing one factorization.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    weights: Vec<f64>,
    members: Vec<DensityMatrix>,
}

impl Ensemble {
    pub const WEIGHT_TOL: f64 = 1e-10;

    pub fn new(weights: Vec<f64>, members: Vec<DensityMatrix>) -> Result<Self> {
        if weights.len() != members.len() || weights.is_empty() {
            return Err(CcrError::WeightMismatch(format!(
                "{} weights for {} members",
                weights.len(),
                members.len()
            )));
        }
        validate_weights(&weights)?;
        if let Some(m) = members.iter().find(|m| m.dims() != members[0].dims()) {
            return Err(CcrError::WeightMismatch(format!(
                "member dims {:?} differ from {:?}",
                m.dims(),
                members[0].dims()
            )));
        }
        Ok(Ensemble { weights, members })
    }

    pub fn from_pure(weights: Vec<f64>, members: &[PureState]) -> Result<Self> {
        Ensemble::new(weights, members.iter().map(PureState::density).collect())
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn members(&self) -> &[DensityMatrix] {
        &self.members
    }

    /// `Σ_j p_j ρ_j`.
    pub fn state(&self) -> DensityMatrix {
        let d = self.members[0].dim();
        let mut acc = CMatrix::zeros(d, d);
        for (p, m) in self.weights.iter().zip(&self.members) {
            acc += m.matrix() * c(*p, 0.0);
        }
        DensityMatrix::from_trusted(self.members[0].dims().to_vec(), acc)
    }
}

pub(crate) fn validate_weights(weights: &[f64]) -> Result<()> {
    if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
        return Err(CcrError::WeightMismatch(format!("negative or non-finite weight in {weights:?}")));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > Ensemble::WEIGHT_TOL {
        return Err(CcrError::WeightMismatch(format!("weights sum to {total}")));
    }
    Ok(())
}
