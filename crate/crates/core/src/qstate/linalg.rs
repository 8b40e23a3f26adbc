//! Dense complex linear algebra used throughout the crate.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`; everything here is a thin layer of
//! quantum-specific helpers on top (Hermitian spectra, matrix functions, unitary
//! parametrizations).

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{CcrError, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Entrywise tolerance used for Hermiticity, trace and projector checks.
pub const STRUCTURE_TOL: f64 = 1e-10;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    a.kronecker(b)
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

/// Largest entrywise deviation `max |m - m^dagger|`.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `(m + m^dagger) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().sum()
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermEig {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors, column `k` belongs to `values[k]`.
    pub vectors: CMatrix,
}

impl HermEig {
    pub fn reconstruct(&self) -> CMatrix {
        self.apply(|x| x)
    }

    /// `V f(Λ) V^dagger`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for k in 0..n {
            let fk = f(self.values[k]);
            scaled.column_mut(k).scale_mut(fk);
        }
        scaled * self.vectors.adjoint()
    }
}

/// Hermitian eigendecomposition with eigenvalues sorted descending.
pub fn herm_eig(m: &CMatrix) -> Result<HermEig> {
    if !m.is_square() {
        return Err(CcrError::DimMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    let defect = hermitian_defect(m);
    if defect > STRUCTURE_TOL {
        return Err(CcrError::NotHermitian { defect });
    }
    Ok(herm_eig_trusted(&hermitian_part(m)))
}

pub(crate) fn herm_eig_trusted(m: &CMatrix) -> HermEig {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    HermEig { values, vectors }
}

/// Eigenvalues (descending) of a matrix assumed Hermitian; only the lower
/// triangle is read. 1×1 and 2×2 inputs use closed forms.
pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    match m.nrows() {
        0 => Vec::new(),
        1 => vec![m[(0, 0)].re],
        2 => {
            let a = m[(0, 0)].re;
            let d = m[(1, 1)].re;
            let b = m[(1, 0)].norm();
            let mean = 0.5 * (a + d);
            let half_gap = (0.25 * (a - d) * (a - d) + b * b).sqrt();
            vec![mean + half_gap, mean - half_gap]
        }
        _ => {
            let mut v: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
            v.sort_by(|a, b| b.total_cmp(a));
            v
        }
    }
}

/// Principal square root of a positive semidefinite Hermitian matrix;
/// slightly negative eigenvalues are treated as zero.
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    herm_eig_trusted(&hermitian_part(m)).apply(|x| x.max(0.0).sqrt())
}

/// Number of real parameters consumed by [`unitary_from_params`] for dimension `d`.
pub fn unitary_param_count(d: usize) -> usize {
    d * d
}

/// Hermitian matrix built from `d²` reals: `d` diagonal entries followed by
/// (re, im) pairs for the strict upper triangle in row order.
pub fn hermitian_from_params(d: usize, params: &[f64]) -> CMatrix {
    assert_eq!(params.len(), d * d, "expected {} parameters", d * d);
    let mut h = CMatrix::zeros(d, d);
    for k in 0..d {
        h[(k, k)] = c(params[k], 0.0);
    }
    let mut at = d;
    for j in 0..d {
        for k in (j + 1)..d {
            let z = c(params[at], params[at + 1]);
            h[(j, k)] = z;
            h[(k, j)] = z.conj();
            at += 2;
        }
    }
    h
}

/// `exp(iH)` for the Hermitian `H` encoded by `params`.
pub fn unitary_from_params(d: usize, params: &[f64]) -> CMatrix {
    let h = hermitian_from_params(d, params);
    let eig = herm_eig_trusted(&h);
    let mut scaled = eig.vectors.clone();
    for k in 0..d {
        let phase = Complex64::from_polar(1.0, eig.values[k]);
        for r in 0..d {
            scaled[(r, k)] *= phase;
        }
    }
    scaled * eig.vectors.adjoint()
}

/// `max |u^dagger u - I|` entrywise.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let g = u.adjoint() * u;
    let n = g.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((g[(i, j)] - target).norm());
        }
    }
    worst
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Outer product `|a><b|`.
pub fn outer(a: &CVector, b: &CVector) -> CMatrix {
    a * b.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_identities() {
        assert_eq!(kron(&identity(2), &identity(2)), identity(4));
        let m = CMatrix::from_fn(3, 3, |i, j| c(i as f64, j as f64));
        let scalar = CMatrix::from_element(1, 1, c(2.0, -1.0));
        assert!(max_abs_diff(&kron(&scalar, &m), &(m.clone() * c(2.0, -1.0))) < 1e-15);
    }

    #[test]
    fn sigma_y_kron_sigma_y_is_antidiagonal() {
        let yy = kron(&pauli_y(), &pauli_y());
        let expected = [-1.0, 1.0, 1.0, -1.0];
        for i in 0..4 {
            for j in 0..4 {
                let want = if i + j == 3 { c(expected[i], 0.0) } else { ZERO };
                assert!((yy[(i, j)] - want).norm() < 1e-15, "({i},{j})");
            }
        }
    }

    #[test]
    fn eig_of_diagonal_and_pauli_x() {
        let d = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0, 0.0), c(3.0, 0.0)]));
        let e = herm_eig(&d).unwrap();
        assert_eq!(e.values, vec![3.0, 1.0]);
        assert!((e.vectors[(1, 0)].norm() - 1.0).abs() < 1e-12);

        let e = herm_eig(&pauli_x()).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-12 && (e.values[1] + 1.0).abs() < 1e-12);
        let plus = e.vectors.column(0);
        assert!((plus[0].norm() - plus[1].norm()).abs() < 1e-12);
        assert!((plus[0] / plus[1] - ONE).norm() < 1e-12);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(2, 2, &[ONE, ONE, ZERO, ONE]);
        assert!(matches!(herm_eig(&m), Err(CcrError::NotHermitian { .. })));
    }

    #[test]
    fn eigvalsh_closed_form_matches_general() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.3, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.7, 0.0)]);
        let fast = eigvalsh(&m);
        let slow = herm_eig(&m).unwrap().values;
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn parametrized_unitary_is_unitary() {
        let params: Vec<f64> = (0..16).map(|k| (k as f64 * 0.37).sin()).collect();
        let u = unitary_from_params(4, &params);
        assert!(unitarity_defect(&u) < 1e-12);
        let zero = unitary_from_params(3, &[0.0; 9]);
        assert!(max_abs_diff(&zero, &identity(3)) < 1e-15);
    }
}
