//! Seeded random states, unitaries and bases.
//!
//! Every generator is a pure function of its parameters and seed. Independent
//! work items derive their generator from `(seed, stream)` so parallel batches
//! do not depend on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use super::linalg::{c, CMatrix, CVector};
use super::state::{DensityMatrix, MeasurementBasis, PureState};

pub type StateRng = ChaCha20Rng;

pub fn seeded_rng(seed: u64) -> StateRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Independent generator number `stream` derived from `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> StateRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Vector of i.i.d. standard complex Gaussians.
pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im)
    })
}

/// Haar-random pure state on the given factorization.
pub fn random_pure_with<R: Rng + ?Sized>(rng: &mut R, dims: &[usize]) -> PureState {
    let n: usize = dims.iter().product();
    loop {
        let v = gaussian_vector(rng, n);
        if v.norm() > 1e-300 {
            return PureState::normalized(dims.to_vec(), v);
        }
    }
}

pub fn random_pure(dims: &[usize], seed: u64) -> PureState {
    random_pure_with(&mut seeded_rng(seed), dims)
}

/// Induced-measure mixed state: reduction of a Haar pure state on
/// `dims ⊗ C^rank`.
pub fn random_mixed_with<R: Rng + ?Sized>(rng: &mut R, dims: &[usize], rank: usize) -> DensityMatrix {
    let d: usize = dims.iter().product();
    assert!(rank >= 1 && rank <= d, "rank {rank} outside 1..={d}");
    let psi = random_pure_with(rng, &[d, rank]);
    let reduced = psi.reduced(&[0]).expect("two-factor state");
    reduced.with_dims(dims.to_vec()).expect("same total dimension")
}

pub fn random_mixed(dim: usize, rank: usize, seed: u64) -> DensityMatrix {
    random_mixed_with(&mut seeded_rng(seed), &[dim], rank)
}

/// Haar-random unitary from Gram-Schmidt on a complex Ginibre matrix.
pub fn haar_unitary_with<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    loop {
        let mut q = CMatrix::zeros(d, d);
        let mut ok = true;
        for k in 0..d {
            let mut v = gaussian_vector(rng, d);
            // two passes keep the columns orthonormal to machine precision
            for _ in 0..2 {
                for j in 0..k {
                    let qj = q.column(j);
                    let proj = qj.dotc(&v);
                    v -= qj * proj;
                }
            }
            let n = v.norm();
            if n < 1e-12 {
                ok = false;
                break;
            }
            q.set_column(k, &v.unscale(n));
        }
        if ok {
            return q;
        }
    }
}

pub fn haar_unitary(d: usize, seed: u64) -> CMatrix {
    haar_unitary_with(&mut seeded_rng(seed), d)
}

pub fn random_basis_with<R: Rng + ?Sized>(rng: &mut R, d: usize) -> MeasurementBasis {
    MeasurementBasis::from_unitary(haar_unitary_with(rng, d)).expect("Haar unitary is unitary")
}
