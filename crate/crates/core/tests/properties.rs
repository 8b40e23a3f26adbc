use proptest::prelude::*;
use rand::Rng;

use ccr_core::cli::{fmt_num, round_sig};
use ccr_core::correlations::{
    classical_correlation, concurrence, entanglement_of_formation_two_qubit, jaeger_measure, OptimizerConfig, Side,
};
use ccr_core::dynamics::{dilate_dephasing, global_purity, ChannelSpec};
use ccr_core::measures::{
    coherence, conditional_information, dephase, irreality, mutual_information, predictability, reality,
    von_neumann_entropy,
};
use ccr_core::qstate::linalg::{kron, max_abs_diff, trace};
use ccr_core::qstate::qc::random_quantum_classical_with;
use ccr_core::qstate::random::{haar_unitary_with, random_basis_with, random_mixed_with, random_pure_with, seeded_rng};
use ccr_core::qstate::{Cut, DensityMatrix, MeasurementBasis};
use ccr_core::relations::{ccr_conditional, ccr_mutual_info, ccr_pure, ccr_quantum_classical, ccr_reality, ccr_tessier};

fn mixed(seed: u64, dims: &[usize]) -> DensityMatrix {
    let mut rng = seeded_rng(seed);
    let d: usize = dims.iter().product();
    let rank = rng.random_range(1..=d);
    random_mixed_with(&mut rng, dims, rank)
}

fn dims2() -> impl Strategy<Value = Vec<usize>> {
    (2usize..=3, 2usize..=3).prop_map(|(a, b)| vec![a, b])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn partial_trace_keeps_trace_and_positivity(seed in any::<u64>(), a in 1usize..=3, b in 1usize..=3, c in 1usize..=2) {
        let rho = mixed(seed, &[a, b, c]);
        let once = rho.partial_trace(&[0]).unwrap();
        let twice = rho.partial_trace(&[0, 1]).unwrap().partial_trace(&[0]).unwrap();
        prop_assert!((trace(once.matrix()).re - 1.0).abs() < 1e-12);
        prop_assert!(once.spectrum().iter().all(|l| *l > -1e-12));
        prop_assert!(max_abs_diff(once.matrix(), twice.matrix()) < 1e-12);
    }

    #[test]
    fn purification_round_trip(seed in any::<u64>(), dims in dims2()) {
        let rho = mixed(seed, &dims);
        let psi = rho.purify();
        let back = psi.reduced(&[0, 1]).unwrap();
        prop_assert!(max_abs_diff(back.matrix(), rho.matrix()) < 1e-9);
    }

    #[test]
    fn generators_are_seed_deterministic(seed in any::<u64>(), dims in dims2()) {
        prop_assert_eq!(mixed(seed, &dims), mixed(seed, &dims));
        let a = random_pure_with(&mut seeded_rng(seed), &dims);
        let b = random_pure_with(&mut seeded_rng(seed), &dims);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn coherence_duality_and_reality(seed in any::<u64>(), d in 2usize..=5) {
        let rho = mixed(seed, &[d]);
        let basis = random_basis_with(&mut seeded_rng(seed ^ 1), d);
        let b = Some(&basis);
        let log_d = (d as f64).log2();
        let c = coherence(&rho, b).unwrap();
        let p = predictability(&rho, b).unwrap();
        let s = von_neumann_entropy(&rho);
        let dephased = von_neumann_entropy(&dephase(&rho, b).unwrap());
        prop_assert!((c - (dephased - s)).abs() <= 1e-12);
        prop_assert!(c + p <= log_d + 1e-9);
        prop_assert!((reality(&rho, b).unwrap() + c - log_d).abs() <= 1e-10);
        prop_assert!((reality(&rho, b).unwrap() - p - s).abs() <= 1e-10);
        prop_assert!(dephased >= s - 1e-10);
    }

    #[test]
    fn basis_covariance(seed in any::<u64>(), d in 2usize..=4) {
        let rho = mixed(seed, &[d]);
        let mut rng = seeded_rng(seed ^ 2);
        let basis = random_basis_with(&mut rng, d);
        let u = haar_unitary_with(&mut rng, d);
        let moved = rho.conjugated(&u).unwrap();
        let turned = basis.rotated(&u).unwrap();
        type Quantifier = fn(&DensityMatrix, Option<&MeasurementBasis>) -> ccr_core::Result<f64>;
        for f in [coherence as Quantifier, predictability, irreality, reality] {
            let before = f(&rho, Some(&basis)).unwrap();
            let after = f(&moved, Some(&turned)).unwrap();
            prop_assert!((before - after).abs() <= 1e-10);
        }
    }

    #[test]
    fn conditional_information_dominates_mutual(seed in any::<u64>(), dims in dims2()) {
        let rho = mixed(seed, &dims);
        let cut = Cut::first();
        let cond = conditional_information(&rho, &cut).unwrap();
        let mutual = mutual_information(&rho, &cut).unwrap();
        prop_assert!(cond >= mutual - 1e-9);
        prop_assert!(mutual >= -1e-9);
    }

    #[test]
    fn pure_relation_holds_with_nonnegative_terms(seed in any::<u64>(), dims in dims2(), rotate in any::<bool>()) {
        let mut rng = seeded_rng(seed);
        let psi = random_pure_with(&mut rng, &dims);
        let basis = rotate.then(|| random_basis_with(&mut rng, dims[0]));
        let r = ccr_pure(&psi, &Cut::first(), basis.as_ref()).unwrap();
        prop_assert!(r.residual <= 1e-10);
        prop_assert!(r.terms.iter().all(|t| t.value >= -1e-10));
        prop_assert_eq!(r.clone(), ccr_pure(&psi, &Cut::first(), basis.as_ref()).unwrap());
    }

    #[test]
    fn entropic_relations_hold(seed in any::<u64>(), dims in dims2()) {
        let rho = mixed(seed, &dims);
        prop_assert!(ccr_mutual_info(&rho, &Cut::first()).unwrap().worst_residual() <= 1e-10);
        prop_assert!(ccr_conditional(&rho, &Cut::first()).unwrap().worst_residual() <= 1e-10);
        let flat = DensityMatrix::new(vec![rho.dim()], rho.matrix().clone()).unwrap();
        prop_assert!(ccr_reality(&flat, None).unwrap().worst_residual() <= 1e-10);
    }

    #[test]
    fn tessier_is_algebraic(seed in any::<u64>()) {
        let rho = mixed(seed, &[2, 2]);
        prop_assert!(ccr_tessier(&rho).unwrap().residual <= 1e-12);
    }

    #[test]
    fn quantum_classical_relations(seed in any::<u64>(), da in 2usize..=3, db in 1usize..=3) {
        let (w, conds) = random_quantum_classical_with(&mut seeded_rng(seed), da, db);
        let reports = ccr_quantum_classical(&w, &conds).unwrap();
        prop_assert_eq!(reports.len(), db + 1);
        for r in &reports {
            prop_assert!(r.worst_residual() <= 1e-9);
        }
        for r in &reports[1..] {
            prop_assert!(r.terms.iter().all(|t| t.value >= -1e-10));
        }
    }

    #[test]
    fn two_qubit_closed_forms_are_local_unitary_invariant(seed in any::<u64>()) {
        let rho = mixed(seed, &[2, 2]);
        let mut rng = seeded_rng(seed ^ 3);
        let u = kron(&haar_unitary_with(&mut rng, 2), &haar_unitary_with(&mut rng, 2));
        let moved = rho.conjugated(&u).unwrap();
        prop_assert!((concurrence(&rho).unwrap() - concurrence(&moved).unwrap()).abs() <= 1e-6);
        prop_assert!((jaeger_measure(&rho).unwrap() - jaeger_measure(&moved).unwrap()).abs() <= 1e-6);
    }

    #[test]
    fn formation_is_ordered_like_concurrence(a in any::<u64>(), b in any::<u64>()) {
        let (x, y) = (mixed(a, &[2, 2]), mixed(b, &[2, 2]));
        let (cx, cy) = (concurrence(&x).unwrap(), concurrence(&y).unwrap());
        let (ex, ey) = (
            entanglement_of_formation_two_qubit(&x).unwrap(),
            entanglement_of_formation_two_qubit(&y).unwrap(),
        );
        if (cx - cy).abs() > 1e-9 {
            prop_assert_eq!(cx < cy, ex < ey);
        }
    }

    #[test]
    fn dephasing_dilation_stays_pure_and_loses_coherence(seed in any::<u64>(), d in 2usize..=4, rate in 0.05f64..3.0) {
        let psi = random_pure_with(&mut seeded_rng(seed), &[d]);
        let channel = ChannelSpec::dephasing(rate);
        let mut last = f64::INFINITY;
        for k in 0..8 {
            let joint = dilate_dephasing(&psi.density(), &channel, 0.3 * k as f64).unwrap();
            prop_assert!((global_purity(&joint) - 1.0).abs() <= 1e-10);
            let c = coherence(&joint.reduced(&[0]).unwrap(), None).unwrap();
            prop_assert!(c <= last + 1e-10);
            last = c;
        }
    }

    #[test]
    fn rendered_numbers_round_trip(x in prop::num::f64::NORMAL) {
        let parsed: f64 = fmt_num(x).parse().unwrap();
        prop_assert_eq!(parsed, round_sig(x));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn classical_correlation_grows_with_restarts(seed in any::<u64>()) {
        let rho = mixed(seed, &[2, 2]);
        let few = OptimizerConfig { restarts: 2, ..OptimizerConfig::with_seed(seed) };
        let many = OptimizerConfig { restarts: 8, ..OptimizerConfig::with_seed(seed) };
        let a = classical_correlation(&rho, &Cut::first(), Side::Second, &few).unwrap().value;
        let b = classical_correlation(&rho, &Cut::first(), Side::Second, &many).unwrap().value;
        prop_assert!(b >= a - 1e-12);
    }
}
