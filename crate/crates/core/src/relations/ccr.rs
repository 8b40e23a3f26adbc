use super::{term, CcrReport, InputDigest, OptimizerNote, RelationId, SideCheck};
use crate::correlations::{jaeger_measure, koashi_winter_terms, OptimizerConfig};
use crate::error::Result;
use crate::measures::{
    coherence, conditional_entropy, conditional_information, gy_predictability, gy_visibility, irreality,
    linear_entropy, marginals, mutual_information, predictability, reality, shannon_entropy,
    state_information, von_neumann_entropy,
};
use crate::qstate::linalg::max_abs_diff;
use crate::qstate::{purify_quantum_classical, quantum_classical_state, Cut, DensityMatrix, MeasurementBasis, PureState};

fn log2(d: usize) -> f64 {
    (d as f64).log2()
}

fn basis_tag(basis: Option<&MeasurementBasis>) -> InputDigest {
    match basis {
        None => InputDigest::default().tag("computational"),
        Some(b) => InputDigest::default()
            .tag("basis")
            .values(b.vectors().iter().flat_map(|z| [z.re, z.im])),
    }
}

/// Coherence, predictability and entropy of the reduced state of party A.
pub fn ccr_pure(psi: &PureState, cut: &Cut, basis_a: Option<&MeasurementBasis>) -> Result<CcrReport> {
    let (a, _) = cut.resolve(psi.dims().len())?;
    let rho_a = psi.reduced(&a)?;
    let terms = vec![
        term("C_re(A)", coherence(&rho_a, basis_a)?),
        term("P_vn(A)", predictability(&rho_a, basis_a)?),
        term("S_vn(A)", von_neumann_entropy(&rho_a)),
    ];
    let digest = basis_tag(basis_a).tag("pure").pure(psi).dims(cut.party_a()).finish();
    Ok(CcrReport::new(RelationId::Pure, terms, log2(rho_a.dim()), digest))
}

/// Reality plus coherence of the whole state; also checks that coherence and
/// irreality coincide and that reality splits into predictability and entropy.
pub fn ccr_reality(rho: &DensityMatrix, basis: Option<&MeasurementBasis>) -> Result<CcrReport> {
    let re = reality(rho, basis)?;
    let c = coherence(rho, basis)?;
    let p = predictability(rho, basis)?;
    let s = von_neumann_entropy(rho);
    let terms = vec![term("reality", re), term("C_re", c)];
    let digest = basis_tag(basis).tag("reality").density(rho).finish();
    let mut report = CcrReport::new(RelationId::Reality, terms, log2(rho.dim()), digest);
    report.checks = vec![
        SideCheck::new("reality = P_vn + S_vn", re, p + s),
        SideCheck::new("C_re = irreality", c, irreality(rho, basis)?),
    ];
    Ok(report)
}

/// Entanglement of formation with the second party, classical correlation
/// with the third, and the local predictability and coherence of the first
/// factor of a tripartite pure state. `swap` exchanges the roles of the
/// second and third parties.
pub fn ccr_koashi(psi: &PureState, cfg: &OptimizerConfig, swap: bool) -> Result<CcrReport> {
    let state = if swap && psi.dims().len() == 3 {
        psi.permuted(&[0, 2, 1])?
    } else {
        psi.clone()
    };
    let k = koashi_winter_terms(&state, cfg)?;
    let rho_a = state.reduced(&[0])?;
    let (ef_name, j_name) = if swap { ("E_f(AE)", "J_{A|B}") } else { ("E_f(AB)", "J_{A|E}") };
    let terms = vec![
        term(ef_name, k.formation.value),
        term(j_name, k.classical.value),
        term("P_vn(A)", predictability(&rho_a, None)?),
        term("C_re(A)", coherence(&rho_a, None)?),
    ];
    let digest = InputDigest::default()
        .tag(if swap { "koashi-swap" } else { "koashi" })
        .pure(psi)
        .optimizer(cfg)
        .finish();
    let mut report = CcrReport::new(RelationId::Koashi, terms, log2(rho_a.dim()), digest);
    report.checks = vec![SideCheck::new(
        &format!("S_vn(A) = {ef_name} + {j_name}"),
        k.entropy_a,
        k.formation.value + k.classical.value,
    )];
    if k.formation.restarts > 0 {
        report.optimizer.push(OptimizerNote::from_result(ef_name, &k.formation));
    }
    report.optimizer.push(OptimizerNote::from_result(j_name, &k.classical));
    Ok(report)
}

/// Jaeger measure, linear entropy and the Greenberger-Yasin local terms of a
/// two-qubit state.
pub fn ccr_tessier(rho: &DensityMatrix) -> Result<CcrReport> {
    let jaeger = jaeger_measure(rho)?;
    let (ra, rb) = marginals(rho, &Cut::first())?;
    let local = |r: &DensityMatrix| -> Result<f64> {
        let v = gy_visibility(r)?;
        let p = gy_predictability(r)?;
        Ok(0.5 * (v * v + p * p))
    };
    let terms = vec![
        term("Tr(rho rho~)", jaeger),
        term("S_l(AB)", linear_entropy(rho)),
        term("(V_A^2 + P_A^2)/2", local(&ra)?),
        term("(V_B^2 + P_B^2)/2", local(&rb)?),
    ];
    let digest = InputDigest::default().tag("tessier").density(rho).finish();
    Ok(CcrReport::new(RelationId::Tessier, terms, 1.0, digest))
}

/// Reports for `Σ_j p_j ρ_{A|j} ⊗ |j><j|`: the global relation first (with the
/// entropy, predictability and coherence decompositions and the purification
/// round trip as side checks), then one report per conditional state.
pub fn ccr_quantum_classical(weights: &[f64], conditionals: &[DensityMatrix]) -> Result<Vec<CcrReport>> {
    let rho = quantum_classical_state(weights, conditionals)?;
    let (da, db) = (rho.dims()[0], rho.dims()[1]);
    let digest = InputDigest::default()
        .tag("quantum-classical")
        .values(weights.iter().copied())
        .values(conditionals.iter().flat_map(|r| r.matrix().iter().flat_map(|z| [z.re, z.im]).collect::<Vec<_>>()))
        .dims(&[da, db])
        .finish();

    let p_ab = predictability(&rho, None)?;
    let c_ab = coherence(&rho, None)?;
    let s_ab = von_neumann_entropy(&rho);
    let mut global = CcrReport::new(
        RelationId::QuantumClassical,
        vec![term("P_vn(AB)", p_ab), term("C_re(AB)", c_ab), term("S_vn(AB)", s_ab)],
        log2(da * db),
        digest.clone(),
    );
    global.scope = Some("AB".into());

    let h = shannon_entropy(weights);
    let mut members = Vec::with_capacity(weights.len());
    let (mut s_avg, mut p_avg, mut c_avg, mut diag_avg, mut gap_avg) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (j, (w, cond)) in weights.iter().zip(conditionals).enumerate() {
        let p = predictability(cond, None)?;
        let c = coherence(cond, None)?;
        let s = von_neumann_entropy(cond);
        s_avg += w * s;
        p_avg += w * p;
        c_avg += w * c;
        diag_avg += w * (log2(da) - p);
        gap_avg += w * (p + c + s - log2(da));
        let mut r = CcrReport::new(
            RelationId::QuantumClassical,
            vec![term("P_vn(A|j)", p), term("S_vn(A|j)", s), term("C_re(A|j)", c)],
            log2(da),
            digest.clone(),
        );
        r.scope = Some(format!("A|{j}"));
        members.push(r);
    }
    let diag_ab = log2(da * db) - p_ab;
    let psi = purify_quantum_classical(weights, conditionals)?;
    let back = psi.reduced(&[0, 1])?;
    global.checks = vec![
        SideCheck::new("S_vn(AB) = H(p) + sum p_j S_vn(A|j)", s_ab, h + s_avg),
        SideCheck::new("S_vn(AB_diag) = H(p) + sum p_j S_vn(A|j _diag)", diag_ab, h + diag_avg),
        SideCheck::new("P_vn(AB) = log2 d_B - H(p) + sum p_j P_vn(A|j)", p_ab, log2(db) - h + p_avg),
        SideCheck::new("C_re(AB) = sum p_j C_re(A|j)", c_ab, c_avg),
        SideCheck::new("sum p_j (P_vn + C_re + S_vn - log2 d_A)(A|j) = 0", gap_avg, 0.0),
        SideCheck::new("Tr_E purification = rho_AB", max_abs_diff(back.matrix(), rho.matrix()), 0.0),
    ];
    let mut out = vec![global];
    out.extend(members);
    Ok(out)
}

/// Mutual information, joint entropy and both parties' local predictability
/// and coherence; also checks the split of the state information.
pub fn ccr_mutual_info(rho: &DensityMatrix, cut: &Cut) -> Result<CcrReport> {
    let (ra, rb) = marginals(rho, cut)?;
    let i_ab = mutual_information(rho, cut)?;
    let terms = vec![
        term("I_{A:B}", i_ab),
        term("S_vn(AB)", von_neumann_entropy(rho)),
        term("P_vn(A)", predictability(&ra, None)?),
        term("C_re(A)", coherence(&ra, None)?),
        term("P_vn(B)", predictability(&rb, None)?),
        term("C_re(B)", coherence(&rb, None)?),
    ];
    let digest = InputDigest::default().tag("mutual-info").density(rho).dims(cut.party_a()).finish();
    let mut report = CcrReport::new(RelationId::MutualInfo, terms, log2(rho.dim()), digest);
    report.checks = vec![SideCheck::new(
        "I(AB) = I(A) + I(B) + I_{A:B}",
        state_information(rho),
        state_information(&ra) + state_information(&rb) + i_ab,
    )];
    Ok(report)
}

/// Mutual information, conditional entropy and party A's local
/// predictability and coherence; also checks the conditional-information form
/// and the decomposition of A's reality.
pub fn ccr_conditional(rho: &DensityMatrix, cut: &Cut) -> Result<CcrReport> {
    let (ra, _) = marginals(rho, cut)?;
    let i_ab = mutual_information(rho, cut)?;
    let s_cond = conditional_entropy(rho, cut)?;
    let p = predictability(&ra, None)?;
    let c = coherence(&ra, None)?;
    let terms = vec![term("I_{A:B}", i_ab), term("S_{A|B}", s_cond), term("P_vn(A)", p), term("C_re(A)", c)];
    let digest = InputDigest::default().tag("conditional").density(rho).dims(cut.party_a()).finish();
    let mut report = CcrReport::new(RelationId::Conditional, terms, log2(ra.dim()), digest);
    report.checks = vec![
        SideCheck::new("I_{A|B} = I_{A:B} + P_vn(A) + C_re(A)", conditional_information(rho, cut)?, i_ab + p + c),
        SideCheck::new("reality(A) = I_{A:B} + S_{A|B} + P_vn(A)", reality(&ra, None)?, i_ab + s_cond + p),
    ];
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlations::MeasurementClass;
    use crate::qstate::linalg::{c, CMatrix, ZERO};
    use crate::qstate::random::{random_basis_with, random_mixed_with, random_pure, seeded_rng};
    use crate::qstate::qc::random_quantum_classical_with;

    const H_QUARTER: f64 = 0.811_278_124_459_132_8;

    fn bell() -> PureState {
        PureState::from_amplitudes(vec![2, 2], &[c(1.0, 0.0), ZERO, ZERO, c(1.0, 0.0)]).unwrap()
    }

    fn ket(dims: Vec<usize>, digits: &[usize]) -> PureState {
        PureState::basis(dims, digits).unwrap()
    }

    fn values(r: &CcrReport) -> Vec<f64> {
        r.terms.iter().map(|t| t.value).collect()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn pure_examples() {
        let r = ccr_pure(&ket(vec![2, 2], &[0, 0]), &Cut::first(), None).unwrap();
        assert!(close(&values(&r), &[0.0, 1.0, 0.0], 1e-12) && r.residual < 1e-12);
        let r = ccr_pure(&bell(), &Cut::first(), None).unwrap();
        assert!(close(&values(&r), &[0.0, 0.0, 1.0], 1e-12));
        let r = ccr_pure(&random_pure(&[3, 3], 2), &Cut::first(), None).unwrap();
        assert!(r.residual < 1e-10);
        assert!((r.rhs - 3f64.log2()).abs() < 1e-15);
        assert!(r.terms.iter().all(|t| t.value >= -1e-10));
    }

    #[test]
    fn reality_examples() {
        let plus = PureState::from_amplitudes(vec![2], &[c(1.0, 0.0), c(1.0, 0.0)]).unwrap().density();
        let r = ccr_reality(&plus, None).unwrap();
        assert!(close(&values(&r), &[0.0, 1.0], 1e-12));
        let r = ccr_reality(&DensityMatrix::maximally_mixed(vec![2]).unwrap(), None).unwrap();
        assert!(close(&values(&r), &[1.0, 0.0], 1e-12));
        let mut rng = seeded_rng(3);
        for d in 2..=5 {
            let rho = random_mixed_with(&mut rng, &[d], d);
            let b = random_basis_with(&mut rng, d);
            let r = ccr_reality(&rho, Some(&b)).unwrap();
            assert!(r.worst_residual() < 1e-10);
            assert!(r.checks[1].residual < 1e-12);
        }
    }

    #[test]
    fn koashi_examples() {
        let cfg = OptimizerConfig::with_seed(5);
        let r = ccr_koashi(&ket(vec![2, 2, 2], &[0, 0, 0]), &cfg, false).unwrap();
        assert!(close(&values(&r), &[0.0, 0.0, 1.0, 0.0], 1e-7));

        let mut amps = vec![ZERO; 8];
        amps[0] = c(1.0, 0.0);
        amps[7] = c(1.0, 0.0);
        let ghz = PureState::from_amplitudes(vec![2, 2, 2], &amps).unwrap();
        let r = ccr_koashi(&ghz, &cfg, false).unwrap();
        assert!(close(&values(&r), &[0.0, 1.0, 0.0, 0.0], 1e-6));
        assert!(r.residual < 1e-4);
        assert_eq!(r.optimizer.len(), 1);
        assert_eq!(r.optimizer[0].measurement, Some(MeasurementClass::Projective));

        let mut amps = vec![ZERO; 8];
        for k in [1, 2, 4] {
            amps[k] = c(1.0, 0.0);
        }
        let w = PureState::from_amplitudes(vec![2, 2, 2], &amps).unwrap();
        for swap in [false, true] {
            let r = ccr_koashi(&w, &cfg, swap).unwrap();
            assert!(r.residual < 1e-3, "{r:?}");
            assert_eq!(r.terms.len(), 4);
        }
        let swapped = ccr_koashi(&random_pure(&[2, 2, 2], 8), &cfg, true).unwrap();
        assert_eq!(swapped.terms[0].name, "E_f(AE)");
        assert!(swapped.residual < 1e-3);
    }

    #[test]
    fn tessier_examples() {
        let r = ccr_tessier(&bell().density()).unwrap();
        assert!(close(&values(&r), &[1.0, 0.0, 0.0, 0.0], 1e-12));
        let r = ccr_tessier(&DensityMatrix::maximally_mixed(vec![2, 2]).unwrap()).unwrap();
        assert!(close(&values(&r), &[0.25, 0.75, 0.0, 0.0], 1e-12));
        let mut rng = seeded_rng(4);
        for rank in 1..=4 {
            let r = ccr_tessier(&random_mixed_with(&mut rng, &[2, 2], rank)).unwrap();
            assert!(r.residual < 1e-12);
        }
        assert!(ccr_tessier(&DensityMatrix::maximally_mixed(vec![3, 3]).unwrap()).is_err());
    }

    #[test]
    fn quantum_classical_examples() {
        let zero = ket(vec![2], &[0]).density();
        let plus = PureState::from_amplitudes(vec![2], &[c(1.0, 0.0), c(1.0, 0.0)]).unwrap().density();
        let reports = ccr_quantum_classical(&[0.5, 0.5], &[zero.clone(), plus]).unwrap();
        assert_eq!(reports.len(), 3);
        for r in &reports {
            assert!(r.worst_residual() < 1e-10, "{r:?}");
        }
        assert!((reports[0].term("C_re(AB)").unwrap() - 0.5).abs() < 1e-12);

        let single = ccr_quantum_classical(&[1.0], &[zero]).unwrap();
        assert!(close(&values(&single[1]), &[1.0, 0.0, 0.0], 1e-12));

        let mut rng = seeded_rng(6);
        for _ in 0..10 {
            let (w, conds) = random_quantum_classical_with(&mut rng, 3, 2);
            for r in ccr_quantum_classical(&w, &conds).unwrap() {
                assert!(r.worst_residual() < 1e-10);
                assert!(r.terms.iter().all(|t| t.value >= -1e-10));
            }
        }
    }

    #[test]
    fn informational_examples() {
        let quarter = DensityMatrix::maximally_mixed(vec![2, 2]).unwrap();
        let r = ccr_mutual_info(&quarter, &Cut::first()).unwrap();
        assert!(close(&values(&r), &[0.0, 2.0, 0.0, 0.0, 0.0, 0.0], 1e-12));
        let r = ccr_mutual_info(&bell().density(), &Cut::first()).unwrap();
        assert!(close(&values(&r), &[2.0, 0.0, 0.0, 0.0, 0.0, 0.0], 1e-12));

        let r = ccr_conditional(&bell().density(), &Cut::first()).unwrap();
        assert!(close(&values(&r), &[2.0, -1.0, 0.0, 0.0], 1e-12));
        assert!(r.worst_residual() < 1e-12);
        let r = ccr_conditional(&quarter, &Cut::first()).unwrap();
        assert!((r.term("S_{A|B}").unwrap() - 1.0).abs() < 1e-12);

        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.75, 0.0), c(0.25, 0.0)]));
        let ra = DensityMatrix::new(vec![2], m).unwrap();
        let product = ra.tensor(&random_mixed_with(&mut seeded_rng(1), &[3], 2));
        let r = ccr_conditional(&product, &Cut::first()).unwrap();
        assert!(r.term("I_{A:B}").unwrap().abs() < 1e-12);
        assert!((r.term("S_{A|B}").unwrap() - H_QUARTER).abs() < 1e-12);

        let mut rng = seeded_rng(2);
        for _ in 0..10 {
            let rho = random_mixed_with(&mut rng, &[3, 3], 5);
            let a = ccr_mutual_info(&rho, &Cut::first()).unwrap();
            let b = ccr_conditional(&rho, &Cut::first()).unwrap();
            assert!(a.worst_residual() < 1e-10 && b.worst_residual() < 1e-10);
            assert!((a.rhs - 9f64.log2()).abs() < 1e-15);
        }
    }

    #[test]
    fn identical_inputs_give_identical_reports() {
        let rho = random_mixed_with(&mut seeded_rng(9), &[2, 3], 3);
        let a = ccr_conditional(&rho, &Cut::first()).unwrap();
        let b = ccr_conditional(&rho.clone(), &Cut::first()).unwrap();
        assert_eq!(a, b);
        let other = ccr_conditional(&rho, &Cut::new(vec![1])).unwrap();
        assert_ne!(a.input_digest, other.input_digest);
        let cfg = OptimizerConfig::with_seed(1);
        let psi = random_pure(&[2, 2, 2], 3);
        assert_eq!(ccr_koashi(&psi, &cfg, false).unwrap(), ccr_koashi(&psi, &cfg, false).unwrap());
    }
}
