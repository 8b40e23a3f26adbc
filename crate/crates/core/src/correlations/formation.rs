//! Variational entanglement of formation.
//!
//! Every ensemble of `m` members for `ρ = Σ_i λ_i |v_i><v_i|` has the form
//! `|ψ̃_j> = Σ_i U_ji √λ_i |v_i>` with `U` an `m × r` isometry. The search
//! starts from a Haar-random isometry and repeatedly mixes pairs of members
//! with a 2×2 unitary `exp([[0, -z], [z̄, 0]])`. Each pair takes one
//! safeguarded Newton step in `z`, or a simplex search when the local model is
//! not convex; only the two affected members are re-evaluated.

use num_complex::Complex64;

use super::entanglement::entanglement_entropy;
use super::optimize::{multistart, LocalMin, NelderMead, OptResult, OptimizerConfig};
use crate::error::{CcrError, Result};
use crate::qstate::linalg::{c, eigvalsh, herm_eig_trusted, max_abs_diff, CMatrix};
use crate::qstate::random::{haar_unitary_with, StateRng};
use crate::qstate::{Cut, DensityMatrix};

/// Largest total dimension accepted by the variational search.
pub const MAX_FORMATION_DIM: usize = 16;

const RANK_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 400;

fn xlogx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.log2()
    } else {
        0.0
    }
}

/// Coefficient matrix of a member with the smaller factor as rows.
fn coefficients(psi: &[Complex64], da: usize, db: usize) -> CMatrix {
    if da <= db {
        CMatrix::from_fn(da, db, |a, b| psi[a * db + b])
    } else {
        CMatrix::from_fn(db, da, |b, a| psi[a * db + b])
    }
}

/// `p · S(Tr_B |ψ><ψ| / p)` for an unnormalized member `ψ̃` with `p = <ψ̃|ψ̃>`.
fn weighted_entropy(psi: &[Complex64], da: usize, db: usize) -> f64 {
    let m = coefficients(psi, da, db);
    gram_term(&(&m * m.adjoint()))
}

/// Member `j` rotated with member `k` by `[[cos θ, -e^{iφ} sin θ], [e^{-iφ} sin θ, cos θ]]`.
fn mixed_pair(a: &[Complex64], b: &[Complex64], theta: f64, phi: f64) -> (Vec<Complex64>, Vec<Complex64>) {
    let (s, co) = theta.sin_cos();
    let e = Complex64::from_polar(1.0, phi);
    let na = a.iter().zip(b).map(|(x, y)| x * co - e * s * y).collect();
    let nb = a.iter().zip(b).map(|(x, y)| e.conj() * s * x + y * co).collect();
    (na, nb)
}

/// `-Σ μ log μ + p log p` for the reduced matrix `g` of an unnormalized member.
fn gram_term(g: &CMatrix) -> f64 {
    let n = g.nrows();
    let p: f64 = (0..n).map(|i| g[(i, i)].re).sum();
    if p <= 0.0 {
        return 0.0;
    }
    xlogx(p) - eigvalsh(g).into_iter().map(xlogx).sum::<f64>()
}

/// Same as [`gram_term`] for a 2×2 matrix given by its diagonal and lower entry.
fn gram_term2(g00: f64, g11: f64, g10: Complex64) -> f64 {
    let p = g00 + g11;
    if p <= 0.0 {
        return 0.0;
    }
    let half_gap = (0.25 * (g00 - g11) * (g00 - g11) + g10.norm_sqr()).sqrt();
    xlogx(p) - xlogx(0.5 * p + half_gap) - xlogx(0.5 * p - half_gap)
}

/// Objective restricted to one pair of members: the rotated reduced matrices
/// are `G_a = c² G_j + s² G_k - cs(e^{-iφ} X + e^{iφ} X†)` and
/// `G_b = G_j + G_k - G_a`, with `X = M_j M_k†`.
struct PairForm<'a> {
    gj: &'a CMatrix,
    gk: &'a CMatrix,
    x: CMatrix,
}

impl PairForm<'_> {
    fn rotated(&self, theta: f64, phi: f64) -> (CMatrix, CMatrix) {
        let (s, co) = theta.sin_cos();
        let e = Complex64::from_polar(1.0, phi);
        let cross = (&self.x * e.conj() + self.x.adjoint() * e) * c(co * s, 0.0);
        let ga = self.gj * c(co * co, 0.0) + self.gk * c(s * s, 0.0) - cross;
        let gb = self.gj + self.gk - &ga;
        (ga, gb)
    }

    fn value(&self, theta: f64, phi: f64) -> f64 {
        if self.gj.nrows() == 2 {
            let (s, co) = theta.sin_cos();
            let e = Complex64::from_polar(1.0, phi);
            let cs = co * s;
            let entry = |r: usize, q: usize| {
                let cross = (self.x[(r, q)] * e.conj() + self.x[(q, r)].conj() * e) * cs;
                let a = self.gj[(r, q)] * (co * co) + self.gk[(r, q)] * (s * s) - cross;
                (a, self.gj[(r, q)] + self.gk[(r, q)] - a)
            };
            let (a00, b00) = entry(0, 0);
            let (a11, b11) = entry(1, 1);
            let (a10, b10) = entry(1, 0);
            return gram_term2(a00.re, a11.re, a10) + gram_term2(b00.re, b11.re, b10);
        }
        let (ga, gb) = self.rotated(theta, phi);
        gram_term(&ga) + gram_term(&gb)
    }
}

/// One safeguarded Newton step from the origin using central differences.
/// Returns `None` when the local model is not convex or the step fails to
/// improve on `f0`; predicted gains below `negligible` leave the pair as is.
fn newton_step(f: &impl Fn(&[f64]) -> f64, f0: f64, negligible: f64) -> Option<LocalMin> {
    const H: f64 = 1e-4;
    let fxp = f(&[H, 0.0]);
    let fxm = f(&[-H, 0.0]);
    let fyp = f(&[0.0, H]);
    let fym = f(&[0.0, -H]);
    let fxy = f(&[H, H]);
    let g = [(fxp - fxm) / (2.0 * H), (fyp - fym) / (2.0 * H)];
    let hxx = (fxp - 2.0 * f0 + fxm) / (H * H);
    let hyy = (fyp - 2.0 * f0 + fym) / (H * H);
    let hxy = (fxy - fxp - fyp + f0) / (H * H);
    let det = hxx * hyy - hxy * hxy;
    if !(hxx > 0.0 && det > 0.0) {
        // flat or concave directions: stay put only if the slope is negligible
        if g[0] * g[0] + g[1] * g[1] < negligible {
            return Some(LocalMin {
                value: f0,
                point: vec![0.0, 0.0],
                converged: true,
            });
        }
        return None;
    }
    let mut step = [-(hyy * g[0] - hxy * g[1]) / det, -(hxx * g[1] - hxy * g[0]) / det];
    let predicted = -0.5 * (g[0] * step[0] + g[1] * step[1]);
    if predicted < negligible {
        // already at the pair optimum
        return Some(LocalMin {
            value: f0,
            point: vec![0.0, 0.0],
            converged: true,
        });
    }
    let norm = step[0].hypot(step[1]);
    if norm > 0.5 {
        step = [step[0] * 0.5 / norm, step[1] * 0.5 / norm];
    }
    for _ in 0..4 {
        let v = f(&step);
        if v < f0 {
            return Some(LocalMin {
                value: v,
                point: step.to_vec(),
                converged: true,
            });
        }
        step = [0.5 * step[0], 0.5 * step[1]];
    }
    None
}

struct Search {
    da: usize,
    db: usize,
    /// `√λ_i |v_i>` as columns.
    weighted: CMatrix,
    members: usize,
}

impl Search {
    fn new(rho: &DensityMatrix, members: Option<usize>) -> Self {
        let eig = herm_eig_trusted(rho.matrix());
        let rank = eig.values.iter().filter(|&&l| l > RANK_TOL).count().max(1);
        let d = rho.dim();
        let weighted = CMatrix::from_fn(d, rank, |r, i| eig.vectors[(r, i)] * eig.values[i].max(0.0).sqrt());
        // an ensemble cannot have fewer members than the rank
        let members = members.unwrap_or(rank * rank).max(rank);
        Search {
            da: rho.dims()[0],
            db: rho.dims()[1],
            weighted,
            members,
        }
    }

    fn rank(&self) -> usize {
        self.weighted.ncols()
    }

    fn run(&self, rng: &mut StateRng, cfg: &OptimizerConfig) -> LocalMin {
        let (m, r) = (self.members, self.rank());
        let haar = haar_unitary_with(rng, m);
        let mut iso: CMatrix = haar.columns(0, r).into_owned();
        let mut states: Vec<Vec<Complex64>> = (0..m)
            .map(|j| {
                (0..self.weighted.nrows())
                    .map(|row| (0..r).map(|i| iso[(j, i)] * self.weighted[(row, i)]).sum())
                    .collect()
            })
            .collect();
        let mut coeffs: Vec<CMatrix> = states.iter().map(|s| coefficients(s, self.da, self.db)).collect();
        let mut grams: Vec<CMatrix> = coeffs.iter().map(|x| x * x.adjoint()).collect();
        let mut terms: Vec<f64> = grams.iter().map(gram_term).collect();
        let mut total: f64 = terms.iter().sum();
        let mut converged = false;
        let mut last_gain = f64::INFINITY;
        for _ in 0..MAX_SWEEPS.min(cfg.max_iterations) {
            let before = total;
            // pair searches only need to resolve gains well below the last sweep's
            let nm = NelderMead {
                step: 0.4,
                max_iterations: cfg.max_iterations.min(200),
                tolerance: (1e-3 * last_gain).clamp(1e-2 * cfg.tolerance, 1e-6),
            };
            for j in 0..m {
                for k in j + 1..m {
                    let form = PairForm {
                        gj: &grams[j],
                        gk: &grams[k],
                        x: &coeffs[j] * coeffs[k].adjoint(),
                    };
                    let base = terms[j] + terms[k];
                    let f = |x: &[f64]| form.value(x[0].hypot(x[1]), x[1].atan2(x[0]));
                    let best = match newton_step(&f, base, 1e-2 * cfg.tolerance) {
                        Some(b) => b,
                        None => nm.minimize(f, &[0.0, 0.0]),
                    };
                    if best.value >= base - 0.1 * cfg.tolerance {
                        continue;
                    }
                    let (theta, phi) = (best.point[0].hypot(best.point[1]), best.point[1].atan2(best.point[0]));
                    let (a, b) = mixed_pair(&states[j], &states[k], theta, phi);
                    for (idx, v) in [(j, a), (k, b)] {
                        coeffs[idx] = coefficients(&v, self.da, self.db);
                        grams[idx] = &coeffs[idx] * coeffs[idx].adjoint();
                        terms[idx] = gram_term(&grams[idx]);
                        states[idx] = v;
                    }
                    let row = |i: usize| iso.row(i).iter().copied().collect::<Vec<_>>();
                    let (ra, rb) = mixed_pair(&row(j), &row(k), theta, phi);
                    for i in 0..r {
                        iso[(j, i)] = ra[i];
                        iso[(k, i)] = rb[i];
                    }
                }
            }
            total = terms.iter().sum();
            last_gain = before - total;
            if last_gain <= cfg.tolerance {
                converged = true;
                break;
            }
        }
        let point = (0..m)
            .flat_map(|j| (0..r).map(move |i| (j, i)))
            .flat_map(|(j, i)| [iso[(j, i)].re, iso[(j, i)].im])
            .collect();
        LocalMin {
            value: total.max(0.0),
            point,
            converged,
        }
    }
}

/// Entanglement of formation across `cut`, as the best ensemble average of
/// the entanglement entropy found by a multistart search. Pure inputs are
/// evaluated directly. `argument` holds the optimal isometry `U` (row-major,
/// interleaved real and imaginary parts).
pub fn entanglement_of_formation(rho: &DensityMatrix, cut: &Cut, cfg: &OptimizerConfig) -> Result<OptResult> {
    cfg.validate()?;
    if rho.dim() > MAX_FORMATION_DIM {
        return Err(CcrError::DimTooLarge {
            dim: rho.dim(),
            limit: MAX_FORMATION_DIM,
        });
    }
    let bip = rho.bipartite(cut)?;
    let search = Search::new(&bip, cfg.ensemble_size);
    if search.rank() == 1 {
        let psi = bip.as_pure(1e-9)?;
        let mut out = OptResult::exact(entanglement_entropy(&psi, &Cut::first())?);
        out.argument = vec![1.0, 0.0];
        return Ok(out);
    }
    Ok(multistart(cfg, |rng| search.run(rng, cfg)))
}

/// Ensemble average `Σ_j p_j S(Tr_B ψ_j)` of an explicit isometry, used to
/// re-evaluate an optimizer argument.
pub fn ensemble_average(rho: &DensityMatrix, cut: &Cut, isometry: &CMatrix) -> Result<f64> {
    let bip = rho.bipartite(cut)?;
    let search = Search::new(&bip, Some(isometry.nrows()));
    if isometry.ncols() != search.rank() {
        return Err(CcrError::DimMismatch {
            expected: search.rank(),
            found: isometry.ncols(),
        });
    }
    let gram = isometry.adjoint() * isometry;
    let defect = max_abs_diff(&gram, &CMatrix::identity(search.rank(), search.rank()));
    if defect > 1e-9 {
        return Err(CcrError::InvalidArgument(format!("isometry defect {defect:.3e}")));
    }
    let d = search.weighted.nrows();
    Ok((0..isometry.nrows())
        .map(|j| {
            let s: Vec<Complex64> = (0..d)
                .map(|row| (0..search.rank()).map(|i| isometry[(j, i)] * search.weighted[(row, i)]).sum())
                .collect();
            weighted_entropy(&s, search.da, search.db)
        })
        .sum())
}

/// Rebuilds the isometry stored in [`OptResult::argument`].
pub fn isometry_from_argument(argument: &[f64], rank: usize) -> Result<CMatrix> {
    if rank == 0 || argument.len() % (2 * rank) != 0 {
        return Err(CcrError::InvalidArgument(format!(
            "{} parameters do not describe an isometry with {rank} columns",
            argument.len()
        )));
    }
    let rows = argument.len() / (2 * rank);
    Ok(CMatrix::from_fn(rows, rank, |j, i| {
        let k = 2 * (j * rank + i);
        c(argument[k], argument[k + 1])
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlations::entanglement::{entanglement_of_formation_two_qubit, formation_from_concurrence};
    use crate::qstate::linalg::{kron, ZERO};
    use crate::qstate::random::{haar_unitary, random_mixed_with, random_pure, random_pure_with, seeded_rng};
    use crate::qstate::{Ensemble, PureState};

    fn werner(p: f64) -> DensityMatrix {
        let phi = PureState::from_amplitudes(vec![2, 2], &[c(1.0, 0.0), ZERO, ZERO, c(1.0, 0.0)])
            .unwrap()
            .density();
        let m = phi.matrix() * c(p, 0.0) + CMatrix::identity(4, 4) * c((1.0 - p) / 4.0, 0.0);
        DensityMatrix::new(vec![2, 2], m).unwrap()
    }

    fn cfg(seed: u64) -> OptimizerConfig {
        OptimizerConfig::with_seed(seed)
    }

    #[test]
    fn weighted_entropy_matches_normalized_entropy() {
        let psi = random_pure(&[2, 3], 4);
        let scaled: Vec<Complex64> = psi.amplitudes().iter().map(|z| z * 0.5).collect();
        let direct = entanglement_entropy(&psi, &Cut::first()).unwrap();
        assert!((weighted_entropy(&scaled, 2, 3) - 0.25 * direct).abs() < 1e-12);
        assert!((weighted_entropy(&scaled, 3, 2) - 0.25 * entanglement_entropy(
            &PureState::normalized(vec![3, 2], psi.amplitudes().clone()),
            &Cut::first()
        )
        .unwrap())
        .abs()
            < 1e-12);
        let psi = random_pure(&[3, 3], 5);
        assert!((weighted_entropy(psi.amplitudes().as_slice(), 3, 3) - entanglement_entropy(&psi, &Cut::first()).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn pure_and_bell_inputs() {
        let psi = random_pure(&[2, 3], 9);
        let r = entanglement_of_formation(&psi.density(), &Cut::first(), &cfg(1)).unwrap();
        assert!((r.value - entanglement_entropy(&psi, &Cut::first()).unwrap()).abs() < 1e-9);
        assert!(r.converged);
        let bell = PureState::from_amplitudes(vec![2, 2], &[c(1.0, 0.0), ZERO, ZERO, c(1.0, 0.0)]).unwrap();
        let r = entanglement_of_formation(&bell.density(), &Cut::first(), &cfg(1)).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn werner_half_matches_closed_form() {
        let rho = werner(0.5);
        let exact = formation_from_concurrence(0.25);
        let r = entanglement_of_formation(&rho, &Cut::first(), &cfg(7)).unwrap();
        assert!((r.value - exact).abs() < 2e-3, "{} vs {exact}", r.value);
        assert!(r.value >= exact - 1e-9);
        let iso = isometry_from_argument(&r.argument, 4).unwrap();
        assert!((ensemble_average(&rho, &Cut::first(), &iso).unwrap() - r.value).abs() < 1e-9);
    }

    #[test]
    fn random_two_qubit_states_track_closed_form() {
        let mut rng = seeded_rng(31);
        for k in 0..6 {
            let rho = random_mixed_with(&mut rng, &[2, 2], 2 + k % 3);
            let exact = entanglement_of_formation_two_qubit(&rho).unwrap();
            let r = entanglement_of_formation(&rho, &Cut::first(), &cfg(k as u64)).unwrap();
            assert!(r.value >= exact - 1e-9, "variational below the minimum");
            assert!((r.value - exact).abs() < 2e-3, "state {k}: {} vs {exact}", r.value);
        }
    }

    #[test]
    fn separable_mixtures_have_no_formation_cost() {
        let mut rng = seeded_rng(5);
        for _ in 0..3 {
            let members: Vec<PureState> = (0..3)
                .map(|_| random_pure_with(&mut rng, &[2]).tensor(&random_pure_with(&mut rng, &[2])))
                .collect();
            let rho = Ensemble::from_pure(vec![0.5, 0.3, 0.2], &members).unwrap().state();
            let r = entanglement_of_formation(&rho, &Cut::first(), &cfg(2)).unwrap();
            assert!(r.value < 2e-3, "{}", r.value);
        }
    }

    #[test]
    fn local_unitaries_and_restart_monotonicity() {
        let rho = random_mixed_with(&mut seeded_rng(44), &[2, 2], 2);
        let u = kron(&haar_unitary(2, 1), &haar_unitary(2, 2));
        let moved = rho.conjugated(&u).unwrap();
        let a = entanglement_of_formation(&rho, &Cut::first(), &cfg(3)).unwrap();
        let b = entanglement_of_formation(&moved, &Cut::first(), &cfg(3)).unwrap();
        assert!((a.value - b.value).abs() < 1e-6);

        let mut prev = f64::INFINITY;
        for restarts in 1..=4 {
            let c = OptimizerConfig {
                restarts,
                ..cfg(11)
            };
            let v = entanglement_of_formation(&rho, &Cut::first(), &c).unwrap().value;
            assert!(v <= prev + 1e-12);
            prev = v;
        }
    }

    #[test]
    fn size_limits() {
        let big = DensityMatrix::maximally_mixed(vec![3, 6]).unwrap();
        assert!(matches!(
            entanglement_of_formation(&big, &Cut::first(), &cfg(0)),
            Err(CcrError::DimTooLarge { .. })
        ));
        let bad = OptimizerConfig {
            restarts: 0,
            ..cfg(0)
        };
        assert!(entanglement_of_formation(&werner(0.5), &Cut::first(), &bad).is_err());
    }
}
