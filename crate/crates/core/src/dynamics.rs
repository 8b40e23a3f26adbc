//! Time-dependent experiments built from explicit unitary dilations: a
//! dephasing channel with its environment kept, a three-qubit measurement
//! model, pointer-basis detection and a finite-difference rate check.

use serde::Serialize;

use crate::correlations::{
    classical_correlation, concurrence, entanglement_entropy, formation_from_concurrence, OptimizerConfig, Side,
};
use crate::error::{CcrError, Result};
use crate::measures::{coherence, conditional_information, predictability, von_neumann_entropy};
use crate::qstate::linalg::{c, herm_eig_trusted, psd_sqrt, trace, CMatrix, CVector, ZERO};
use crate::qstate::{Cut, DensityMatrix, MeasurementBasis, PureState};
use crate::relations::ccr_pure;

/// Tolerance on the purity of inputs that must be pure.
pub const PURE_TOL: f64 = 1e-10;
/// Default pointer-basis detection threshold, in bits.
pub const DEFAULT_EPSILON: f64 = 1e-3;
/// Default pointer-basis detection window, in samples.
pub const DEFAULT_WINDOW: usize = 10;
/// Default finite-difference step.
pub const DEFAULT_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelKind {
    Dephasing,
    MeasurementInteraction,
}

/// Coupling to an environment: `rate` is the decay rate of the coherences in
/// `basis` (`None` = computational).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    pub kind: ChannelKind,
    pub rate: f64,
    pub basis: Option<MeasurementBasis>,
}

impl ChannelSpec {
    pub fn dephasing(rate: f64) -> Self {
        ChannelSpec {
            kind: ChannelKind::Dephasing,
            rate,
            basis: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rate >= 0.0) || !self.rate.is_finite() {
            return Err(CcrError::InvalidArgument(format!("rate {} must be finite and >= 0", self.rate)));
        }
        Ok(())
    }
}

/// Sampled quantifiers along a time grid. Every row has one value per key.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub keys: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn new(keys: &[&str]) -> Self {
        Trajectory {
            times: Vec::new(),
            keys: keys.iter().map(|k| k.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, t: f64, row: Vec<f64>) -> Result<()> {
        if row.len() != self.keys.len() {
            return Err(CcrError::DimMismatch {
                expected: self.keys.len(),
                found: row.len(),
            });
        }
        if let Some(&last) = self.times.last() {
            if !(t > last) {
                return Err(CcrError::InvalidArgument(format!("time {t} does not follow {last}")));
            }
        }
        self.times.push(t);
        self.rows.push(row);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn column(&self, key: &str) -> Result<Vec<f64>> {
        let k = self
            .keys
            .iter()
            .position(|x| x == key)
            .ok_or_else(|| CcrError::MissingKey(key.to_string()))?;
        Ok(self.rows.iter().map(|r| r[k]).collect())
    }
}

/// `n` evenly spaced times from `start` to `end` inclusive.
pub fn uniform_grid(start: f64, end: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 || !(end > start) || !start.is_finite() || !end.is_finite() {
        return Err(CcrError::GridTooCoarse(format!(
            "need at least 2 points on a non-empty interval, got {n} on [{start}, {end}]"
        )));
    }
    let h = (end - start) / (n - 1) as f64;
    Ok((0..n).map(|i| if i + 1 == n { end } else { start + h * i as f64 }).collect())
}

fn check_grid(times: &[f64], min: usize) -> Result<()> {
    if times.len() < min {
        return Err(CcrError::GridTooCoarse(format!(
            "{} time points, at least {min} required",
            times.len()
        )));
    }
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(CcrError::InvalidArgument("times must be finite and >= 0".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(CcrError::InvalidArgument("times must be strictly increasing".into()));
    }
    Ok(())
}

/// Environment vectors with Gram matrix `G_kl = r + (1 - r) δ_kl`, the columns
/// of `G^{1/2}`. At `r = 1` they coincide; at `r = 0` they are orthonormal.
fn environment_states(d: usize, r: f64) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |k, l| if k == l { c(1.0, 0.0) } else { c(r, 0.0) });
    psd_sqrt(&g)
}

/// Pure state on `A ⊗ E` whose reduction to A is `rho_a` with coherences in
/// the channel basis scaled by `e^{-γt}`.
pub fn dilate_dephasing(rho_a: &DensityMatrix, channel: &ChannelSpec, t: f64) -> Result<PureState> {
    channel.validate()?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(CcrError::InvalidArgument(format!("time {t} must be finite and >= 0")));
    }
    let psi = rho_a.as_pure(PURE_TOL)?;
    let d = psi.dim();
    let basis = match &channel.basis {
        Some(b) => {
            b.check(rho_a)?;
            b.clone()
        }
        None => MeasurementBasis::computational(d),
    };
    let o = basis.vectors();
    let coeffs = o.adjoint() * psi.amplitudes();
    let env = environment_states(d, (-channel.rate * t).exp());
    let mut amps = CVector::zeros(d * d);
    for k in 0..d {
        for a in 0..d {
            for e in 0..d {
                amps[a * d + e] += coeffs[k] * o[(a, k)] * env[(e, k)];
            }
        }
    }
    PureState::new(vec![d, d], amps)
}

/// Result of [`rate_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateCheck {
    pub trajectory: Trajectory,
    /// Midpoints of consecutive grid times, where the rates are evaluated.
    pub rate_times: Vec<f64>,
    /// Central difference of the coherence over each grid interval.
    pub coherence_rate: Vec<f64>,
    /// Exact time derivative of `S(ρ_A(t)) = E_f(ρ_AE(t))`.
    pub formation_rate: Vec<f64>,
    /// `max |Δ_h C_re + ∂_t E_f|`, limited by the finite-difference truncation error.
    pub max_rate_mismatch: f64,
    /// `max |Δ_h C_re + Δ_h E_f|`, both sides differenced (round-off limited).
    pub max_difference_residual: f64,
    /// `max_t |P_vn(t) - P_vn(t_0)|`.
    pub predictability_drift: f64,
}

fn entropy_rate(rho: &CMatrix, rho_dot: &CMatrix) -> f64 {
    // d/dt S = -Tr(ρ' log₂ ρ); zero eigenvalues carry no weight here
    let eig = herm_eig_trusted(rho);
    let mut acc = 0.0;
    for (i, &l) in eig.values.iter().enumerate() {
        if l > 1e-300 {
            let v = eig.vectors.column(i);
            acc -= (v.adjoint() * rho_dot * v)[(0, 0)].re * l.log2();
        }
    }
    acc
}

/// Evolves a pure system under dephasing on a uniform grid and compares the
/// coherence loss rate with the entanglement gain rate of the dilation.
pub fn rate_check(psi_a: &PureState, channel: &ChannelSpec, times: &[f64]) -> Result<RateCheck> {
    check_grid(times, 3)?;
    let h = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    if times.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(1.0)) {
        return Err(CcrError::InvalidArgument("rate check needs a uniform grid".into()));
    }
    let rho0 = psi_a.density();
    let basis = channel.basis.as_ref();
    let d = rho0.dim();
    // off-diagonal part of ρ₀ in the channel basis, which decays as e^{-γt}
    let o = match basis {
        Some(b) => b.vectors().clone(),
        None => CMatrix::identity(d, d),
    };
    let mut off = o.adjoint() * rho0.matrix() * &o;
    for k in 0..d {
        off[(k, k)] = ZERO;
    }
    let off = &o * off * o.adjoint();

    let rate_at = |t: f64| -> Result<f64> {
        let rho_a = dilate_dephasing(&rho0, channel, t)?.reduced(&[0])?;
        let rho_dot = &off * c(-channel.rate * (-channel.rate * t).exp(), 0.0);
        Ok(entropy_rate(rho_a.matrix(), &rho_dot))
    };

    let mut traj = Trajectory::new(&["C_re", "P_vn", "S_vn", "E_f_AE", "ccr_residual"]);
    for &t in times {
        let joint = dilate_dephasing(&rho0, channel, t)?;
        let rho_a = joint.reduced(&[0])?;
        let report = ccr_pure(&joint, &Cut::first(), basis)?;
        traj.push(
            t,
            vec![
                coherence(&rho_a, basis)?,
                predictability(&rho_a, basis)?,
                von_neumann_entropy(&rho_a),
                entanglement_entropy(&joint, &Cut::first())?,
                report.residual,
            ],
        )?;
    }
    let cre = traj.column("C_re")?;
    let ef = traj.column("E_f_AE")?;
    let p = traj.column("P_vn")?;
    // compact central differences: (x[i+1] - x[i]) / h is second order at the midpoint
    let n = times.len();
    let rate_times: Vec<f64> = (0..n - 1).map(|i| 0.5 * (times[i] + times[i + 1])).collect();
    let coherence_rate: Vec<f64> = (0..n - 1).map(|i| (cre[i + 1] - cre[i]) / h).collect();
    let formation_fd: Vec<f64> = (0..n - 1).map(|i| (ef[i + 1] - ef[i]) / h).collect();
    let formation_rate = rate_times.iter().map(|&t| rate_at(t)).collect::<Result<Vec<f64>>>()?;
    let max_abs_sum = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x + y).abs()).fold(0.0, f64::max);
    Ok(RateCheck {
        max_rate_mismatch: max_abs_sum(&coherence_rate, &formation_rate),
        max_difference_residual: max_abs_sum(&coherence_rate, &formation_fd),
        predictability_drift: p.iter().map(|x| (x - p[0]).abs()).fold(0.0, f64::max),
        rate_times,
        coherence_rate,
        formation_rate,
        trajectory: traj,
    })
}

/// Parameters of the three-qubit measurement model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasurementModel {
    /// Rate at which the environment decoheres the apparatus pointer.
    pub gamma_env: f64,
    /// Rate at which the apparatus pointer states separate; defaults to `gamma_env`.
    pub premeasurement_rate: Option<f64>,
    pub optimizer: OptimizerConfig,
}

impl MeasurementModel {
    pub fn new(gamma_env: f64) -> Self {
        MeasurementModel {
            gamma_env,
            premeasurement_rate: None,
            optimizer: OptimizerConfig::default(),
        }
    }

    fn kappa(&self) -> f64 {
        self.premeasurement_rate.unwrap_or(self.gamma_env)
    }

    /// Global state on system ⊗ apparatus ⊗ environment at time `t`:
    /// `a|000> + b|1>(r₁|0>|0> + s₁|1>(r₂|0> + s₂|1>))`, with
    /// `r₁ = e^{-κt}` and `r₂ = e^{-γt}`.
    pub fn state(&self, system: &PureState, t: f64) -> PureState {
        let amp = system.amplitudes();
        let (a, b) = (amp[0], amp[1]);
        let r1 = (-self.kappa() * t).exp();
        let s1 = (1.0 - r1 * r1).max(0.0).sqrt();
        let r2 = (-self.gamma_env * t).exp();
        let s2 = (1.0 - r2 * r2).max(0.0).sqrt();
        let mut v = CVector::zeros(8);
        v[0] = a;
        v[4] = b * r1;
        v[6] = b * s1 * r2;
        v[7] = b * s1 * s2;
        PureState::normalized(vec![2, 2, 2], v)
    }
}

/// Trajectory keys written by [`measurement_model`], in CSV order.
pub const MEASUREMENT_KEYS: [&str; 7] = ["C_re", "P_vn", "S_vn", "E_f_AE", "J_AA", "I_AA", "ccr_residual"];

/// Runs the measurement model for a pure qubit system and records, per time,
/// the system's coherence, predictability and entropy, the system-environment
/// entanglement of formation, the system-apparatus classical correlation and
/// conditional information, and the pure-state relation residual of the
/// system against everything else.
pub fn measurement_model(system: &DensityMatrix, model: &MeasurementModel, times: &[f64]) -> Result<Trajectory> {
    if system.dim() != 2 {
        return Err(CcrError::NotQubit(system.dim()));
    }
    for rate in [model.gamma_env, model.kappa()] {
        ChannelSpec::dephasing(rate).validate()?;
    }
    model.optimizer.validate()?;
    check_grid(times, 1)?;
    let psi = system.as_pure(PURE_TOL)?;
    let mut traj = Trajectory::new(&MEASUREMENT_KEYS);
    for &t in times {
        let global = model.state(&psi, t);
        let rho_a = global.reduced(&[0])?;
        let rho_aa = global.reduced(&[0, 1])?;
        let rho_ae = global.reduced(&[0, 2])?;
        let j = classical_correlation(&rho_aa, &Cut::first(), Side::Second, &model.optimizer)?.value;
        let report = ccr_pure(&global, &Cut::first(), None)?;
        traj.push(
            t,
            vec![
                coherence(&rho_a, None)?,
                predictability(&rho_a, None)?,
                von_neumann_entropy(&rho_a),
                formation_from_concurrence(concurrence(&rho_ae)?),
                j,
                conditional_information(&rho_aa, &Cut::first())?,
                report.residual,
            ],
        )?;
    }
    Ok(traj)
}

/// Earliest time from which `J_AA` stays within `epsilon` (max - min) up to
/// the end of the trajectory, considering only starts with at least `window`
/// samples remaining.
pub fn pointer_basis_detect(traj: &Trajectory, window: usize, epsilon: f64) -> Result<Option<f64>> {
    let j = traj.column("J_AA")?;
    if window == 0 {
        return Err(CcrError::InvalidArgument("window must be at least 1".into()));
    }
    if j.len() < window {
        return Ok(None);
    }
    // suffix extremes, scanned backwards
    let n = j.len();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut spread = vec![0.0; n];
    for i in (0..n).rev() {
        lo = lo.min(j[i]);
        hi = hi.max(j[i]);
        spread[i] = hi - lo;
    }
    Ok((0..=n - window).find(|&i| spread[i] < epsilon).map(|i| traj.times[i]))
}

/// Purity of the global state, used to check that evolutions stay unitary.
pub fn global_purity(psi: &PureState) -> f64 {
    let rho = psi.density();
    trace(&(rho.matrix() * rho.matrix())).re
}
