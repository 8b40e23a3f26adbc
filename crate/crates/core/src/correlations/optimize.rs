//! Derivative-free multistart minimization.
//!
//! Each restart owns a generator derived from `(seed, restart index)` and runs a
//! Nelder-Mead local search; the reduction over restarts is a min with ties
//! broken by restart index, so results do not depend on thread scheduling.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CcrError, Result};
use crate::qstate::random::{stream_rng, StateRng};

/// Which measurements the classical-correlation search ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MeasurementClass {
    /// Rank-1 orthogonal projectors, one per basis vector of the measured side.
    #[default]
    Projective,
    /// Up to `d²` rank-1 POVM elements obtained from an isometry into a larger space.
    Povm,
}

impl std::fmt::Display for MeasurementClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MeasurementClass::Projective => "projective",
            MeasurementClass::Povm => "povm",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub seed: u64,
    /// Ensemble size for the entanglement-of-formation search; `None` means rank².
    pub ensemble_size: Option<usize>,
    pub measurement: MeasurementClass,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            restarts: 20,
            max_iterations: 4000,
            tolerance: 1e-10,
            seed: 0x5eed,
            ensemble_size: None,
            measurement: MeasurementClass::Projective,
        }
    }
}

impl OptimizerConfig {
    pub fn with_seed(seed: u64) -> Self {
        OptimizerConfig {
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(CcrError::InvalidArgument("restarts must be at least 1".into()));
        }
        if !(self.tolerance > 0.0) || !self.tolerance.is_finite() {
            return Err(CcrError::InvalidArgument(format!("tolerance {} must be positive", self.tolerance)));
        }
        if self.max_iterations == 0 {
            return Err(CcrError::InvalidArgument("max_iterations must be at least 1".into()));
        }
        if self.ensemble_size == Some(0) {
            return Err(CcrError::InvalidArgument("ensemble size must be at least 1".into()));
        }
        Ok(())
    }
}

/// Outcome of a variational search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptResult {
    pub value: f64,
    /// Parameters of the best restart (meaning depends on the quantity).
    pub argument: Vec<f64>,
    /// Best and second-best restarts agree within `10 × tolerance`.
    pub converged: bool,
    /// `max - min` of the restart values.
    pub spread_across_restarts: f64,
    pub restarts: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measurement: Option<MeasurementClass>,
}

impl OptResult {
    /// A value obtained without search (closed forms, trivial cases).
    pub fn exact(value: f64) -> Self {
        OptResult {
            value,
            argument: Vec::new(),
            converged: true,
            spread_across_restarts: 0.0,
            restarts: 0,
            measurement: None,
        }
    }
}

/// Result of one local search.
#[derive(Debug, Clone)]
pub struct LocalMin {
    pub value: f64,
    pub point: Vec<f64>,
    pub converged: bool,
}

/// Nelder-Mead with dimension-adaptive coefficients.
#[derive(Debug, Clone)]
pub struct NelderMead {
    pub step: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl NelderMead {
    pub fn minimize(&self, f: impl Fn(&[f64]) -> f64, start: &[f64]) -> LocalMin {
        let n = start.len();
        if n == 0 {
            return LocalMin {
                value: f(start),
                point: Vec::new(),
                converged: true,
            };
        }
        let nf = n as f64;
        let (alpha, gamma, rho, sigma) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);

        let mut best = start.to_vec();
        let mut best_val = f(start);
        let mut iterations = 0;
        let mut converged = false;
        // restart the simplex around the incumbent until a full run brings no gain
        while iterations < self.max_iterations {
            let mut simplex: Vec<Vec<f64>> = vec![best.clone()];
            for k in 0..n {
                let mut v = best.clone();
                v[k] += self.step;
                simplex.push(v);
            }
            let mut vals: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
            let mut local_converged = false;
            while iterations < self.max_iterations {
                iterations += 1;
                let mut idx: Vec<usize> = (0..=n).collect();
                idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
                simplex = idx.iter().map(|&i| simplex[i].clone()).collect();
                vals = idx.iter().map(|&i| vals[i]).collect();

                let spread = vals[n] - vals[0];
                let size = simplex[1..]
                    .iter()
                    .map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
                    .fold(0.0, f64::max);
                if spread <= self.tolerance && size <= 1e-7_f64.max(self.tolerance.sqrt()) {
                    local_converged = true;
                    break;
                }

                let mut centroid = vec![0.0; n];
                for v in &simplex[..n] {
                    for (c, x) in centroid.iter_mut().zip(v) {
                        *c += x / nf;
                    }
                }
                let along = |t: f64| -> Vec<f64> {
                    centroid
                        .iter()
                        .zip(&simplex[n])
                        .map(|(c, w)| c + t * (c - w))
                        .collect()
                };
                let xr = along(alpha);
                let fr = f(&xr);
                if fr < vals[0] {
                    let xe = along(gamma);
                    let fe = f(&xe);
                    if fe < fr {
                        simplex[n] = xe;
                        vals[n] = fe;
                    } else {
                        simplex[n] = xr;
                        vals[n] = fr;
                    }
                } else if fr < vals[n - 1] {
                    simplex[n] = xr;
                    vals[n] = fr;
                } else {
                    let (xc, fc) = if fr < vals[n] {
                        let xc = along(rho * alpha);
                        let fc = f(&xc);
                        (xc, fc)
                    } else {
                        let xc = along(-rho);
                        let fc = f(&xc);
                        (xc, fc)
                    };
                    if fc < vals[n].min(fr) {
                        simplex[n] = xc;
                        vals[n] = fc;
                    } else {
                        for k in 1..=n {
                            let shrunk: Vec<f64> = simplex[0]
                                .iter()
                                .zip(&simplex[k])
                                .map(|(b, x)| b + sigma * (x - b))
                                .collect();
                            vals[k] = f(&shrunk);
                            simplex[k] = shrunk;
                        }
                    }
                }
            }
            let k = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);
            let gained = best_val - vals[k];
            if vals[k] < best_val {
                best_val = vals[k];
                best = simplex[k].clone();
            }
            if local_converged && gained <= self.tolerance {
                converged = true;
                break;
            }
        }
        LocalMin {
            value: best_val,
            point: best,
            converged,
        }
    }
}

/// Runs `local` once per restart (in parallel) and reduces deterministically.
/// `local` receives the restart's own generator.
pub fn multistart<F>(cfg: &OptimizerConfig, local: F) -> OptResult
where
    F: Fn(&mut StateRng) -> LocalMin + Sync,
{
    multistart_indexed(cfg, |_, rng| local(rng))
}

/// Like [`multistart`], but `local` also sees the restart index.
pub fn multistart_indexed<F>(cfg: &OptimizerConfig, local: F) -> OptResult
where
    F: Fn(usize, &mut StateRng) -> LocalMin + Sync,
{
    let runs: Vec<LocalMin> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(cfg.seed, r as u64);
            local(r, &mut rng)
        })
        .collect();
    reduce_restarts(cfg, runs)
}

pub(crate) fn reduce_restarts(cfg: &OptimizerConfig, runs: Vec<LocalMin>) -> OptResult {
    let mut order: Vec<usize> = (0..runs.len()).collect();
    order.sort_by(|&a, &b| runs[a].value.total_cmp(&runs[b].value).then(a.cmp(&b)));
    let best = &runs[order[0]];
    let worst = runs[order[order.len() - 1]].value;
    let converged = match order.get(1) {
        Some(&second) => runs[second].value - best.value <= 10.0 * cfg.tolerance,
        None => best.converged,
    };
    OptResult {
        value: best.value,
        argument: best.point.clone(),
        converged,
        spread_across_restarts: worst - best.value,
        restarts: runs.len(),
        measurement: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    #[test]
    fn nelder_mead_finds_rosenbrock_minimum() {
        let nm = NelderMead {
            step: 0.5,
            max_iterations: 5000,
            tolerance: 1e-14,
        };
        let r = nm.minimize(rosenbrock, &[-1.2, 1.0]);
        assert!(r.converged);
        assert!(r.value < 1e-10, "{}", r.value);
        assert!((r.point[0] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn nelder_mead_handles_cusp() {
        // -x log x style cusp at the minimum
        let f = |x: &[f64]| {
            let t = x[0].abs() + x[1].abs();
            if t == 0.0 { 0.0 } else { t.sqrt() }
        };
        let nm = NelderMead {
            step: 0.3,
            max_iterations: 5000,
            tolerance: 1e-12,
        };
        let r = nm.minimize(f, &[0.7, -0.4]);
        assert!(r.value < 1e-5, "{}", r.value);
    }

    #[test]
    fn multistart_is_deterministic_and_monotone() {
        let f = |x: &[f64]| (x[0] * 3.0).sin() + 0.1 * x[0] * x[0];
        let nm = NelderMead {
            step: 0.3,
            max_iterations: 500,
            tolerance: 1e-12,
        };
        let run = |restarts| {
            let cfg = OptimizerConfig {
                restarts,
                ..OptimizerConfig::with_seed(3)
            };
            multistart(&cfg, |rng| {
                let x0 = rng.random_range(-5.0..5.0);
                nm.minimize(f, &[x0])
            })
        };
        let a = run(8);
        assert_eq!(a, run(8));
        let mut prev = f64::INFINITY;
        for r in 1..=8 {
            let v = run(r).value;
            assert!(v <= prev + 1e-12);
            prev = v;
        }
        assert!(a.spread_across_restarts >= 0.0);
    }

    #[test]
    fn config_validation() {
        assert!(OptimizerConfig::default().validate().is_ok());
        let bad = OptimizerConfig {
            restarts: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = OptimizerConfig {
            tolerance: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
