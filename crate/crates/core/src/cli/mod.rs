//! The `ccr` command-line front end. [`run`] parses arguments, executes one
//! subcommand and returns the process exit code: 0 on success, 1 for usage or
//! input errors, 2 when a verification fails.

mod output;
mod state_file;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::correlations::{
    classical_correlation, concurrence, entanglement_of_formation, formation_from_concurrence, jaeger_measure,
    MeasurementClass, OptimizerConfig, Side,
};
use crate::dynamics::{measurement_model, pointer_basis_detect, MeasurementModel, Trajectory, MEASUREMENT_KEYS};
use crate::error::{CcrError, Result};
use crate::measures::{
    coherence, coherent_information, conditional_entropy, conditional_information, gy_predictability,
    gy_visibility, irreality, linear_entropy, mutual_information, predictability, reality, von_neumann_entropy,
    QuantifierValue,
};
use crate::qstate::linalg::c;
use crate::qstate::random::{random_pure_with, stream_rng};
use crate::qstate::{Cut, PureState};
use crate::relations::{ccr_koashi, verify_batch, BatchSpec, CcrReport, RelationId, StateGenerator};

pub use output::{fmt_num, round_sig, sidecar_path};
pub use state_file::{parse_state, StateInput};

use output::{to_json, write_files, Envelope, Table};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_FAILED: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "ccr", version, about = "Complementarity relation verification and quantifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a relation on a batch of random states.
    Verify(VerifyArgs),
    /// Four-term Koashi-Winter sweep over random tripartite pure states.
    Koashi(KoashiArgs),
    /// Measurement model trajectory with pointer-basis detection.
    Decohere(DecohereArgs),
    /// Every applicable quantifier of a state file.
    Quantifiers(QuantifiersArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
struct OptimizerArgs {
    /// Optimizer restarts.
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    /// Iteration budget per restart.
    #[arg(long, default_value_t = 4000)]
    max_iter: usize,
    /// Optimizer convergence tolerance.
    #[arg(long, default_value_t = 1e-10)]
    opt_tol: f64,
    /// Ensemble size for the entanglement-of-formation search.
    #[arg(long)]
    ensemble_size: Option<usize>,
    /// Optimize classical correlations over rank-1 POVMs instead of projective measurements.
    #[arg(long)]
    povm: bool,
}

impl OptimizerArgs {
    fn config(&self, seed: u64) -> OptimizerConfig {
        OptimizerConfig {
            restarts: self.restarts,
            max_iterations: self.max_iter,
            tolerance: self.opt_tol,
            seed,
            ensemble_size: self.ensemble_size,
            measurement: if self.povm {
                MeasurementClass::Povm
            } else {
                MeasurementClass::Projective
            },
        }
    }
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    /// Output file; JSON goes to stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Output format. CSV output also writes `<output>.json` with the run metadata.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, value_parser = parse_relation)]
    relation: RelationId,
    /// Subsystem dimensions, e.g. 2x3.
    #[arg(long, value_parser = parse_dims)]
    dims: Option<Dims>,
    /// Rank of random mixed states; drawn per trial when omitted.
    #[arg(long)]
    rank: Option<usize>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long)]
    seed: Option<u64>,
    /// Draw a random measurement basis per trial.
    #[arg(long)]
    random_basis: bool,
    /// Exchange the roles of the second and third party.
    #[arg(long)]
    swap: bool,
    #[command(flatten)]
    optimizer: OptimizerArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct KoashiArgs {
    #[arg(long, value_parser = parse_dims, default_value = "2x2x2")]
    dims: Dims,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    #[arg(long)]
    seed: Option<u64>,
    /// Skip the POVM re-evaluation of states above tolerance.
    #[arg(long)]
    no_recheck: bool,
    #[command(flatten)]
    optimizer: OptimizerArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct DecohereArgs {
    /// System qubit: zero, one, plus, minus, plus-i, minus-i, or a state file.
    #[arg(long, default_value = "plus")]
    input: String,
    /// Environment dephasing rate of the apparatus.
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Premeasurement rate; equal to gamma when omitted.
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long, default_value_t = 5.0)]
    tmax: f64,
    /// Number of time samples, including t = 0 and t = tmax.
    #[arg(long, default_value_t = 500)]
    steps: usize,
    /// Pointer-basis threshold on the classical correlation, in bits.
    #[arg(long, default_value_t = crate::dynamics::DEFAULT_EPSILON)]
    epsilon: f64,
    /// Pointer-basis window, in samples.
    #[arg(long, default_value_t = crate::dynamics::DEFAULT_WINDOW)]
    window: usize,
    /// Largest acceptable pure-state relation residual along the trajectory.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    optimizer: OptimizerArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct QuantifiersArgs {
    /// JSON state file.
    state: PathBuf,
    /// Subsystems in party A, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    cut: Vec<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    optimizer: OptimizerArgs,
    #[command(flatten)]
    out: OutputArgs,
}

fn parse_relation(s: &str) -> std::result::Result<RelationId, String> {
    s.parse().map_err(|e: CcrError| e.to_string())
}

/// Subsystem dimensions written as `2x3x2`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Dims(Vec<usize>);

fn parse_dims(s: &str) -> std::result::Result<Dims, String> {
    let dims = s
        .split(['x', 'X', ','])
        .map(|p| p.trim().parse::<usize>().map_err(|_| format!("bad dimension `{p}` in `{s}`")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if dims.contains(&0) {
        return Err(format!("dimensions must be positive in `{s}`"));
    }
    Ok(Dims(dims))
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| rand::rng().random())
}

/// Writes the rendered report, to stdout when no path is given.
fn emit(out: &OutputArgs, default: Format, json: String, csv: Option<String>, stdout: &mut dyn Write) -> Result<()> {
    match (out.format.unwrap_or(default), &out.output) {
        (Format::Json, Some(path)) => write_files(&[(path.clone(), json)]),
        (Format::Json, None) => Ok(stdout.write_all(json.as_bytes())?),
        (Format::Csv, Some(path)) => {
            let csv = csv.ok_or_else(|| CcrError::InvalidArgument("no CSV rendering for this command".into()))?;
            write_files(&[(path.clone(), csv), (sidecar_path(path), json)])
        }
        (Format::Csv, None) => Err(CcrError::InvalidArgument("--format csv requires --output".into())),
    }
}

fn check_output(out: &OutputArgs, default: Format) -> Result<()> {
    if out.format.unwrap_or(default) == Format::Csv && out.output.is_none() {
        return Err(CcrError::InvalidArgument("--format csv requires --output".into()));
    }
    Ok(())
}

#[derive(Serialize)]
struct VerifyConfig {
    relation: RelationId,
    generator: StateGenerator,
    trials: usize,
    tolerance: f64,
    random_basis: bool,
    swap: bool,
    optimizer: OptimizerConfig,
    format: Format,
}

fn cmd_verify(a: &VerifyArgs, stdout: &mut dyn Write) -> Result<bool> {
    check_output(&a.out, Format::Json)?;
    let seed = resolve_seed(a.seed);
    let mut spec = BatchSpec::new(a.relation, a.trials, a.tol, seed);
    spec.generator = StateGenerator::default_for(a.relation, a.dims.clone().map(|d| d.0));
    if let StateGenerator::Mixed { rank, .. } = &mut spec.generator {
        *rank = a.rank;
    } else if a.rank.is_some() {
        return Err(CcrError::InvalidArgument(format!("--rank does not apply to {}", a.relation)));
    }
    spec.random_basis = a.random_basis;
    spec.swap = a.swap;
    spec.optimizer = a.optimizer.config(seed);
    spec.validate()?;
    let summary = verify_batch(&spec)?;
    let passed = summary.passed();

    let spreads = !summary.optimizer_spreads.is_empty();
    let mut header = vec!["trial", "residual"];
    if spreads {
        header.push("optimizer_spread");
    }
    let mut table = Table::new(&header);
    for (i, r) in summary.residuals.iter().enumerate() {
        let mut row = vec![i.to_string(), fmt_num(*r)];
        if spreads {
            row.push(fmt_num(summary.optimizer_spreads[i]));
        }
        table.push(row);
    }
    let config = VerifyConfig {
        relation: a.relation,
        generator: spec.generator.clone(),
        trials: a.trials,
        tolerance: a.tol,
        random_basis: a.random_basis,
        swap: a.swap,
        optimizer: spec.optimizer.clone(),
        format: a.out.format.unwrap_or(Format::Json),
    };
    let json = to_json(&Envelope::new("verify", Some(seed), config, passed, &summary))?;
    emit(&a.out, Format::Json, json, Some(table.render()), stdout)?;
    Ok(passed)
}

#[derive(Serialize)]
struct KoashiConfig {
    dims: Vec<usize>,
    trials: usize,
    tolerance: f64,
    recheck_with_povm: bool,
    optimizer: OptimizerConfig,
    format: Format,
}

#[derive(Serialize)]
struct KoashiTrial {
    trial: usize,
    report: CcrReport,
    /// Residual of the same state with classical correlations over POVMs,
    /// present when the projective residual exceeded tolerance.
    #[serde(skip_serializing_if = "Option::is_none")]
    povm_residual: Option<f64>,
    passed: bool,
}

#[derive(Serialize)]
struct KoashiResult {
    max_residual: f64,
    median_residual: f64,
    failures: usize,
    rechecked: usize,
    trials: Vec<KoashiTrial>,
}

fn cmd_koashi(a: &KoashiArgs, stdout: &mut dyn Write) -> Result<bool> {
    check_output(&a.out, Format::Json)?;
    if a.trials == 0 {
        return Err(CcrError::InvalidArgument("trials must be at least 1".into()));
    }
    if a.dims.0.len() != 3 {
        return Err(CcrError::BadCut(format!("three subsystem dimensions required, got {:?}", a.dims.0)));
    }
    let seed = resolve_seed(a.seed);
    let base = a.optimizer.config(seed);
    base.validate()?;
    let trials = (0..a.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(seed, t as u64);
            let psi = random_pure_with(&mut rng, &a.dims.0);
            let cfg = OptimizerConfig {
                seed: rng.random(),
                ..base.clone()
            };
            let report = ccr_koashi(&psi, &cfg, false)?;
            let povm_residual = if report.residual > a.tol && !a.no_recheck && cfg.measurement != MeasurementClass::Povm
            {
                let povm = OptimizerConfig {
                    measurement: MeasurementClass::Povm,
                    ..cfg
                };
                Some(ccr_koashi(&psi, &povm, false)?.residual)
            } else {
                None
            };
            let best = povm_residual.map_or(report.residual, |p| p.min(report.residual));
            Ok(KoashiTrial {
                trial: t,
                passed: best <= a.tol,
                report,
                povm_residual,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut residuals: Vec<f64> = trials.iter().map(|t| t.report.residual).collect();
    residuals.sort_by(f64::total_cmp);
    let n = residuals.len();
    let median = if n % 2 == 1 {
        residuals[n / 2]
    } else {
        0.5 * (residuals[n / 2 - 1] + residuals[n / 2])
    };
    let failures = trials.iter().filter(|t| !t.passed).count();
    let result = KoashiResult {
        max_residual: residuals[n - 1],
        median_residual: median,
        failures,
        rechecked: trials.iter().filter(|t| t.povm_residual.is_some()).count(),
        trials,
    };

    let mut table = Table::new(&[
        "trial",
        "E_f_AB",
        "J_AE",
        "P_vn_A",
        "C_re_A",
        "residual",
        "optimizer_spread",
        "measurement",
        "povm_residual",
    ]);
    for t in &result.trials {
        let terms = &t.report.terms;
        let note = t.report.optimizer.iter().find(|o| o.measurement.is_some());
        let mut row = vec![t.trial.to_string()];
        row.extend(terms.iter().map(|x| fmt_num(x.value)));
        row.push(fmt_num(t.report.residual));
        row.push(fmt_num(
            t.report.optimizer.iter().map(|o| o.spread_across_restarts).fold(0.0, f64::max),
        ));
        row.push(match note.and_then(|o| o.measurement) {
            Some(MeasurementClass::Povm) => "povm".into(),
            _ => "projective".into(),
        });
        row.push(t.povm_residual.map(fmt_num).unwrap_or_default());
        table.push(row);
    }
    let config = KoashiConfig {
        dims: a.dims.0.clone(),
        trials: a.trials,
        tolerance: a.tol,
        recheck_with_povm: !a.no_recheck,
        optimizer: base,
        format: a.out.format.unwrap_or(Format::Json),
    };
    let passed = failures == 0;
    let json = to_json(&Envelope::new("koashi", Some(seed), config, passed, &result))?;
    emit(&a.out, Format::Json, json, Some(table.render()), stdout)?;
    Ok(passed)
}

fn named_qubit(name: &str) -> Option<PureState> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let amps = match name {
        "zero" => [c(1.0, 0.0), c(0.0, 0.0)],
        "one" => [c(0.0, 0.0), c(1.0, 0.0)],
        "plus" => [c(h, 0.0), c(h, 0.0)],
        "minus" => [c(h, 0.0), c(-h, 0.0)],
        "plus-i" => [c(h, 0.0), c(0.0, h)],
        "minus-i" => [c(h, 0.0), c(0.0, -h)],
        _ => return None,
    };
    PureState::from_amplitudes(vec![2], &amps).ok()
}

fn read_state(path: &std::path::Path) -> Result<StateInput> {
    let text = std::fs::read_to_string(path).map_err(|e| CcrError::Io(format!("{}: {e}", path.display())))?;
    parse_state(&text)
}

#[derive(Serialize)]
struct DecohereConfig {
    input: String,
    gamma_env: f64,
    premeasurement_rate: f64,
    tmax: f64,
    steps: usize,
    epsilon: f64,
    window: usize,
    tolerance: f64,
    optimizer: OptimizerConfig,
    format: Format,
}

#[derive(Serialize)]
struct DecohereResult {
    pointer_time: Option<f64>,
    max_ccr_residual: f64,
    rows: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    trajectory: Option<Trajectory>,
}

fn cmd_decohere(a: &DecohereArgs, stdout: &mut dyn Write) -> Result<bool> {
    let format = a.out.format.unwrap_or(Format::Csv);
    check_output(&a.out, Format::Csv)?;
    if a.steps < 3 {
        return Err(CcrError::GridTooCoarse(format!("{} steps, at least 3 required", a.steps)));
    }
    if !(a.tmax > 0.0) || !a.tmax.is_finite() {
        return Err(CcrError::InvalidArgument(format!("tmax {} must be positive", a.tmax)));
    }
    let system = match named_qubit(&a.input) {
        Some(psi) => psi.density(),
        None => read_state(std::path::Path::new(&a.input))?.density(),
    };
    let seed = resolve_seed(a.seed);
    let model = MeasurementModel {
        gamma_env: a.gamma,
        premeasurement_rate: a.kappa,
        optimizer: a.optimizer.config(seed),
    };
    let times = crate::dynamics::uniform_grid(0.0, a.tmax, a.steps)?;
    let traj = measurement_model(&system, &model, &times)?;
    let pointer_time = pointer_basis_detect(&traj, a.window, a.epsilon)?;
    let max_res = traj.column("ccr_residual")?.into_iter().fold(0.0, f64::max);
    let passed = max_res <= a.tol;

    let mut header = vec!["time"];
    header.extend(MEASUREMENT_KEYS);
    let mut table = Table::new(&header);
    for (t, row) in traj.times.iter().zip(&traj.rows) {
        let mut cells = vec![fmt_num(*t)];
        cells.extend(row.iter().map(|x| fmt_num(*x)));
        table.push(cells);
    }
    let config = DecohereConfig {
        input: a.input.clone(),
        gamma_env: a.gamma,
        premeasurement_rate: a.kappa.unwrap_or(a.gamma),
        tmax: a.tmax,
        steps: a.steps,
        epsilon: a.epsilon,
        window: a.window,
        tolerance: a.tol,
        optimizer: model.optimizer.clone(),
        format,
    };
    let result = DecohereResult {
        pointer_time,
        max_ccr_residual: max_res,
        rows: traj.len(),
        trajectory: (format == Format::Json).then_some(traj),
    };
    let json = to_json(&Envelope::new("decohere", Some(seed), config, passed, &result))?;
    emit(&a.out, Format::Csv, json, Some(table.render()), stdout)?;
    Ok(passed)
}

/// Every quantifier that applies to `state` for the bipartition `cut`.
pub fn state_quantifiers(state: &StateInput, cut: &Cut, cfg: &OptimizerConfig) -> Result<Vec<QuantifierValue>> {
    let rho = state.density();
    fn q(name: impl Into<String>, value: f64) -> QuantifierValue {
        QuantifierValue::new(name, value)
    }
    let mut out = vec![
        q("S_vn", von_neumann_entropy(&rho)),
        q("S_l", linear_entropy(&rho)),
        q("purity", rho.purity()),
        q("C_re", coherence(&rho, None)?),
        q("P_vn", predictability(&rho, None)?),
        q("reality", reality(&rho, None)?),
        q("irreality", irreality(&rho, None)?),
    ];
    if rho.dim() == 2 {
        out.push(q("V_GY", gy_visibility(&rho)?));
        out.push(q("P_GY", gy_predictability(&rho)?));
    }
    let n = rho.num_subsystems();
    if n < 2 {
        return Ok(out);
    }
    for k in 0..n {
        let r = rho.partial_trace(&[k])?;
        out.push(q(format!("S_vn({k})"), von_neumann_entropy(&r)));
        out.push(q(format!("C_re({k})"), coherence(&r, None)?));
        out.push(q(format!("P_vn({k})"), predictability(&r, None)?));
        if r.dim() == 2 {
            out.push(q(format!("V_GY({k})"), gy_visibility(&r)?));
            out.push(q(format!("P_GY({k})"), gy_predictability(&r)?));
        }
    }
    let bip = rho.bipartite(cut)?;
    out.push(q("I_{A:B}", mutual_information(&bip, &Cut::first())?));
    out.push(q("S_{A|B}", conditional_entropy(&bip, &Cut::first())?));
    out.push(q("I_{A>B}", coherent_information(&bip, &Cut::first())?));
    out.push(q("I_{A|B}", conditional_information(&bip, &Cut::first())?));
    if bip.dims() == [2, 2] {
        out.push(q("Tr(rho rho~)", jaeger_measure(&bip)?));
        let conc = concurrence(&bip)?;
        out.push(q("C", conc));
        out.push(q("E_f", formation_from_concurrence(conc)));
    } else if let StateInput::Pure(psi) = state {
        let (a, _) = cut.resolve(n)?;
        out.push(q("E_f", von_neumann_entropy(&psi.reduced(&a)?)));
    } else if let Ok(ef) = entanglement_of_formation(&bip, &Cut::first(), cfg) {
        out.push(q("E_f", ef.value));
    }
    for (side, name) in [(Side::Second, "J_{A|B}"), (Side::First, "J_{B|A}")] {
        if let Ok(j) = classical_correlation(&bip, &Cut::first(), side, cfg) {
            out.push(q(name, j.value));
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct QuantifiersConfig {
    state: String,
    dims: Vec<usize>,
    cut: Vec<usize>,
    optimizer: OptimizerConfig,
    format: Format,
}

fn cmd_quantifiers(a: &QuantifiersArgs, stdout: &mut dyn Write) -> Result<bool> {
    check_output(&a.out, Format::Json)?;
    let state = read_state(&a.state)?;
    let seed = resolve_seed(a.seed);
    let cfg = a.optimizer.config(seed);
    cfg.validate()?;
    let cut = Cut::new(a.cut.clone());
    if state.dims().len() > 1 {
        cut.resolve(state.dims().len())?;
    }
    let values = state_quantifiers(&state, &cut, &cfg)?;
    let mut table = Table::new(&["quantity", "value"]);
    for v in &values {
        table.push(vec![v.name.clone(), fmt_num(v.value)]);
    }
    let config = QuantifiersConfig {
        state: a.state.display().to_string(),
        dims: state.dims().to_vec(),
        cut: a.cut.clone(),
        optimizer: cfg,
        format: a.out.format.unwrap_or(Format::Json),
    };
    let json = to_json(&Envelope::new("quantifiers", Some(seed), config, true, &values))?;
    emit(&a.out, Format::Json, json, Some(table.render()), stdout)?;
    Ok(true)
}

/// Runs the CLI with explicit output streams and returns the exit code.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    let outcome = match &cli.command {
        Command::Verify(a) => cmd_verify(a, stdout),
        Command::Koashi(a) => cmd_koashi(a, stdout),
        Command::Decohere(a) => cmd_decohere(a, stdout),
        Command::Quantifiers(a) => cmd_quantifiers(a, stdout),
    };
    match outcome {
        Ok(true) => EXIT_OK,
        Ok(false) => {
            let _ = writeln!(stderr, "verification failed");
            EXIT_FAILED
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}

/// Runs the CLI on the process streams.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (u8, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run_with(std::iter::once("ccr").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn dims_parsing() {
        assert_eq!(parse_dims("2x3").unwrap(), Dims(vec![2, 3]));
        assert_eq!(parse_dims("2,2,2").unwrap(), Dims(vec![2, 2, 2]));
        assert!(parse_dims("2x0").is_err());
        assert!(parse_dims("2xq").is_err());
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run_args(&["verify"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["verify", "--relation", "ccr-nope"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["bogus"]).0, EXIT_USAGE);
        let (code, _, err) = run_args(&["verify", "--relation", "ccr-tessier", "--dims", "3x3", "--seed", "1"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("two-qubit"), "{err}");
        assert_eq!(run_args(&["decohere", "--steps", "2", "-o", "x.csv"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["verify", "--relation", "ccr-pure", "--format", "csv"]).0, EXIT_USAGE);
    }

    #[test]
    fn help_and_version_exit_zero() {
        let (code, out, _) = run_args(&["--version"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains(env!("CARGO_PKG_VERSION")));
        assert_eq!(run_args(&["verify", "--help"]).0, EXIT_OK);
    }

    #[test]
    fn verify_to_stdout_embeds_metadata() {
        let (code, out, _) = run_args(&["verify", "--relation", "ccr-pure", "--trials", "20", "--seed", "9"]);
        assert_eq!(code, EXIT_OK);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["seed"], 9);
        assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
        assert_eq!(v["config"]["relation"], "ccr-pure");
        assert_eq!(v["result"]["residuals"].as_array().unwrap().len(), 20);
    }

    #[test]
    fn failing_batch_exits_two() {
        let (code, _, err) = run_args(&["verify", "--relation", "ccr-pure", "--trials", "5", "--seed", "1", "--tol", "1e-300"]);
        assert_eq!(code, EXIT_FAILED, "{err}");
    }

    #[test]
    fn auto_seed_is_reported() {
        let (code, out, _) = run_args(&["verify", "--relation", "ccr-reality", "--trials", "3"]);
        assert_eq!(code, EXIT_OK);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!(v["seed"].is_u64());
        assert_eq!(v["config"]["optimizer"]["seed"], v["seed"]);
    }

    #[test]
    fn quantifiers_of_product_qubits() {
        let psi = PureState::basis(vec![2, 2], &[0, 1]).unwrap();
        let cfg = OptimizerConfig::with_seed(1);
        let v = state_quantifiers(&StateInput::Pure(psi), &Cut::first(), &cfg).unwrap();
        let get = |n: &str| v.iter().find(|x| x.name == n).unwrap().value;
        assert!(get("I_{A:B}").abs() < 1e-12);
        assert!(get("E_f").abs() < 1e-12);
        assert!((get("P_vn") - 2.0).abs() < 1e-12);
        assert!(get("J_{A|B}").abs() < 1e-9);
    }
}
