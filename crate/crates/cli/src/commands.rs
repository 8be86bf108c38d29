use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use measdiv::closed_form::{dmax, sandwiched_renyi};
use measdiv::generator::FGenerator;
use measdiv::measurement::{default_outcomes, search_povm, search_pvm};
use measdiv::optim::Termination;
use measdiv::polar::{duality_check, HullSet};
use measdiv::uhlmann::{check_hypotheses, solve_extension, solve_extension_dmax, Direction, ExtensionProblem, Order};
use measdiv::variational::{
    measured_f_divergence, measured_renyi, optimal_measurement_value_check, SolveOptions, SolveReport,
};
use measdiv::{BipartiteShape, PositiveOperator};

use crate::error::{CliError, CliResult};
use crate::output::{fmt12, write_csv, ExtReal, InputDigest, ResultRecord, RunSummary, Tolerances};
use crate::state::{load_state, LoadedState, StateFile};

/// Slack for the measurement-oracle checks.
const ORACLE_SLACK: f64 = 1e-6;
/// Largest duality gap reported as a pass.
const DUALITY_GAP: f64 = 1e-4;

/// Divergence selector: `renyi:ALPHA`, `kl` or `tv`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FSpec {
    Renyi(f64),
    Kl,
    Tv,
}

impl FromStr for FSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "kl" => Ok(FSpec::Kl),
            "tv" => Ok(FSpec::Tv),
            _ => {
                let a = s.strip_prefix("renyi:").ok_or_else(|| format!("expected renyi:ALPHA, kl or tv, got {s:?}"))?;
                let alpha = parse_alpha(a)?;
                Ok(FSpec::Renyi(alpha))
            }
        }
    }
}

impl fmt::Display for FSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FSpec::Renyi(a) => write!(f, "renyi:{}", fmt12(*a)),
            FSpec::Kl => write!(f, "kl"),
            FSpec::Tv => write!(f, "tv"),
        }
    }
}

impl FSpec {
    /// Generator for the finite orders; `renyi:inf` has none.
    fn generator(&self) -> CliResult<Option<FGenerator>> {
        Ok(match self {
            FSpec::Renyi(a) if a.is_infinite() => None,
            FSpec::Renyi(a) => Some(FGenerator::renyi(*a)?),
            FSpec::Kl => Some(FGenerator::kl()),
            FSpec::Tv => Some(FGenerator::tv()),
        })
    }
}

/// Non-negative order; `inf` is accepted.
pub fn parse_alpha(s: &str) -> Result<f64, String> {
    let a: f64 = s.trim().parse().map_err(|_| format!("invalid order {s:?}"))?;
    if a.is_nan() || a < 0.0 {
        return Err(format!("order must be >= 0, got {s}"));
    }
    Ok(a)
}

pub fn parse_shape(s: &str) -> Result<BipartiteShape, String> {
    let (a, r) = s.split_once(',').ok_or_else(|| format!("expected dA,dR, got {s:?}"))?;
    let a: usize = a.trim().parse().map_err(|_| format!("invalid dimension {a:?}"))?;
    let r: usize = r.trim().parse().map_err(|_| format!("invalid dimension {r:?}"))?;
    BipartiteShape::new(a, r).map_err(|e| e.to_string())
}

#[derive(Clone, Copy, Debug)]
pub struct SolverSettings {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl SolverSettings {
    fn options(&self) -> SolveOptions {
        SolveOptions { tol: self.tol, max_iter: self.max_iter, seed: self.seed, ..SolveOptions::default() }
    }

    fn tolerances(&self) -> Tolerances {
        Tolerances { tol: ExtReal(self.tol), max_iter: self.max_iter }
    }
}

fn load_pair(rho: &Path, sigma: &Path) -> CliResult<(LoadedState, LoadedState)> {
    let r = load_state(rho)?;
    let s = load_state(sigma)?;
    if r.state.dim() != s.state.dim() {
        return Err(CliError::Input(format!(
            "dimension mismatch: {} is {}-dimensional, {} is {}-dimensional",
            r.path,
            r.state.dim(),
            s.path,
            s.state.dim()
        )));
    }
    Ok((r, s))
}

fn termination_name(t: Termination) -> String {
    format!("{t:?}").to_lowercase()
}

fn check_converged(report: &SolveReport) -> CliResult<()> {
    if report.termination == Termination::MaxIter {
        return Err(CliError::NoConvergence(format!(
            "iteration limit reached with gradient norm {:e}",
            report.grad_norm
        )));
    }
    Ok(())
}

pub struct DivergenceArgs<'a> {
    pub rho: &'a Path,
    pub sigma: &'a Path,
    pub f: FSpec,
    pub settings: SolverSettings,
    pub out: Option<&'a Path>,
    pub witness: Option<&'a Path>,
}

pub fn divergence(args: DivergenceArgs) -> CliResult<()> {
    let (rho, sigma) = load_pair(args.rho, args.sigma)?;
    let opts = args.settings.options();
    let (value, divergence, report) = match args.f.generator()? {
        None => {
            let d = measured_renyi(&rho.state, &sigma.state, f64::INFINITY, &opts)?;
            (d, Some(d), None)
        }
        Some(g) => {
            let r = measured_f_divergence(&rho.state, &sigma.state, &g, &opts)?;
            let d = match args.f {
                FSpec::Renyi(_) if r.finite => Some(g.divergence_from_value(r.value)),
                FSpec::Renyi(_) => Some(f64::INFINITY),
                _ => None,
            };
            (r.value, d, Some(r))
        }
    };
    println!("f: {}", args.f);
    println!("value: {}", fmt12(value));
    if let Some(d) = divergence {
        println!("divergence: {}", fmt12(d));
    }
    if let (Some(path), Some(r)) = (args.witness, &report) {
        StateFile::from_operator("witness", &r.witness_omega, None).write(path)?;
    }
    if let Some(path) = args.out {
        let summary = match &report {
            Some(r) => RunSummary {
                iterations: r.iterations,
                gap: ExtReal(r.grad_norm),
                finite: r.finite,
                termination: termination_name(r.termination),
            },
            None => RunSummary { iterations: 0, gap: ExtReal(0.0), finite: value.is_finite(), termination: "closed_form".into() },
        };
        let record = ResultRecord {
            command: "divergence".into(),
            generator: args.f.to_string(),
            inputs: vec![InputDigest::of("rho", &rho), InputDigest::of("sigma", &sigma)],
            value: ExtReal(value),
            divergence: divergence.map(ExtReal),
            witness_path: args.witness.filter(|_| report.is_some()).map(|p| p.display().to_string()),
            report: summary,
            seed: args.settings.seed,
            tolerances: args.settings.tolerances(),
        };
        record.write(path)?;
    }
    match &report {
        Some(r) => check_converged(r),
        None => Ok(()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum DirectionArg {
    Rho,
    Sigma,
}

pub struct UhlmannArgs<'a> {
    pub direction: DirectionArg,
    pub fixed: &'a Path,
    pub marginal: &'a Path,
    pub shape: BipartiteShape,
    pub alpha: f64,
    pub settings: SolverSettings,
    pub out: Option<&'a Path>,
}

pub fn uhlmann(args: UhlmannArgs) -> CliResult<()> {
    let direction = match args.direction {
        DirectionArg::Rho => Direction::ExtendRho,
        DirectionArg::Sigma => Direction::ExtendSigma,
    };
    let order = Order::renyi(args.alpha)?;
    check_hypotheses(direction, order)?;
    let fixed = load_state(args.fixed)?;
    let marginal = load_state(args.marginal)?;
    if let Some(s) = fixed.shape {
        if s != args.shape {
            return Err(CliError::Input(format!(
                "{}: file shape {}x{} differs from --shape {}x{}",
                fixed.path, s.dim_a, s.dim_r, args.shape.dim_a, args.shape.dim_r
            )));
        }
    }
    let opts = args.settings.options();
    let report = match order {
        Order::Max => solve_extension_dmax(&fixed.state, &marginal.state, args.shape, &opts)?,
        Order::Generator(_) => {
            let p = ExtensionProblem::new(direction, fixed.state, marginal.state, args.shape, order)?;
            solve_extension(&p, &opts)?
        }
    };
    println!("order: {order}");
    println!("achieved: {}", fmt12(report.achieved));
    println!("marginal: {}", fmt12(report.marginal_value));
    println!("gap: {}", fmt12(report.gap));
    println!("iterations: {}", report.iterations);
    if let Some(path) = args.out {
        StateFile::from_operator("extension", report.extension.op(), Some(args.shape)).write(path)?;
    }
    if !report.success {
        return Err(CliError::NoConvergence(report.warning.unwrap_or_else(|| "extension search failed".into())));
    }
    Ok(())
}

pub struct VerifyArgs<'a> {
    pub rho: &'a Path,
    pub sigma: &'a Path,
    pub f: FSpec,
    pub trials: usize,
    pub settings: SolverSettings,
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

pub fn verify(args: VerifyArgs) -> CliResult<()> {
    let (rho, sigma) = load_pair(args.rho, args.sigma)?;
    let g = args.f.generator()?.ok_or_else(|| CliError::Input("verify needs a finite order".into()))?;
    let opts = args.settings.options();
    let report = measured_f_divergence(&rho.state, &sigma.state, &g, &opts)?;
    let seed = args.settings.seed;
    let (pvm, _) = search_pvm(&rho.state, &sigma.state, &g, args.trials, seed)?;
    let outcomes = default_outcomes(rho.state.dim());
    let (povm, _) = search_povm(&rho.state, &sigma.state, &g, outcomes, args.trials, seed.wrapping_add(1))?;
    let witness = optimal_measurement_value_check(&rho.state, &sigma.state, &g, &report)?;
    let v = report.value;
    let bound_ok = v == f64::INFINITY || pvm.max(povm) <= v + ORACLE_SLACK;
    let witness_ok = (v.is_infinite() && witness == v) || (witness - v).abs() <= ORACLE_SLACK;
    println!("f: {}", args.f);
    println!("variational: {}", fmt12(v));
    println!("best_pvm: {}", fmt12(pvm));
    println!("best_povm: {}", fmt12(povm));
    println!("witness_pvm: {}", fmt12(witness));
    println!("povm_bound: {}", pass(bound_ok));
    println!("witness_achievability: {}", pass(witness_ok));
    if !(bound_ok && witness_ok) {
        return Err(CliError::CheckFailed(format!(
            "povm_bound {} witness_achievability {}",
            pass(bound_ok),
            pass(witness_ok)
        )));
    }
    Ok(())
}

pub fn duality(rho: &Path, hull: &[PathBuf], settings: SolverSettings) -> CliResult<()> {
    let rho = load_state(rho)?;
    let gens = hull.iter().map(|p| load_state(p).map(|s| s.state)).collect::<CliResult<Vec<PositiveOperator>>>()?;
    let c = HullSet::new(gens)?;
    let r = duality_check(&rho.state, &c, &settings.options())?;
    println!("hull_term: {}", fmt12(r.hull));
    println!("polar_term: {}", fmt12(r.polar));
    println!("reference: {}", fmt12(r.reference));
    println!("gap: {}", fmt12(r.gap));
    if r.floor_limited {
        println!("note: polar minimizer at the positivity floor");
    }
    if !(r.gap <= DUALITY_GAP) {
        return Err(CliError::CheckFailed(format!("duality gap {} exceeds {}", fmt12(r.gap), fmt12(DUALITY_GAP))));
    }
    Ok(())
}

const SWEEP_HEADER: [&str; 4] = ["alpha", "measured", "sandwiched", "dmax_flag"];

fn sweep_row(rho: &PositiveOperator, sigma: &PositiveOperator, alpha: f64, opts: &SolveOptions) -> CliResult<Vec<String>> {
    let measured = measured_renyi(rho, sigma, alpha, opts)?;
    let sandwiched = if alpha.is_infinite() {
        dmax(rho, sigma)?
    } else if alpha >= 0.5 {
        sandwiched_renyi(rho, sigma, alpha)?
    } else {
        f64::NAN
    };
    Ok(vec![fmt12(alpha), fmt12(measured), fmt12(sandwiched), alpha.is_infinite().to_string()])
}

pub fn sweep(rho: &Path, sigma: &Path, alphas: &[f64], settings: SolverSettings, out: Option<&Path>) -> CliResult<()> {
    let (rho, sigma) = load_pair(rho, sigma)?;
    let opts = settings.options();
    let (r, q) = (&rho.state, &sigma.state);
    let rows: Vec<Vec<String>> = std::thread::scope(|s| {
        let handles: Vec<_> = alphas.iter().map(|&a| s.spawn(move || sweep_row(r, q, a, &opts))).collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect::<CliResult<_>>()
    })?;
    println!("{}", SWEEP_HEADER.join(","));
    for r in &rows {
        println!("{}", r.join(","));
    }
    if let Some(path) = out {
        write_csv(path, &SWEEP_HEADER, &rows)?;
    }
    Ok(())
}
