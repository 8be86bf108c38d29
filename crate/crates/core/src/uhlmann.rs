//! Uhlmann extension problems for measured divergences.
//!
//! Given one bipartite state and a marginal on `A`, minimize the measured divergence over all
//! extensions of the marginal to `A (x) R`. For admissible generators the minimum equals the
//! divergence of the marginals; the solver certifies this by projected gradient descent, where
//! the gradient of the measured value in either argument is read off the optimal witness.

use std::fmt;

use crate::closed_form::dmax;
use crate::error::{Error, Result};
use crate::generator::{FGenerator, Kind};
use crate::linalg::bipartite::{
    partial_trace, project_marginal, tangent_to_marginal, tensor, tensor_bipartite, BipartiteShape, Keep,
};
use crate::linalg::eigen::eig_hermitian;
use crate::linalg::functions::divided_differences;
use crate::linalg::matrix::{CMatrix, Hermitian};
use crate::linalg::positive::PositiveOperator;
use crate::linalg::projection::{dykstra, project_psd, DYKSTRA_MAX_SWEEPS, DYKSTRA_TOL};
use crate::linalg::random::{random_density_with, rng_from_seed};
use crate::optim::{maximize, AscentOptions, Eval};
use crate::variational::{measured_f_divergence, measured_renyi, SolveOptions, SolveReport};
use num_complex::Complex64 as C64;

/// Gap (in divergence units) at which a solve is declared successful.
pub const SUCCESS_GAP: f64 = 1e-4;
/// Gap at which the descent stops early.
const TARGET_GAP: f64 = 1e-9;
pub const MAX_OUTER_ITERATIONS: usize = 500;
/// Smallest trial step before the descent gives up.
pub const MIN_STEP: f64 = 1e-8;
const MAX_STEP: f64 = 1e2;
/// Tolerated violation of the data-processing lower bound.
pub const DPI_SLACK: f64 = 1e-6;
/// Upper end of the bisection bracket for the max-divergence extension.
pub const DMAX_CAP: f64 = 1e6;
const BISECTION_STEPS: usize = 60;
/// Relative inflation of the bisection threshold for the returned extension.
const DMAX_MARGIN: f64 = 1e-6;
const SNAP_ROUNDS: usize = 200;
/// Projected ascent steps that refine the primal point of the support function.
const REFINE_STEPS: usize = 3;
const REFINE_SWEEPS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// The first argument is extended, the second is fixed on `A R`.
    ExtendRho,
    /// The second argument is extended, the first is fixed on `A R`.
    ExtendSigma,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::ExtendRho => write!(f, "rho"),
            Direction::ExtendSigma => write!(f, "sigma"),
        }
    }
}

/// Divergence minimized over extensions: a registry generator, or the max-divergence (order `inf`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Order {
    Generator(FGenerator),
    Max,
}

impl Order {
    /// Renyi order tag in `[0, inf]`; `inf` selects the max-divergence.
    pub fn renyi(alpha: f64) -> Result<Order> {
        if alpha == f64::INFINITY {
            Ok(Order::Max)
        } else {
            Ok(Order::Generator(FGenerator::renyi(alpha)?))
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Generator(g) => write!(f, "{g}"),
            Order::Max => write!(f, "renyi:inf"),
        }
    }
}

/// Checks that the (direction, order) pairing is one for which the extension property holds.
pub fn check_hypotheses(direction: Direction, order: Order) -> Result<()> {
    let refuse = |why: &str| Err(Error::Hypothesis(format!("{order} cannot be extended in {direction}: {why}")));
    match (direction, order) {
        (Direction::ExtendRho, Order::Generator(g)) => match g.kind() {
            Kind::Renyi(a) if a <= 0.5 => Ok(()),
            Kind::Tv => refuse("the conjugate domain is bounded below"),
            _ => refuse("requires a Renyi order in [0, 1/2]"),
        },
        (Direction::ExtendRho, Order::Max) => refuse("requires a Renyi order in [0, 1/2]"),
        (Direction::ExtendSigma, Order::Generator(g)) => match g.kind() {
            Kind::Renyi(a) if a >= 0.5 => Ok(()),
            Kind::Kl => Ok(()),
            Kind::Tv => refuse("the conjugate range is bounded above"),
            Kind::Renyi(_) => refuse("requires a Renyi order in [1/2, inf]"),
        },
        (Direction::ExtendSigma, Order::Max) => Ok(()),
    }
}

#[derive(Clone, Debug)]
pub struct ExtensionProblem {
    pub direction: Direction,
    /// The operator on `A R` that is not optimized.
    pub fixed_state: PositiveOperator,
    /// The prescribed `A`-marginal of the optimized operator.
    pub marginal: PositiveOperator,
    pub shape: BipartiteShape,
    pub order: Order,
}

impl ExtensionProblem {
    pub fn new(
        direction: Direction,
        fixed_state: PositiveOperator,
        marginal: PositiveOperator,
        shape: BipartiteShape,
        order: Order,
    ) -> Result<Self> {
        shape.check(fixed_state.op())?;
        if marginal.dim() != shape.dim_a {
            return Err(Error::DimensionMismatch { expected: shape.dim_a, found: marginal.dim() });
        }
        match direction {
            Direction::ExtendRho if !marginal.is_density() => return Err(Error::NotNormalized(marginal.trace())),
            Direction::ExtendSigma if !fixed_state.is_density() => {
                return Err(Error::NotNormalized(fixed_state.trace()))
            }
            _ => {}
        }
        check_hypotheses(direction, order)?;
        Ok(ExtensionProblem { direction, fixed_state, marginal, shape, order })
    }

    /// `A`-marginal of the fixed state.
    pub fn fixed_marginal(&self) -> Result<PositiveOperator> {
        PositiveOperator::new(partial_trace(self.fixed_state.op(), self.shape, Keep::A)?)
    }

    /// Correlation-free starting extension: the marginal tensored with the normalized `R`-marginal
    /// of the fixed state.
    pub fn initial_extension(&self) -> Result<PositiveOperator> {
        let r = partial_trace(self.fixed_state.op(), self.shape, Keep::R)?;
        let tau = r.scale(1.0 / self.fixed_state.trace());
        PositiveOperator::new(tensor(self.marginal.op(), &tau))
    }

    fn arguments<'a>(&'a self, y: &'a PositiveOperator) -> (&'a PositiveOperator, &'a PositiveOperator) {
        match self.direction {
            Direction::ExtendRho => (y, &self.fixed_state),
            Direction::ExtendSigma => (&self.fixed_state, y),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExtensionReport {
    pub extension: PositiveOperator,
    /// Divergence of the returned extension against the fixed state.
    pub achieved: f64,
    /// Divergence of the marginals, computed independently.
    pub marginal_value: f64,
    /// `achieved - marginal_value` (zero when both are infinite).
    pub gap: f64,
    pub iterations: usize,
    pub success: bool,
    pub warning: Option<String>,
    /// Divergence of each accepted iterate.
    pub history: Vec<f64>,
    /// Divergence of every extension evaluated during the search, accepted or not.
    pub evaluated: Vec<f64>,
}

impl ExtensionReport {
    /// Smallest `value - marginal_value` over all evaluated extensions.
    pub fn min_dpi_margin(&self) -> f64 {
        self.evaluated.iter().map(|v| v - self.marginal_value).fold(f64::INFINITY, f64::min)
    }

    pub fn dpi_holds(&self) -> bool {
        self.marginal_value.is_infinite() || self.min_dpi_margin() >= -DPI_SLACK
    }

    /// True when the accepted divergences never increase.
    pub fn monotone(&self) -> bool {
        self.history.windows(2).all(|w| w[1] <= w[0])
    }
}

fn gap_of(achieved: f64, marginal: f64) -> f64 {
    if achieved.is_infinite() && marginal.is_infinite() {
        0.0
    } else {
        achieved - marginal
    }
}

fn finish(
    extension: PositiveOperator,
    achieved: f64,
    marginal_value: f64,
    iterations: usize,
    history: Vec<f64>,
    evaluated: Vec<f64>,
) -> ExtensionReport {
    let gap = gap_of(achieved, marginal_value);
    let success = gap <= SUCCESS_GAP;
    let warning = (!success).then(|| format!("extension gap {gap:e} exceeds {SUCCESS_GAP:e}"));
    ExtensionReport { extension, achieved, marginal_value, gap, iterations, success, warning, history, evaluated }
}

/// One measured evaluation: variational value `s`, divergence `d`, and the gradient of `s`
/// with respect to the optimized argument.
struct Evaluation {
    s: f64,
    d: f64,
    gradient: Hermitian,
    finite: bool,
}

fn evaluate(p: &ExtensionProblem, g: &FGenerator, y: &PositiveOperator, opts: &SolveOptions) -> Result<Evaluation> {
    let (rho, sigma) = p.arguments(y);
    let r = measured_f_divergence(rho, sigma, g, opts)?;
    let d = if r.finite { g.divergence_from_value(r.value) } else { f64::INFINITY };
    let gradient = match p.direction {
        Direction::ExtendRho => r.rho_gradient,
        Direction::ExtendSigma => r.sigma_gradient,
    };
    Ok(Evaluation { s: r.value, d, gradient, finite: r.finite && d.is_finite() })
}

fn marginal_divergence(p: &ExtensionProblem, g: &FGenerator, opts: &SolveOptions) -> Result<(f64, SolveReport)> {
    let fixed = p.fixed_marginal()?;
    let (rho, sigma) = match p.direction {
        Direction::ExtendRho => (&p.marginal, &fixed),
        Direction::ExtendSigma => (&fixed, &p.marginal),
    };
    let r = measured_f_divergence(rho, sigma, g, opts)?;
    let d = if r.finite { g.divergence_from_value(r.value) } else { f64::INFINITY };
    Ok((d, r))
}

/// Extension built from the marginal witness `Lambda`.
///
/// At a saddle point the bipartite witness is `Lambda (x) I`, and stationarity in the witness
/// fixes the optimized operator blockwise in the eigenbasis of `Lambda`: the fixed state is
/// multiplied entrywise by the Loewner matrix of `f*` (first argument) or of its inverse
/// (second argument). Both matrices are PSD under the operator monotonicity hypotheses, so the
/// result is PSD, and its marginal is the prescribed one up to the accuracy of `Lambda`.
fn witness_extension(p: &ExtensionProblem, g: &FGenerator, marginal: &SolveReport) -> Option<PositiveOperator> {
    if !marginal.finite {
        return None;
    }
    let e = eig_hermitian(&marginal.witness_omega).ok()?;
    let delta = divided_differences(&e.values, &g.fstar_fn());
    let (da, dr) = (p.shape.dim_a, p.shape.dim_r);
    let mut weight = vec![vec![0.0; da]; da];
    for i in 0..da {
        for j in 0..da {
            let d = delta[i][j];
            weight[i][j] = match p.direction {
                Direction::ExtendRho => d,
                Direction::ExtendSigma if d > 0.0 => 1.0 / d,
                Direction::ExtendSigma => return None,
            };
            if !weight[i][j].is_finite() {
                return None;
            }
        }
    }
    let u = e.vectors.kron(&CMatrix::identity(dr));
    let mut f = u.adjoint().matmul(p.fixed_state.op().matrix()).matmul(&u);
    for r in 0..da * dr {
        for c in 0..da * dr {
            f[(r, c)] *= weight[r / dr][c / dr];
        }
    }
    let y = Hermitian::new(u.matmul(&f).matmul(&u.adjoint())).ok()?;
    project_extension_set(&y, p.shape, p.marginal.op()).ok()
}

/// Eigenvalues of the marginal below this fraction of its largest one count as kernel.
const FACE_TOL: f64 = 1e-12;

/// Every extension of a rank-deficient marginal `T` lives on `supp T (x) R`. Projections are
/// carried out there, against the compressed marginal, which has full rank.
struct SupportFace {
    /// `V (x) I_R` with `V` an isometry onto `supp T`.
    embedding: CMatrix,
    target: Hermitian,
    shape: BipartiteShape,
}

impl SupportFace {
    fn of(target: &Hermitian, shape: BipartiteShape) -> Result<Option<SupportFace>> {
        let e = eig_hermitian(target)?;
        let tol = FACE_TOL * e.max().abs().max(f64::MIN_POSITIVE);
        let v = e.support_isometry(tol);
        let rank = v.cols();
        if rank == shape.dim_a || rank == 0 {
            return Ok(None);
        }
        Ok(Some(SupportFace {
            embedding: v.kron(&CMatrix::identity(shape.dim_r)),
            target: target.compress(&v),
            shape: BipartiteShape::new(rank, shape.dim_r)?,
        }))
    }

    fn embed(&self, y: &PositiveOperator) -> Result<PositiveOperator> {
        PositiveOperator::new(y.op().conjugate_by(&self.embedding))
    }
}

/// `(G (x) I) X (G (x) I)` for the fixed state `X`, where `G = s^{-1/2} (s^{1/2} t s^{1/2})^{1/2} s^{-1/2}`
/// is the geometric mean carrying the fixed marginal `s` to the prescribed marginal `t`
/// (`G s G = t` on the support of `s`). This congruence attains the fidelity in Uhlmann's
/// theorem, so it is optimal at order 1/2 and for pure marginals below it.
fn geometric_extension(p: &ExtensionProblem) -> Option<PositiveOperator> {
    let s = p.fixed_marginal().ok()?;
    let tol = s.rank_tol();
    let half: Vec<f64> = s.eig().values.iter().map(|&v| if v > tol { v.sqrt() } else { 0.0 }).collect();
    let inv_half: Vec<f64> = s.eig().values.iter().map(|&v| if v > tol { 1.0 / v.sqrt() } else { 0.0 }).collect();
    let sh = s.eig().synthesize(&half);
    let sih = s.eig().synthesize(&inv_half);
    let inner = eig_hermitian(&p.marginal.op().conjugate_by(sh.matrix())).ok()?;
    let root: Vec<f64> = inner.values.iter().map(|&v| v.max(0.0).sqrt()).collect();
    let gm = inner.synthesize(&root).conjugate_by(sih.matrix());
    let lift = gm.matrix().kron(&CMatrix::identity(p.shape.dim_r));
    let y = p.fixed_state.op().conjugate_by(&lift);
    project_extension_set(&y, p.shape, p.marginal.op()).ok()
}

/// Alternates exact marginal projection and eigenvalue clipping until the result is PSD with the
/// prescribed marginal; removes the residual of an approximate projection.
fn snap(x: Hermitian, shape: BipartiteShape, target: &Hermitian) -> Result<PositiveOperator> {
    if let Some(face) = SupportFace::of(target, shape)? {
        let y = snap(x.compress(&face.embedding), face.shape, &face.target)?;
        return face.embed(&y);
    }
    let mut y = x;
    for _ in 0..SNAP_ROUNDS {
        y = project_marginal(&y, shape, target)?;
        let e = eig_hermitian(&y)?;
        if e.min() >= -1e-13 * (1.0 + e.max().abs()) {
            break;
        }
        y = project_psd(&y);
    }
    let y = project_marginal(&y, shape, target)?;
    let low = eig_hermitian(&y)?.min();
    if low >= 0.0 {
        return PositiveOperator::new(y);
    }
    // mix toward the interior point target (x) I/d_R, which has the same marginal
    let dr = shape.dim_r as f64;
    let inner = tensor(target, &Hermitian::identity(shape.dim_r)).scale(1.0 / dr);
    let floor = eig_hermitian(target)?.min() / dr;
    if floor > 0.0 {
        let theta = -low / (floor - low);
        return PositiveOperator::new(y.scale(1.0 - theta).add(&inner.scale(theta)));
    }
    PositiveOperator::new(y)
}

/// Nearest extension of `target` to `x`.
pub fn project_extension_set(x: &Hermitian, shape: BipartiteShape, target: &Hermitian) -> Result<PositiveOperator> {
    project_extension_set_within(x, shape, target, DYKSTRA_MAX_SWEEPS)
}

/// As [`project_extension_set`] with a sweep budget; an unconverged projection is still
/// returned as a feasible (if not nearest) extension.
fn project_extension_set_within(
    x: &Hermitian,
    shape: BipartiteShape,
    target: &Hermitian,
    max_sweeps: usize,
) -> Result<PositiveOperator> {
    if let Some(face) = SupportFace::of(target, shape)? {
        let y = project_extension_set_within(&x.compress(&face.embedding), face.shape, &face.target, max_sweeps)?;
        return face.embed(&y);
    }
    let psd = |h: &Hermitian| project_psd(h);
    let marg = |h: &Hermitian| project_marginal(h, shape, target).unwrap_or_else(|_| h.clone());
    let y = match dykstra(&[&psd, &marg], x, DYKSTRA_TOL, max_sweeps) {
        Ok(y) => y,
        Err(Error::ProjectionNoConvergence { .. }) => x.clone(),
        Err(e) => return Err(e),
    };
    snap(y, shape, target)
}

/// Minimizes the measured divergence over extensions of `p.marginal`.
pub fn solve_extension(p: &ExtensionProblem, opts: &SolveOptions) -> Result<ExtensionReport> {
    opts.validate()?;
    check_hypotheses(p.direction, p.order)?;
    let g = match p.order {
        Order::Max => return solve_extension_dmax(&p.fixed_state, &p.marginal, p.shape, opts),
        Order::Generator(g) => g,
    };
    let (marginal_value, marginal_report) = marginal_divergence(p, &g, opts)?;

    if p.shape.dim_r == 1 {
        let ext = PositiveOperator::new(p.marginal.op().clone())?;
        let e = evaluate(p, &g, &ext, opts)?;
        let mut r = finish(ext, e.d, marginal_value, 0, vec![e.d], vec![e.d]);
        r.gap = 0.0;
        r.success = true;
        r.warning = None;
        return Ok(r);
    }
    if matches!(g.kind(), Kind::Renyi(a) if a == 0.0) {
        return order_zero_extension(p, &g, marginal_value, opts);
    }

    let mut y = p.initial_extension()?;
    let mut cur = evaluate(p, &g, &y, opts)?;
    let mut evaluated = vec![cur.d];
    let starts = [witness_extension(p, &g, &marginal_report), geometric_extension(p)];
    for w in starts.into_iter().flatten() {
        let e = evaluate(p, &g, &w, opts)?;
        evaluated.push(e.d);
        if e.finite && (!cur.finite || e.s < cur.s) {
            y = w;
            cur = e;
        }
    }
    descend(p, &g, y, cur, marginal_value, evaluated, opts)
}

/// Projected gradient descent from a given extension of `p.marginal`, without the witness start.
pub fn descend_from(p: &ExtensionProblem, start: &PositiveOperator, opts: &SolveOptions) -> Result<ExtensionReport> {
    opts.validate()?;
    check_hypotheses(p.direction, p.order)?;
    let Order::Generator(g) = p.order else {
        return Err(Error::InvalidParameter("descent needs a generator, not the max-divergence".into()));
    };
    p.shape.check(start.op())?;
    let marg = partial_trace(start.op(), p.shape, Keep::A)?;
    let defect = marg.sub(p.marginal.op()).frobenius_norm();
    if defect > 1e-8 {
        return Err(Error::InvalidParameter(format!("start is not an extension (marginal defect {defect:e})")));
    }
    let (marginal_value, _) = marginal_divergence(p, &g, opts)?;
    let cur = evaluate(p, &g, start, opts)?;
    let evaluated = vec![cur.d];
    descend(p, &g, start.clone(), cur, marginal_value, evaluated, opts)
}

fn descend(
    p: &ExtensionProblem,
    g: &FGenerator,
    mut y: PositiveOperator,
    mut cur: Evaluation,
    marginal_value: f64,
    mut evaluated: Vec<f64>,
    opts: &SolveOptions,
) -> Result<ExtensionReport> {
    let mut history = vec![cur.d];
    if !cur.finite {
        return Ok(finish(y, cur.d, marginal_value, 0, history, evaluated));
    }
    let target = p.marginal.op();
    let mut step = opts.step0;
    let mut iterations = 0;
    'outer: while iterations < MAX_OUTER_ITERATIONS {
        if gap_of(cur.d, marginal_value) <= TARGET_GAP {
            break;
        }
        let dir = tangent_to_marginal(&cur.gradient, p.shape)?;
        if dir.frobenius_norm() == 0.0 {
            break;
        }
        iterations += 1;
        loop {
            let trial = project_extension_set(&y.op().axpy(-step, &dir), p.shape, target)?;
            let e = evaluate(p, g, &trial, opts)?;
            evaluated.push(e.d);
            if e.finite && e.s < cur.s {
                y = trial;
                cur = e;
                history.push(cur.d);
                step = (step * 2.0).min(MAX_STEP);
                break;
            }
            step *= 0.5;
            if step < MIN_STEP {
                break 'outer;
            }
        }
    }
    Ok(finish(y, cur.d, marginal_value, iterations, history, evaluated))
}

/// Order 0 in the first argument: the divergence only sees the support projector of the
/// extension, and `rho_A (x) I/d_R` reproduces the marginal value exactly. The correlation-free
/// start is evaluated as well and the better of the two is returned.
fn order_zero_extension(
    p: &ExtensionProblem,
    g: &FGenerator,
    marginal_value: f64,
    opts: &SolveOptions,
) -> Result<ExtensionReport> {
    let dr = p.shape.dim_r;
    let flat = PositiveOperator::new(tensor(p.marginal.op(), &Hermitian::identity(dr).scale(1.0 / dr as f64)))?;
    let start = p.initial_extension()?;
    let e0 = evaluate(p, g, &start, opts)?;
    let e1 = evaluate(p, g, &flat, opts)?;
    let evaluated = vec![e0.d, e1.d];
    let (best, d) = if e1.d <= e0.d { (flat, e1.d) } else { (start, e0.d) };
    let history = vec![e0.d, e0.d.min(e1.d)];
    Ok(finish(best, d, marginal_value, 1, history, evaluated))
}

/// `{X : X >= rho/lambda, tr_R X = sigma_A}` is nonempty; returns a point of it.
///
/// Dykstra starts from the point of the affine set nearest to `rho/lambda`, namely
/// `rho/lambda + (sigma_A - rho_A/lambda) (x) I/d_R`. Starting from there keeps the verdict
/// sharp near the threshold, where the two sets become nearly tangent and the projections
/// would otherwise creep toward the intersection.
fn dmax_feasible(rho: &Hermitian, sigma_a: &Hermitian, shape: BipartiteShape, log_lambda: f64) -> Option<Hermitian> {
    let floor = rho.scale((-log_lambda).exp());
    let above = |h: &Hermitian| floor.add(&project_psd(&h.sub(&floor)));
    let marg = |h: &Hermitian| project_marginal(h, shape, sigma_a).unwrap_or_else(|_| h.clone());
    let start = marg(&floor);
    dykstra(&[&above, &marg], &start, DYKSTRA_TOL, DYKSTRA_MAX_SWEEPS).ok()
}

/// Max-divergence extension of `sigma_A`: the smallest `lambda` such that some extension `X`
/// satisfies `rho_AR <= lambda X`, found by bisection on `log lambda` over the feasibility of
/// the two convex constraints.
pub fn solve_extension_dmax(
    rho_ar: &PositiveOperator,
    sigma_a: &PositiveOperator,
    shape: BipartiteShape,
    opts: &SolveOptions,
) -> Result<ExtensionReport> {
    opts.validate()?;
    shape.check(rho_ar.op())?;
    if sigma_a.dim() != shape.dim_a {
        return Err(Error::DimensionMismatch { expected: shape.dim_a, found: sigma_a.dim() });
    }
    if !rho_ar.is_density() {
        return Err(Error::NotNormalized(rho_ar.trace()));
    }
    let rho_a = PositiveOperator::new(partial_trace(rho_ar.op(), shape, Keep::A)?)?;
    let marginal_value = dmax(&rho_a, sigma_a)?;
    let dr = shape.dim_r;
    let flat = tensor(sigma_a.op(), &Hermitian::identity(dr).scale(1.0 / dr as f64));
    let rho = rho_ar.op();
    let target = sigma_a.op();

    let mut evaluated = Vec::new();
    let trace = sigma_a.trace();
    if !(trace > 0.0) {
        let ext = PositiveOperator::new(flat)?;
        return Ok(finish(ext, f64::INFINITY, marginal_value, 0, vec![], evaluated));
    }
    let mut lo = -trace.ln();
    let mut hi = DMAX_CAP.ln();
    let mut x_hi = match dmax_feasible(rho, target, shape, hi) {
        Some(x) => x,
        None => {
            let ext = PositiveOperator::new(flat)?;
            return Ok(finish(ext, f64::INFINITY, marginal_value, 0, vec![], evaluated));
        }
    };
    let mut iterations = 0;
    if let Some(x) = dmax_feasible(rho, target, shape, lo) {
        hi = lo;
        x_hi = x;
    } else {
        while iterations < BISECTION_STEPS && hi - lo > 1e-12 * (1.0 + hi.abs()) {
            iterations += 1;
            let mid = 0.5 * (lo + hi);
            match dmax_feasible(rho, target, shape, mid) {
                Some(x) => {
                    hi = mid;
                    x_hi = x;
                }
                None => lo = mid,
            }
        }
    }
    evaluated.push(hi);
    let x = dmax_feasible(rho, target, shape, hi + DMAX_MARGIN.ln_1p()).unwrap_or(x_hi);
    let ext = snap(x, shape, target)?;
    Ok(finish(ext, hi, marginal_value, iterations, vec![hi], evaluated))
}

#[derive(Clone, Debug)]
pub struct CounterexampleReport {
    pub alpha: f64,
    pub cap: f64,
    /// `D_{M,alpha}(|0><0| || I/2)`.
    pub marginal_value: f64,
    /// Divergence of each sampled extension against the Bell state; `+inf` on support violation.
    pub values: Vec<f64>,
    /// Every sampled value exceeds `cap`.
    pub all_exceed: bool,
}

/// `|Phi><Phi|` for `|Phi> = (|00> + |11>)/sqrt 2`.
pub fn bell_state() -> Hermitian {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = C64::new(0.0, 0.0);
    Hermitian::from_ket(&[C64::new(s, 0.0), z, z, C64::new(s, 0.0)])
}

/// Samples extensions `|0><0| (x) tau` of a pure marginal and evaluates them against the Bell
/// state. For orders above one the marginal divergence is `log 2`, yet no extension comes close.
pub fn counterexample_probe(
    alpha: f64,
    cap: f64,
    samples: usize,
    seed: u64,
    opts: &SolveOptions,
) -> Result<CounterexampleReport> {
    if !(alpha > 1.0) {
        return Err(Error::InvalidParameter(format!("probe requires alpha > 1, got {alpha}")));
    }
    let zero = Hermitian::from_real_diagonal(&[1.0, 0.0]);
    let rho_a = PositiveOperator::new(zero.clone())?;
    let sigma_a = PositiveOperator::new(Hermitian::identity(2).scale(0.5))?;
    let marginal_value = measured_renyi(&rho_a, &sigma_a, alpha, opts)?;
    let bell = PositiveOperator::new(bell_state())?;
    let mut rng = rng_from_seed(seed);
    let mut values = Vec::with_capacity(samples);
    for k in 0..samples {
        let tau = random_density_with(2, 1 + k % 2, &mut rng);
        let ext = PositiveOperator::new(tensor(&zero, tau.op()))?;
        values.push(measured_renyi(&ext, &bell, alpha, opts)?);
    }
    let all_exceed = values.iter().all(|&v| v > cap);
    Ok(CounterexampleReport { alpha, cap, marginal_value, values, all_exceed })
}

#[derive(Clone, Debug)]
pub struct SupportFunctionReport {
    /// `tr[omega X]` at a feasible extension `omega` (a lower bound).
    pub primal: f64,
    /// `tr[sigma_A Lambda]` at a feasible `Lambda (x) I >= X` (an upper bound).
    pub dual: f64,
    pub omega: PositiveOperator,
    pub lambda: Hermitian,
}

impl SupportFunctionReport {
    pub fn gap(&self) -> f64 {
        self.dual - self.primal
    }

    pub fn value(&self) -> f64 {
        0.5 * (self.primal + self.dual)
    }
}

/// Dual objective `tr[sigma_A Lambda] + tr(sigma_A) lambda_max(X - Lambda (x) I)`, which is the
/// value of the feasible point obtained by shifting `Lambda` by the top eigenvalue.
fn dual_value(x: &Hermitian, sigma_a: &Hermitian, shape: BipartiteShape, lambda: &Hermitian) -> Result<(f64, Hermitian)> {
    let m = x.sub(&tensor(lambda, &Hermitian::identity(shape.dim_r)));
    let top = eig_hermitian(&m)?.max();
    let shifted = lambda.add_identity(top);
    Ok((sigma_a.inner(&shifted), shifted))
}

/// Log-sum-exp smoothing of the dual objective at temperature `mu`, with its gradient in `Lambda`
/// and the softmax-weighted spectral projector of `X - Lambda (x) I`.
fn smoothed_dual(
    x: &Hermitian,
    sigma_a: &Hermitian,
    shape: BipartiteShape,
    lambda: &Hermitian,
    mu: f64,
) -> Option<(f64, Hermitian, Hermitian)> {
    let c = sigma_a.trace();
    let m = x.sub(&tensor(lambda, &Hermitian::identity(shape.dim_r)));
    let e = eig_hermitian(&m).ok()?;
    let top = e.max();
    let w: Vec<f64> = e.values.iter().map(|&v| ((v - top) / mu).exp()).collect();
    let z: f64 = w.iter().sum();
    let weights: Vec<f64> = w.iter().map(|v| v / z).collect();
    let p = e.synthesize(&weights);
    let value = sigma_a.inner(lambda) + c * (top + mu * z.ln());
    let grad = sigma_a.sub(&partial_trace(&p, shape, Keep::A).ok()?.scale(c));
    Some((value, grad, p))
}

/// Support function of the extension set `{omega >= 0 : tr_R omega = sigma_A}` at `X`.
///
/// The dual `min { tr[sigma_A Lambda] : Lambda (x) I >= X }` is solved by smoothing the largest
/// eigenvalue with decreasing temperature. The softmax projector at the final temperature is
/// an approximate primal maximizer; it is projected onto the extension set and refined by
/// projected ascent on the linear objective. Both bounds are exact for the points returned.
pub fn support_function_extension_set(
    x: &Hermitian,
    sigma_a: &PositiveOperator,
    shape: BipartiteShape,
) -> Result<SupportFunctionReport> {
    support_function_core(x, sigma_a, shape, None)
}

/// As [`support_function_extension_set`], with the dual started from a known good `Lambda`
/// (the smoothing then starts at a low temperature).
pub fn support_function_extension_set_from(
    x: &Hermitian,
    sigma_a: &PositiveOperator,
    shape: BipartiteShape,
    lambda0: &Hermitian,
) -> Result<SupportFunctionReport> {
    support_function_core(x, sigma_a, shape, Some(lambda0))
}

fn support_function_core(
    x: &Hermitian,
    sigma_a: &PositiveOperator,
    shape: BipartiteShape,
    lambda0: Option<&Hermitian>,
) -> Result<SupportFunctionReport> {
    shape.check(x)?;
    if sigma_a.dim() != shape.dim_a {
        return Err(Error::DimensionMismatch { expected: shape.dim_a, found: sigma_a.dim() });
    }
    let da = shape.dim_a;
    let s = sigma_a.op();
    let c = sigma_a.trace();
    let scale = 1.0 + x.frobenius_norm();

    let mut lambda = match lambda0 {
        Some(l) if l.dim() == da => l.clone(),
        Some(l) => return Err(Error::DimensionMismatch { expected: da, found: l.dim() }),
        None => Hermitian::zeros(da),
    };
    let (mut best_dual, mut best_lambda) = dual_value(x, s, shape, &lambda)?;
    let mut projector = Hermitian::identity(shape.total()).scale(1.0 / shape.total() as f64);
    let ascent = AscentOptions { tol: 1e-12 * scale, max_iter: 2000, stall_limit: 10, ..AscentOptions::default() };
    let mut mu = if lambda0.is_some() { 1e-5 * scale } else { 0.1 * scale };
    while mu >= 1e-11 * scale {
        let f = |v: &[f64]| {
            let l = Hermitian::from_coords(da, v);
            match smoothed_dual(x, s, shape, &l, mu) {
                Some((val, grad, _)) => Eval::Point(-val, grad.scale(-1.0).to_coords()),
                None => Eval::Reject,
            }
        };
        let out = maximize(f, lambda.to_coords(), &ascent);
        if let Some(out) = out {
            lambda = Hermitian::from_coords(da, &out.x);
        }
        let (d, shifted) = dual_value(x, s, shape, &lambda)?;
        if d < best_dual {
            best_dual = d;
            best_lambda = shifted;
        }
        if let Some((_, _, p)) = smoothed_dual(x, s, shape, &lambda, mu) {
            projector = p;
        }
        mu *= 0.01;
    }

    let mut omega = project_extension_set(&projector.scale(c), shape, s)?;
    let mut primal = omega.op().inner(x);
    let mut step = 1.0 / scale;
    for _ in 0..REFINE_STEPS {
        let trial = project_extension_set_within(&omega.op().axpy(step, x), shape, s, REFINE_SWEEPS)?;
        let v = trial.op().inner(x);
        if v > primal {
            primal = v;
            omega = trial;
            step *= 2.0;
        } else {
            step *= 0.5;
            if step < 1e-12 / scale {
                break;
            }
        }
    }
    Ok(SupportFunctionReport { primal, dual: best_dual, omega, lambda: best_lambda })
}

#[derive(Clone, Debug)]
pub struct SubmultiplicativityReport {
    /// Lower bound on the support function of the joint extension set at `X1 (x) X2`.
    pub joint: f64,
    /// Upper bound on the product of the individual support functions.
    pub product: f64,
}

impl SubmultiplicativityReport {
    /// No certified violation: the joint lower bound does not exceed the product upper bound.
    pub fn holds(&self, slack: f64) -> bool {
        self.joint <= self.product + slack
    }
}

/// Compares `h_{B(sigma1 (x) sigma2)}(X1 (x) X2)` with `h_{B(sigma1)}(X1) h_{B(sigma2)}(X2)`.
///
/// The joint side is the value of a feasible joint extension (a lower bound) and the product
/// side multiplies feasible dual values (upper bounds), so `holds` fails only on a certified
/// violation. The joint dual is started from `Lambda1 (x) Lambda2`.
pub fn submultiplicativity_check(
    x1: &Hermitian,
    s1: BipartiteShape,
    sigma1: &PositiveOperator,
    x2: &Hermitian,
    s2: BipartiteShape,
    sigma2: &PositiveOperator,
) -> Result<SubmultiplicativityReport> {
    let h1 = support_function_extension_set(x1, sigma1, s1)?;
    let h2 = support_function_extension_set(x2, sigma2, s2)?;
    let (x12, s12) = tensor_bipartite(x1, s1, x2, s2)?;
    let sigma12 = PositiveOperator::new(tensor(sigma1.op(), sigma2.op()))?;
    let start = tensor(&h1.lambda, &h2.lambda);
    let h12 = support_function_extension_set_from(&x12, &sigma12, s12, &start)?;
    Ok(SubmultiplicativityReport { joint: h12.primal, product: h1.dual * h2.dual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{random_density, random_hermitian};

    fn shape22() -> BipartiteShape {
        BipartiteShape::new(2, 2).unwrap()
    }

    fn renyi(a: f64) -> Order {
        Order::renyi(a).unwrap()
    }

    #[test]
    fn hypotheses_follow_admissible_orders() {
        assert!(check_hypotheses(Direction::ExtendRho, renyi(0.25)).is_ok());
        assert!(check_hypotheses(Direction::ExtendRho, renyi(0.0)).is_ok());
        assert!(check_hypotheses(Direction::ExtendRho, renyi(2.0)).is_err());
        assert!(check_hypotheses(Direction::ExtendRho, Order::Generator(FGenerator::tv())).is_err());
        assert!(check_hypotheses(Direction::ExtendRho, Order::Generator(FGenerator::kl())).is_err());
        assert!(check_hypotheses(Direction::ExtendSigma, renyi(0.5)).is_ok());
        assert!(check_hypotheses(Direction::ExtendSigma, Order::Max).is_ok());
        assert!(check_hypotheses(Direction::ExtendSigma, Order::Generator(FGenerator::kl())).is_ok());
        assert!(check_hypotheses(Direction::ExtendSigma, renyi(0.3)).is_err());
        assert!(check_hypotheses(Direction::ExtendSigma, Order::Generator(FGenerator::tv())).is_err());
    }

    #[test]
    fn trivial_reference_system() {
        let shape = BipartiteShape::new(3, 1).unwrap();
        let fixed = random_density(3, 3, 1);
        let marginal = random_density(3, 3, 2);
        let p = ExtensionProblem::new(Direction::ExtendRho, fixed, marginal, shape, renyi(0.25)).unwrap();
        let r = solve_extension(&p, &SolveOptions::default()).unwrap();
        assert_eq!(r.gap, 0.0);
        assert!(r.success);
    }

    #[test]
    fn extend_rho_random_instance() {
        let sigma = random_density(4, 4, 3);
        let rho_a = random_density(2, 2, 4);
        let p = ExtensionProblem::new(Direction::ExtendRho, sigma, rho_a.clone(), shape22(), renyi(0.25)).unwrap();
        let r = solve_extension(&p, &SolveOptions::default()).unwrap();
        assert!(r.success, "gap {}", r.gap);
        assert!(r.dpi_holds());
        assert!(r.monotone());
        let marg = partial_trace(r.extension.op(), shape22(), Keep::A).unwrap();
        assert!(marg.sub(rho_a.op()).frobenius_norm() <= 1e-8);
    }

    #[test]
    fn extend_sigma_random_instance() {
        let rho = random_density(4, 4, 5);
        let sigma_a = random_density(2, 2, 6);
        let p = ExtensionProblem::new(Direction::ExtendSigma, rho, sigma_a, shape22(), renyi(2.0)).unwrap();
        let r = solve_extension(&p, &SolveOptions::default()).unwrap();
        assert!(r.success, "gap {}", r.gap);
        assert!(r.dpi_holds());
        assert!(r.monotone());
    }

    #[test]
    fn descent_from_uncorrelated_start_decreases() {
        let rho = random_density(4, 4, 21);
        let sigma_a = random_density(2, 2, 22);
        let p = ExtensionProblem::new(Direction::ExtendSigma, rho, sigma_a, shape22(), renyi(1.0)).unwrap();
        let start = p.initial_extension().unwrap();
        let opts = SolveOptions::default();
        let r = descend_from(&p, &start, &opts).unwrap();
        assert!(r.monotone());
        assert!(r.dpi_holds());
        assert!(r.iterations > 0);
        let first = r.history[0] - r.marginal_value;
        assert!(r.gap < 0.1 * first, "gap {} from {}", r.gap, first);
    }

    #[test]
    fn order_zero_flat_extension_closes_gap() {
        let sigma = random_density(4, 2, 7);
        let rho_a = random_density(2, 1, 8);
        let p = ExtensionProblem::new(Direction::ExtendRho, sigma, rho_a, shape22(), renyi(0.0)).unwrap();
        let r = solve_extension(&p, &SolveOptions::default()).unwrap();
        assert!(r.gap.abs() <= 1e-8, "gap {}", r.gap);
    }

    #[test]
    fn bell_marginal_extension_at_quarter() {
        let zero = PositiveOperator::new(Hermitian::from_real_diagonal(&[1.0, 0.0])).unwrap();
        let bell = PositiveOperator::new(bell_state()).unwrap();
        let p = ExtensionProblem::new(Direction::ExtendRho, bell, zero, shape22(), renyi(0.25)).unwrap();
        let r = solve_extension(&p, &SolveOptions::default()).unwrap();
        assert!((r.marginal_value - 2f64.ln()).abs() <= 1e-8, "marginal {}", r.marginal_value);
        assert!(r.success, "gap {}", r.gap);
    }

    #[test]
    fn dmax_product_extension_is_zero() {
        let rho_a = random_density(2, 2, 9);
        let tau = random_density(2, 2, 10);
        let rho = PositiveOperator::new(tensor(rho_a.op(), tau.op())).unwrap();
        let r = solve_extension_dmax(&rho, &rho_a, shape22(), &SolveOptions::default()).unwrap();
        assert!(r.achieved.abs() <= 1e-6, "value {}", r.achieved);
    }

    #[test]
    fn dmax_pure_marginal_against_maximally_mixed() {
        let tau = random_density(2, 2, 11);
        let rho = PositiveOperator::new(tensor(&Hermitian::from_real_diagonal(&[1.0, 0.0]), tau.op())).unwrap();
        let half = PositiveOperator::new(Hermitian::identity(2).scale(0.5)).unwrap();
        let r = solve_extension_dmax(&rho, &half, shape22(), &SolveOptions::default()).unwrap();
        assert!((r.achieved - 2f64.ln()).abs() <= 1e-4, "value {}", r.achieved);
    }

    #[test]
    fn dmax_random_matches_marginal_closed_form() {
        let rho = random_density(4, 4, 12);
        let sigma_a = random_density(2, 2, 13);
        let r = solve_extension_dmax(&rho, &sigma_a, shape22(), &SolveOptions::default()).unwrap();
        assert!(r.gap.abs() <= 1e-4, "gap {}", r.gap);
        let marg = partial_trace(r.extension.op(), shape22(), Keep::A).unwrap();
        assert!(marg.sub(sigma_a.op()).frobenius_norm() <= 1e-8);
    }

    #[test]
    fn counterexample_values_diverge() {
        let r = counterexample_probe(2.0, 10.0, 20, 1, &SolveOptions::default()).unwrap();
        assert!((r.marginal_value - 2f64.ln()).abs() <= 1e-8);
        assert!(r.all_exceed);
    }

    #[test]
    fn support_function_of_identity_is_trace() {
        let sigma_a = random_density(2, 2, 14).scale(1.7).unwrap();
        let r = support_function_extension_set(&Hermitian::identity(4), &sigma_a, shape22()).unwrap();
        assert!((r.dual - 1.7).abs() <= 1e-7 && (r.primal - 1.7).abs() <= 1e-7, "{r:?}");
    }

    #[test]
    fn support_function_of_product_with_identity() {
        let sigma_a = random_density(2, 2, 15);
        let l = random_density(2, 2, 16);
        let x = tensor(l.op(), &Hermitian::identity(2));
        let r = support_function_extension_set(&x, &sigma_a, shape22()).unwrap();
        let expect = sigma_a.op().inner(l.op());
        assert!((r.dual - expect).abs() <= 1e-6 && (r.primal - expect).abs() <= 1e-6, "{r:?} vs {expect}");
    }

    #[test]
    fn support_function_bounds_agree() {
        for seed in 0..5 {
            let x = random_hermitian(4, 100 + seed);
            let sigma_a = random_density(2, 2, 200 + seed);
            let r = support_function_extension_set(&x, &sigma_a, shape22()).unwrap();
            assert!(r.gap() >= -1e-9 && r.gap() <= 1e-5, "seed {seed}: {} {}", r.primal, r.dual);
        }
    }

    #[test]
    fn submultiplicative_on_psd_inputs() {
        let x1 = random_density(4, 4, 300).into_op();
        let x2 = random_density(4, 3, 301).into_op();
        let s1 = random_density(2, 2, 302);
        let s2 = random_density(2, 2, 303);
        let r = submultiplicativity_check(&x1, shape22(), &s1, &x2, shape22(), &s2).unwrap();
        assert!(r.holds(1e-6), "{r:?}");
    }
}
