//! Polar duality between the Umegaki relative entropy to a convex set and the measured
//! relative entropy to its polar.
//!
//! For a compact convex `C` of PSD operators, `D(rho||C) + D_M(rho||C°++) = D(rho||I)`, where
//! `C° = {X : tr[XY] <= 1 for all Y in C}` and `C°++` keeps its positive definite members.
//! Both sides are computed by independent first-order solvers for finite convex hulls.

use crate::closed_form::{relative_entropy_to_identity, umegaki};
use crate::error::{Error, Result};
use crate::generator::FGenerator;
use crate::linalg::functions::{frechet_adjoint, log_fn};
use crate::linalg::matrix::Hermitian;
use crate::linalg::positive::PositiveOperator;
use crate::linalg::projection::{dykstra, project_halfspace, project_psd_floor, Projection, DYKSTRA_MAX_SWEEPS, DYKSTRA_TOL};
use crate::optim::project_simplex;
use crate::variational::{measured_f_divergence, SolveOptions, SolveReport};

/// Eigenvalue floor that keeps polar iterates positive definite.
pub const POSITIVITY_FLOOR: f64 = 1e-9;
/// Gradient-mapping norm at which the hull descent stops.
pub const HULL_TOL: f64 = 1e-8;
pub const DUALITY_TOL: f64 = 1e-4;
const MAX_ITERATIONS: usize = 2000;
const MIN_STEP: f64 = 1e-14;
/// Polar iterates whose smallest eigenvalue is within this factor of the floor are flagged.
const FLOOR_FLAG: f64 = 10.0;

/// Convex hull of finitely many PSD operators of equal dimension.
#[derive(Clone, Debug)]
pub struct HullSet {
    generators: Vec<PositiveOperator>,
}

impl HullSet {
    pub fn new(generators: Vec<PositiveOperator>) -> Result<Self> {
        let first = generators.first().ok_or_else(|| Error::InvalidParameter("hull needs a generator".into()))?;
        let n = first.dim();
        if let Some(bad) = generators.iter().find(|g| g.dim() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: bad.dim() });
        }
        Ok(HullSet { generators })
    }

    pub fn generators(&self) -> &[PositiveOperator] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.generators[0].dim()
    }

    /// `sum_i w_i Y_i`.
    pub fn mixture(&self, w: &[f64]) -> Hermitian {
        self.generators
            .iter()
            .zip(w)
            .fold(Hermitian::zeros(self.dim()), |acc, (y, &wi)| acc.axpy(wi, y.op()))
    }

    /// `h_C(omega) = max_i tr[Y_i omega]`.
    pub fn support_function(&self, omega: &Hermitian) -> f64 {
        self.generators.iter().map(|y| y.op().inner(omega)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest constraint value `max_i tr[X Y_i]`; `X` is in the polar set iff this is at most one.
    pub fn polar_load(&self, x: &Hermitian) -> f64 {
        self.support_function(x)
    }

    /// The hull of `c Y_i`.
    pub fn scaled(&self, c: f64) -> Result<HullSet> {
        if !(c > 0.0) {
            return Err(Error::InvalidParameter(format!("scale must be positive, got {c}")));
        }
        HullSet::new(self.generators.iter().map(|g| g.scale(c)).collect::<Result<_>>()?)
    }
}

#[derive(Clone, Debug)]
pub struct HullReport {
    /// `D(rho||C)`.
    pub value: f64,
    /// Mixture weights of the minimizer.
    pub weights: Vec<f64>,
    pub iterations: usize,
    /// Objective after each accepted step.
    pub history: Vec<f64>,
    /// Gradient-mapping norm at the returned weights.
    pub stationarity: f64,
    pub converged: bool,
}

/// `D(rho||sigma_w)` and its gradient in `w`; `None` on a support violation.
fn hull_objective(rho: &PositiveOperator, c: &HullSet, w: &[f64]) -> Option<(f64, Vec<f64>)> {
    let sigma = PositiveOperator::new(c.mixture(w)).ok()?;
    let value = umegaki(rho, &sigma).ok()?;
    if !value.is_finite() {
        return None;
    }
    // d/dw_i of -tr[rho log sigma_w] = -tr[Y_i Dlog(sigma_w)[rho]]; restricted to supp sigma_w
    let v = sigma.support_isometry();
    let sc = sigma.op().compress(&v);
    let rc = rho.op().compress(&v);
    let g = frechet_adjoint(&sc, &log_fn(), &rc).ok()?;
    let grad = c.generators().iter().map(|y| -y.op().compress(&v).inner(&g)).collect();
    Some((value, grad))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn gradient_mapping(w: &[f64], grad: &[f64]) -> f64 {
    let t: Vec<f64> = w.iter().zip(grad).map(|(a, b)| a - b).collect();
    let p = project_simplex(&t);
    norm(&w.iter().zip(&p).map(|(a, b)| a - b).collect::<Vec<_>>())
}

/// `D(rho||C) = min_w D(rho || sum_i w_i Y_i)` by projected gradient on the simplex.
pub fn umegaki_to_hull(rho: &PositiveOperator, c: &HullSet, opts: &SolveOptions) -> Result<HullReport> {
    opts.validate()?;
    if rho.dim() != c.dim() {
        return Err(Error::DimensionMismatch { expected: c.dim(), found: rho.dim() });
    }
    if !rho.is_density() {
        return Err(Error::NotNormalized(rho.trace()));
    }
    let k = c.len();
    if k == 1 {
        let value = umegaki(rho, &c.generators()[0])?;
        return Ok(HullReport {
            value,
            weights: vec![1.0],
            iterations: 0,
            history: vec![value],
            stationarity: 0.0,
            converged: true,
        });
    }
    let mut w = vec![1.0 / k as f64; k];
    let Some((mut value, mut grad)) = hull_objective(rho, c, &w) else {
        // the uniform mixture has the largest support of all mixtures
        return Ok(HullReport {
            value: f64::INFINITY,
            weights: w,
            iterations: 0,
            history: vec![f64::INFINITY],
            stationarity: f64::NAN,
            converged: true,
        });
    };
    let mut history = vec![value];
    let mut step = 1.0;
    let mut iterations = 0;
    let mut stationarity = gradient_mapping(&w, &grad);
    while stationarity > HULL_TOL && iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut accepted = false;
        while step >= MIN_STEP {
            let trial: Vec<f64> = w.iter().zip(&grad).map(|(a, b)| a - step * b).collect();
            let wn = project_simplex(&trial);
            let dw: Vec<f64> = wn.iter().zip(&w).map(|(a, b)| a - b).collect();
            let model = value + dw.iter().zip(&grad).map(|(a, b)| a * b).sum::<f64>() + norm(&dw).powi(2) / (2.0 * step);
            if let Some((vn, gn)) = hull_objective(rho, c, &wn) {
                if vn <= model && vn <= value {
                    w = wn;
                    value = vn;
                    grad = gn;
                    history.push(value);
                    accepted = true;
                    step *= 2.0;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        stationarity = gradient_mapping(&w, &grad);
    }
    Ok(HullReport { value, weights: w, iterations, history, stationarity, converged: stationarity <= HULL_TOL })
}

#[derive(Clone, Debug)]
pub struct PolarReport {
    /// `D_M(rho||X)` at the returned `X`.
    pub value: f64,
    pub x: PositiveOperator,
    pub iterations: usize,
    pub history: Vec<f64>,
    /// Smallest eigenvalue of `X` is within a small factor of the positivity floor.
    pub at_floor: bool,
    /// Polar constraint values `tr[X Y_i]`.
    pub loads: Vec<f64>,
    pub converged: bool,
}

/// Makes `x` polar-feasible exactly: eigenvalues at least the floor, then a contraction toward
/// `floor I` until every `tr[X Y_i] <= 1`.
fn enforce_polar(x: &Hermitian, c: &HullSet) -> Hermitian {
    let n = x.dim();
    let y = project_psd_floor(x, POSITIVITY_FLOOR);
    let base = Hermitian::identity(n).scale(POSITIVITY_FLOOR);
    let excess = y.sub(&base);
    let mut kappa: f64 = 1.0;
    for g in c.generators() {
        let fixed = POSITIVITY_FLOOR * g.trace();
        let var = excess.inner(g.op());
        if fixed + var > 1.0 && var > 0.0 {
            kappa = kappa.min(((1.0 - fixed) / var).max(0.0));
        }
    }
    base.add(&excess.scale(kappa))
}

fn project_polar(x: &Hermitian, c: &HullSet) -> Hermitian {
    let halfspaces: Vec<Box<dyn Fn(&Hermitian) -> Hermitian + '_>> = c
        .generators()
        .iter()
        .map(|g| Box::new(move |h: &Hermitian| project_halfspace(h, g.op(), 1.0)) as Box<dyn Fn(&Hermitian) -> Hermitian>)
        .collect();
    let floor = |h: &Hermitian| project_psd_floor(h, POSITIVITY_FLOOR);
    let mut sets: Vec<Projection<'_>> = halfspaces.iter().map(|b| b.as_ref() as Projection<'_>).collect();
    sets.push(&floor);
    let y = dykstra(&sets, x, DYKSTRA_TOL, DYKSTRA_MAX_SWEEPS).unwrap_or_else(|_| x.clone());
    enforce_polar(&y, c)
}

fn measured_kl(rho: &PositiveOperator, x: &Hermitian, opts: &SolveOptions) -> Result<(SolveReport, PositiveOperator)> {
    let xp = PositiveOperator::new(x.clone())?;
    let r = measured_f_divergence(rho, &xp, &FGenerator::kl(), opts)?;
    Ok((r, xp))
}

/// `D_M(rho||C°++) = inf { D_M(rho||X) : X > 0, tr[X Y_i] <= 1 }` by projected gradient descent,
/// with the gradient `-exp(omega* - 1)` read off the optimal witness.
pub fn measured_kl_to_polar(rho: &PositiveOperator, c: &HullSet, opts: &SolveOptions) -> Result<PolarReport> {
    opts.validate()?;
    if rho.dim() != c.dim() {
        return Err(Error::DimensionMismatch { expected: c.dim(), found: rho.dim() });
    }
    if !rho.is_density() {
        return Err(Error::NotNormalized(rho.trace()));
    }
    let n = c.dim();
    let top = c.generators().iter().map(|g| g.trace()).fold(0.0, f64::max);
    if !(top > 0.0) {
        return Err(Error::InvalidParameter("hull generators must not all vanish".into()));
    }
    let mut x = enforce_polar(&Hermitian::identity(n).scale(1.0 / top), c);
    let (mut report, mut xp) = measured_kl(rho, &x, opts)?;
    let mut history = vec![report.value];
    let mut step = 1.0;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITERATIONS {
        let grad = &report.sigma_gradient;
        let full = project_polar(&x.axpy(-1.0, grad), c);
        if full.sub(&x).frobenius_norm() <= HULL_TOL {
            converged = true;
            break;
        }
        iterations += 1;
        let mut accepted = false;
        while step >= MIN_STEP {
            let trial = project_polar(&x.axpy(-step, grad), c);
            let (r, tp) = measured_kl(rho, &trial, opts)?;
            if r.finite && r.value < report.value {
                x = trial;
                xp = tp;
                report = r;
                history.push(report.value);
                accepted = true;
                step = (step * 2.0).min(1e3);
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            converged = true;
            break;
        }
    }
    let low = xp.eig().min();
    let loads = c.generators().iter().map(|g| g.op().inner(&x)).collect();
    Ok(PolarReport {
        value: report.value,
        x: xp,
        iterations,
        history,
        at_floor: low <= FLOOR_FLAG * POSITIVITY_FLOOR,
        loads,
        converged,
    })
}

#[derive(Clone, Debug)]
pub struct DualityReport {
    /// `D(rho||C)`.
    pub hull: f64,
    /// `D_M(rho||C°++)`.
    pub polar: f64,
    /// `D(rho||I) = tr[rho log rho]`.
    pub reference: f64,
    pub gap: f64,
    pub success: bool,
    /// The polar minimizer sits at the positivity floor.
    pub floor_limited: bool,
}

/// `|D(rho||C) + D_M(rho||C°++) - D(rho||I)|` with both terms from independent solvers.
pub fn duality_check(rho: &PositiveOperator, c: &HullSet, opts: &SolveOptions) -> Result<DualityReport> {
    let h = umegaki_to_hull(rho, c, opts)?;
    let p = measured_kl_to_polar(rho, c, opts)?;
    let reference = relative_entropy_to_identity(rho);
    let gap = (h.value + p.value - reference).abs();
    let gap = if gap.is_nan() { f64::INFINITY } else { gap };
    Ok(DualityReport {
        hull: h.value,
        polar: p.value,
        reference,
        gap,
        success: gap <= DUALITY_TOL,
        floor_limited: p.at_floor,
    })
}
