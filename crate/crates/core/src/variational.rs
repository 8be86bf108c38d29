//! Measured f-divergences via the variational expression over Hermitian witnesses.
//!
//! `S_{M,f}(rho||sigma) = sup { tr[rho psi(gamma)] - tr[sigma f*(psi(gamma))] : spec(gamma) in J }`.
//! The constraint on the spectrum is removed by writing `gamma = phi_J(X)` eigenvalue-wise for an
//! unconstrained Hermitian `X`, and the resulting smooth objective is maximized by L-BFGS ascent.
//! Generators with a compact `J` (total variation) are instead handled by projected ascent
//! directly in `gamma`.

use crate::closed_form::dmax;
use crate::error::{Error, Result};
use num_complex::Complex64 as C64;

use crate::generator::{classical_f_divergence, FGenerator, Kind};
use crate::linalg::eigen::{eig_hermitian, EigenDecomposition};
use crate::linalg::functions::{divided_differences, Smooth};
use crate::linalg::matrix::{CMatrix, Hermitian};
use crate::linalg::positive::PositiveOperator;
use crate::measurement::{
    fine_angles, hill_climb, pair_polish, induced_distributions, pvm_from_witness, Measurement, MeasurementKind,
};
use crate::optim::{maximize, AscentOptions, Eval, Termination};

/// Eigenvalues of the unconstrained witness beyond this magnitude are rejected (overflow guard).
pub const EXP_GUARD: f64 = 700.0;
/// Box used by the per-eigenvalue warm start.
const WARM_START_BOX: f64 = 30.0;
/// Order used to approach the order-0 divergence through a smooth solve.
pub const ORDER_ZERO_PROXY: f64 = 1e-3;
/// Sweep cap for the measurement polish after an ascent that stopped short of the gradient tolerance.
const POLISH_SWEEPS: usize = 200;

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    /// Gradient-norm tolerance.
    pub tol: f64,
    pub max_iter: usize,
    pub step0: f64,
    /// Values above this are reported as `+inf`.
    pub cap: f64,
    pub seed: u64,
    /// Require `tr rho = 1`.
    pub require_normalized: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-9, max_iter: 5000, step0: 1.0, cap: 1e6, seed: 0, require_normalized: true }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !(self.cap > 0.0) || !(self.step0 > 0.0) {
            return Err(Error::InvalidParameter("tol, cap and step0 must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    /// `S_{M,f}(rho||sigma)`, `+inf` when `finite` is false.
    pub value: f64,
    /// Maximizing `gamma`, spectrum in `J`.
    pub witness_gamma: Hermitian,
    /// `psi(gamma)`, spectrum in the closure of `dom(f*)`.
    pub witness_omega: Hermitian,
    pub iterations: usize,
    pub grad_norm: f64,
    pub finite: bool,
    pub termination: Termination,
    /// Gradient of the value in `rho` (`omega` on the joint support, zero elsewhere).
    pub rho_gradient: Hermitian,
    /// Gradient of the value in `sigma` (`-f*(omega)` on the joint support, zero elsewhere).
    pub sigma_gradient: Hermitian,
}

impl SolveReport {
    /// Infinite report for a support violation; the witness has the kernel of `sigma` as an
    /// eigenspace, so its PVM detects the violation.
    fn separating(sigma: &PositiveOperator, g: &FGenerator) -> Self {
        let n = sigma.dim();
        let mut r = SolveReport::infinite(n, g);
        let j = g.psi_interval().interior_point();
        let k = if j == 0.0 { 1.0 } else { 2.0 * j };
        let kernel = Hermitian::identity(n).sub(&sigma.support_projector());
        r.witness_gamma = r.witness_gamma.axpy(k - j, &kernel);
        r.witness_omega = r.witness_omega.axpy(g.psi(k) - g.psi(j), &kernel);
        r
    }

    fn infinite(n: usize, g: &FGenerator) -> Self {
        let j = g.psi_interval().interior_point();
        SolveReport {
            value: f64::INFINITY,
            witness_gamma: Hermitian::identity(n).scale(j),
            witness_omega: Hermitian::identity(n).scale(g.psi(j)),
            iterations: 0,
            grad_norm: f64::NAN,
            finite: false,
            termination: Termination::Diverged,
            rho_gradient: Hermitian::zeros(n),
            sigma_gradient: Hermitian::zeros(n),
        }
    }
}

fn check_inputs(rho: &PositiveOperator, sigma: &PositiveOperator, opts: &SolveOptions) -> Result<()> {
    opts.validate()?;
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: sigma.dim() });
    }
    if opts.require_normalized && !rho.is_density() {
        return Err(Error::NotNormalized(rho.trace()));
    }
    Ok(())
}

/// Computes `S_{M,f}(rho||sigma)` for a registry generator.
pub fn measured_f_divergence(
    rho: &PositiveOperator,
    sigma: &PositiveOperator,
    g: &FGenerator,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    check_inputs(rho, sigma, opts)?;
    match g.kind() {
        Kind::Tv => Ok(solve_compact(rho, sigma, opts)),
        Kind::Renyi(a) if a == 0.0 => order_zero(rho, sigma, opts),
        _ => solve_smooth(rho, sigma, g, opts),
    }
}

/// The objective `F(X) = tr[rho a(X)] - tr[sigma b(X)]` and its gradient, in compressed coordinates.
///
/// `rho` and `sigma` enter through Hermitian square roots, so their diagonals in the eigenbasis
/// of `X` are squared norms and never pick up negative round-off. Otherwise a kernel direction
/// could carry a `-1e-17` weight that the exponentials amplify into a spurious gain.
struct Objective {
    g: FGenerator,
    rho_root: CMatrix,
    sigma_root: CMatrix,
}

fn psd_root(h: &Hermitian) -> Result<CMatrix> {
    let e = eig_hermitian(h)?;
    let d: Vec<f64> = e.values.iter().map(|&v| v.max(0.0).sqrt()).collect();
    Ok(e.synthesize(&d).into_matrix())
}

impl Objective {
    fn new(g: FGenerator, rho: &Hermitian, sigma: &Hermitian) -> Result<Self> {
        Ok(Objective { g, rho_root: psd_root(rho)?, sigma_root: psd_root(sigma)? })
    }

    fn evaluate(&self, x: &Hermitian) -> Option<(f64, Hermitian, EigenDecomposition)> {
        let e = eig_hermitian(x).ok()?;
        if e.values.iter().any(|v| v.abs() > EXP_GUARD) {
            return None;
        }
        let g = self.g;
        let u = &e.vectors;
        let rm = self.rho_root.matmul(u);
        let sm = self.sigma_root.matmul(u);
        let rt = rm.adjoint().matmul(&rm);
        let st = sm.adjoint().matmul(&sm);
        let n = e.dim();
        let mut value = 0.0;
        for k in 0..n {
            value += g.a(e.values[k]).0 * rt[(k, k)].re - g.b(e.values[k]).0 * st[(k, k)].re;
        }
        if !value.is_finite() {
            return None;
        }
        let af = Smooth::new(move |t| g.a(t).0, move |t| g.a(t).1);
        let bf = Smooth::new(move |t| g.b(t).0, move |t| g.b(t).1);
        let da = divided_differences(&e.values, &af);
        let db = divided_differences(&e.values, &bf);
        let mut inner = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inner[(i, j)] = rt[(i, j)] * da[i][j] - st[(i, j)] * db[i][j];
            }
        }
        let grad = Hermitian::new(u.matmul(&inner).matmul(&u.adjoint())).ok()?;
        Some((value, grad, e))
    }
}

/// Maximizer of `p a(x) - q b(x)` over `|x| <= WARM_START_BOX`; the derivative changes sign once.
fn scalar_argmax(g: &FGenerator, p: f64, q: f64) -> f64 {
    let d = |x: f64| p * g.a(x).1 - q * g.b(x).1;
    let (mut lo, mut hi) = (-WARM_START_BOX, WARM_START_BOX);
    if d(lo) <= 0.0 {
        return lo;
    }
    if d(hi) >= 0.0 {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if d(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * (1.0 + lo.abs()) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Classical optimum in the eigenbasis of `sigma`, lifted to a Hermitian starting point.
fn warm_start(g: &FGenerator, rho: &Hermitian, sigma: &Hermitian) -> Result<Hermitian> {
    let e = eig_hermitian(sigma)?;
    let u = &e.vectors;
    let rt = u.adjoint().matmul(rho.matrix()).matmul(u);
    let xs: Vec<f64> = (0..e.dim()).map(|k| scalar_argmax(g, rt[(k, k)].re.max(0.0), e.values[k].max(0.0))).collect();
    Ok(e.synthesize(&xs))
}

fn solve_smooth(
    rho: &PositiveOperator,
    sigma: &PositiveOperator,
    g: &FGenerator,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    let n = rho.dim();
    if g.recession_slope().is_infinite() && !rho.support_within(sigma) {
        return Ok(SolveReport::separating(sigma, g));
    }
    // restrict to the joint support
    let joint = PositiveOperator::new(rho.op().add(sigma.op()))?;
    let v = joint.support_isometry();
    let m = v.cols();
    let rc = rho.op().compress(&v);
    let sc = sigma.op().compress(&v);
    let obj = Objective::new(*g, &rc, &sc)?;

    let x0 = warm_start(g, &rc, &sc)?;
    let ascent = AscentOptions {
        tol: opts.tol,
        max_iter: opts.max_iter,
        step0: opts.step0,
        cap: opts.cap,
        ..AscentOptions::default()
    };
    let f = |c: &[f64]| match obj.evaluate(&Hermitian::from_coords(m, c)) {
        Some((v, gr, _)) => Eval::Point(v, gr.to_coords()),
        None => Eval::Reject,
    };
    let out = maximize(f, x0.to_coords(), &ascent)
        .ok_or_else(|| Error::InvalidParameter("warm start outside the usable region".into()))?;
    if out.termination == Termination::Diverged || out.value > opts.cap {
        let mut r = SolveReport::infinite(n, g);
        r.iterations = out.iterations;
        return Ok(r);
    }
    let xs = Hermitian::from_coords(m, &out.x);
    let (mut value, _, e) = obj.evaluate(&xs).expect("accepted iterate is evaluable");
    if out.termination != Termination::Gradient {
        // the supremum may only be approached at the boundary; the witness eigenbasis read as a
        // measurement and polished is a second lower bound, and the larger one is kept
        let basis = v.matmul(&e.vectors);
        let full = complete_basis(&basis);
        let (_, paired) = pair_polish(rho, sigma, g, full, POLISH_SWEEPS);
        let (polished, _) = hill_climb(rho, sigma, g, paired, &fine_angles(), POLISH_SWEEPS);
        if polished.is_finite() && polished > value {
            value = polished;
        }
    }
    let re = g.reparam();
    let gam: Vec<f64> = e.values.iter().map(|&t| re.gamma(t)).collect();
    let om: Vec<f64> = e.values.iter().map(|&t| g.a(t).0).collect();
    let fs: Vec<f64> = e.values.iter().map(|&t| -g.b(t).0).collect();
    let gamma_c = e.synthesize(&gam);
    let omega_c = e.synthesize(&om);
    let sgrad_c = e.synthesize(&fs);
    let fill = re.gamma(0.0);
    let mut report = SolveReport {
        value,
        witness_gamma: lift(&gamma_c, &v, fill),
        witness_omega: lift(&omega_c, &v, g.psi(fill)),
        iterations: out.iterations,
        grad_norm: out.grad_norm,
        finite: true,
        termination: out.termination,
        rho_gradient: lift(&omega_c, &v, 0.0),
        sigma_gradient: lift(&sgrad_c, &v, 0.0),
    };
    for face in [rho, sigma] {
        if face.rank() == 0 || face.rank() >= m {
            continue;
        }
        if let Some(c) = face_candidate(rho, sigma, g, opts, &v, &face.support_isometry(), std::ptr::eq(face, rho))? {
            if c.value > report.value {
                report.value = c.value;
                report.witness_gamma = c.witness_gamma;
                report.witness_omega = c.witness_omega;
                report.rho_gradient = c.rho_gradient;
                report.sigma_gradient = c.sigma_gradient;
            }
        }
    }
    Ok(report)
}

/// Lower bound from a face of the joint support: the measured value of the compressions to the
/// subspace `W`, plus the single outcome `P - W W^dagger` (`P` the joint-support projector).
///
/// When the optimal measurement has outcomes inside the kernel of one argument, the witness
/// of the full problem diverges and the ascent approaches the supremum slowly; on the face
/// those outcomes are fixed and the remaining problem has an interior optimum.
fn face_candidate(
    rho: &PositiveOperator,
    sigma: &PositiveOperator,
    g: &FGenerator,
    opts: &SolveOptions,
    joint: &CMatrix,
    w: &CMatrix,
    rho_face: bool,
) -> Result<Option<SolveReport>> {
    let n = rho.dim();
    let rw = PositiveOperator::new(rho.op().compress(w))?;
    let sw = PositiveOperator::new(sigma.op().compress(w))?;
    let sub = SolveOptions { require_normalized: false, ..*opts };
    let r = solve_smooth(&rw, &sw, g, &sub)?;
    if !r.finite {
        return Ok(None);
    }
    let pj = Hermitian::new(joint.matmul(&joint.adjoint()))?;
    let pw = Hermitian::new(w.matmul(&w.adjoint()))?;
    let rest = pj.sub(&pw);
    // the face argument has no mass on the rest by construction; its round-off would be
    // amplified by the cusp of `f` at the boundary
    let mass = |x: &PositiveOperator| x.op().inner(&rest).max(0.0);
    let (p, q) = if rho_face { (0.0, mass(sigma)) } else { (mass(rho), 0.0) };
    let tail = g.perspective(p, q);
    if !tail.is_finite() {
        return Ok(None);
    }
    let x = scalar_argmax(g, p, q);
    let re = g.reparam();
    let outside = Hermitian::identity(n).sub(&pj);
    let embed = |h: &Hermitian| Hermitian::new(w.matmul(h.matrix()).matmul(&w.adjoint())).expect("square");
    let fill = re.gamma(0.0);
    Ok(Some(SolveReport {
        value: r.value + tail,
        witness_gamma: embed(&r.witness_gamma).add(&rest.scale(re.gamma(x))).add(&outside.scale(fill)),
        witness_omega: embed(&r.witness_omega).add(&rest.scale(g.a(x).0)).add(&outside.scale(g.psi(fill))),
        rho_gradient: embed(&r.rho_gradient).add(&rest.scale(g.a(x).0)),
        sigma_gradient: embed(&r.sigma_gradient).add(&rest.scale(-g.b(x).0)),
        ..r
    }))
}

/// Extends orthonormal columns to a unitary (Gram-Schmidt against the standard basis).
fn complete_basis(v: &CMatrix) -> CMatrix {
    let n = v.rows();
    let mut cols: Vec<Vec<C64>> = (0..v.cols()).map(|k| v.column(k)).collect();
    for i in 0..n {
        if cols.len() == n {
            break;
        }
        let mut w = vec![C64::new(0.0, 0.0); n];
        w[i] = C64::new(1.0, 0.0);
        for c in &cols {
            let proj: C64 = c.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in w.iter_mut().zip(c) {
                *x -= proj * y;
            }
        }
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            cols.push(w.into_iter().map(|z| z / norm).collect());
        }
    }
    CMatrix::from_fn(n, n, |i, j| cols[j][i])
}

/// `V X V^dagger + fill (I - V V^dagger)`.
fn lift(x: &Hermitian, v: &CMatrix, fill: f64) -> Hermitian {
    let n = v.rows();
    let embedded = Hermitian::new(v.matmul(x.matrix()).matmul(&v.adjoint())).expect("square");
    if fill == 0.0 || v.cols() == n {
        return embedded;
    }
    let proj = Hermitian::new(v.matmul(&v.adjoint())).expect("square");
    embedded.add(&Hermitian::identity(n).sub(&proj).scale(fill))
}

/// Total variation: projected ascent on `tr[(rho - sigma) gamma]` over `-I/2 <= gamma <= I/2`.
fn solve_compact(rho: &PositiveOperator, sigma: &PositiveOperator, opts: &SolveOptions) -> SolveReport {
    let n = rho.dim();
    let grad = rho.op().sub(sigma.op());
    let clip = |x: &Hermitian| {
        let e = eig_hermitian(x).expect("Hermitian input");
        let d: Vec<f64> = e.values.iter().map(|&t| t.clamp(-0.5, 0.5)).collect();
        e.synthesize(&d)
    };
    let mut gamma = Hermitian::zeros(n);
    let mut value = 0.0;
    let mut t = opts.step0;
    let mut iterations = 0;
    let mut mapping = f64::INFINITY;
    while iterations < opts.max_iter {
        iterations += 1;
        let next = clip(&gamma.axpy(t, &grad));
        let nv = grad.inner(&next);
        let step = next.sub(&gamma).frobenius_norm();
        mapping = step / t;
        if nv >= value {
            gamma = next;
            value = nv;
        }
        if mapping <= opts.tol || step <= 1e-15 {
            break;
        }
        t *= 4.0;
    }
    let termination = if mapping <= opts.tol { Termination::Gradient } else { Termination::Stalled };
    SolveReport {
        value,
        witness_gamma: gamma.clone(),
        witness_omega: gamma,
        iterations,
        grad_norm: mapping,
        finite: true,
        termination,
        rho_gradient: Hermitian::zeros(n),
        sigma_gradient: Hermitian::zeros(n),
    }
}

/// Order 0: `S = -min_M sigma-mass on the support of the induced rho-distribution`.
///
/// Two candidate measurements are compared: the eigenbasis of a smooth solve at order
/// `ORDER_ZERO_PROXY` and the two-outcome measurement onto the support of `rho` and its
/// complement. The smaller mass wins.
fn order_zero(rho: &PositiveOperator, sigma: &PositiveOperator, opts: &SolveOptions) -> Result<SolveReport> {
    let n = rho.dim();
    let proxy = solve_smooth(rho, sigma, &FGenerator::renyi(ORDER_ZERO_PROXY)?, opts)?;
    let rounded = pvm_from_witness(&proxy.witness_omega)?;
    let v_rounded = -support_mass(rho, sigma, &rounded)?;

    let pi = rho.support_projector();
    // eigenvalues -1 on the support and -2 off it: the eigenprojectors are the support split
    let split = Hermitian::identity(n).scale(-2.0).add(&pi);
    let support_pvm = pvm_from_witness(&split)?;
    let v_support = -support_mass(rho, sigma, &support_pvm)?;

    let (value, witness) = if v_support >= v_rounded { (v_support, split) } else { (v_rounded, proxy.witness_omega) };
    Ok(SolveReport {
        value,
        witness_gamma: witness.clone(),
        witness_omega: witness,
        iterations: proxy.iterations,
        grad_norm: proxy.grad_norm,
        finite: true,
        termination: proxy.termination,
        rho_gradient: Hermitian::zeros(n),
        sigma_gradient: pi.scale(-1.0),
    })
}

/// `sigma`-mass of the outcomes whose `rho`-probability exceeds the rank tolerance of `rho`.
fn support_mass(rho: &PositiveOperator, sigma: &PositiveOperator, m: &Measurement) -> Result<f64> {
    let (p, q) = induced_distributions(rho, sigma, m)?;
    let cut = rho.rank_tol() * rho.dim() as f64;
    Ok(p.weights().iter().zip(q.weights()).filter(|(a, _)| **a > cut).map(|(_, b)| b).sum())
}

/// Measured Renyi divergence together with the underlying solve (absent for order `inf`).
#[derive(Clone, Debug)]
pub struct RenyiOutcome {
    pub divergence: f64,
    pub report: Option<SolveReport>,
}

/// `D_{M,alpha}(rho||sigma)` for `alpha` in `[0, inf]`.
pub fn measured_renyi_report(
    rho: &PositiveOperator,
    sigma: &PositiveOperator,
    alpha: f64,
    opts: &SolveOptions,
) -> Result<RenyiOutcome> {
    if alpha == f64::INFINITY {
        check_inputs(rho, sigma, opts)?;
        return Ok(RenyiOutcome { divergence: dmax(rho, sigma)?, report: None });
    }
    let g = FGenerator::renyi(alpha)?;
    let report = measured_f_divergence(rho, sigma, &g, opts)?;
    let divergence = if report.finite { g.divergence_from_value(report.value) } else { f64::INFINITY };
    Ok(RenyiOutcome { divergence, report: Some(report) })
}

pub fn measured_renyi(rho: &PositiveOperator, sigma: &PositiveOperator, alpha: f64, opts: &SolveOptions) -> Result<f64> {
    Ok(measured_renyi_report(rho, sigma, alpha, opts)?.divergence)
}

/// Classical value of the PVM formed by the eigenprojectors of the witness.
/// At an optimum this equals `report.value`.
pub fn optimal_measurement_value_check(
    rho: &PositiveOperator,
    sigma: &PositiveOperator,
    g: &FGenerator,
    report: &SolveReport,
) -> Result<f64> {
    let m = witness_measurement(report)?;
    let (p, q) = induced_distributions(rho, sigma, &m)?;
    classical_f_divergence(&p, &q, g)
}

/// The PVM built from the witness eigenprojectors.
pub fn witness_measurement(report: &SolveReport) -> Result<Measurement> {
    let m = pvm_from_witness(&report.witness_omega)?;
    debug_assert_eq!(m.kind(), MeasurementKind::Pvm);
    Ok(m)
}
