//! Finite-outcome measurements: construction, induced statistics and randomized search.

use num_complex::Complex64 as C64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::generator::{classical_f_divergence, ClassicalDistribution, FGenerator};
use crate::linalg::eigen::eig_hermitian;
use crate::linalg::matrix::{CMatrix, Hermitian};
use crate::linalg::positive::PositiveOperator;
use crate::linalg::random::{haar_unitary_with, rng_from_seed};

/// Tolerance for completeness, positivity and projectivity checks.
pub const MEASUREMENT_TOL: f64 = 1e-9;
/// Negative outcome weights down to this level are round-off and are set to zero.
pub const PROBABILITY_FLOOR: f64 = 1e-12;
/// Givens angles tried by the hill climb, coarse to fine.
pub const HILL_CLIMB_ANGLES: [f64; 8] = [0.3, 0.1, 0.03, 0.01, 3e-3, 1e-3, 3e-4, 1e-4];
pub const HILL_CLIMB_SWEEPS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasurementKind {
    Pvm,
    Povm,
}

#[derive(Clone, Debug)]
pub struct Measurement {
    effects: Vec<Hermitian>,
    kind: MeasurementKind,
}

impl Measurement {
    /// Validates completeness, positivity and (for PVMs) projectivity and orthogonality.
    pub fn new(effects: Vec<Hermitian>, kind: MeasurementKind) -> Result<Self> {
        let Some(first) = effects.first() else {
            return Err(Error::InvalidParameter("a measurement needs at least one effect".into()));
        };
        let n = first.dim();
        let mut sum = Hermitian::zeros(n);
        for e in &effects {
            if e.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, found: e.dim() });
            }
            let m = eig_hermitian(e)?.min();
            if m < -MEASUREMENT_TOL {
                return Err(Error::NotPositive(m));
            }
            sum = sum.add(e);
        }
        let defect = sum.max_abs_diff(&Hermitian::identity(n));
        if defect > MEASUREMENT_TOL {
            return Err(Error::InvalidParameter(format!("effects do not sum to identity (defect {defect:e})")));
        }
        if kind == MeasurementKind::Pvm {
            for (i, a) in effects.iter().enumerate() {
                for (j, b) in effects.iter().enumerate().skip(i) {
                    let prod = a.matrix().matmul(b.matrix());
                    let target = if i == j { a.matrix().clone() } else { CMatrix::zeros(n, n) };
                    let d = prod.sub(&target).frobenius_norm();
                    if d > MEASUREMENT_TOL {
                        return Err(Error::InvalidParameter(format!(
                            "effects {i} and {j} violate projectivity (defect {d:e})"
                        )));
                    }
                }
            }
        }
        Ok(Measurement { effects, kind })
    }

    pub fn trivial(dim: usize) -> Self {
        Measurement { effects: vec![Hermitian::identity(dim)], kind: MeasurementKind::Pvm }
    }

    /// Rank-one PVM onto the columns of a unitary.
    pub fn from_basis(u: &CMatrix) -> Result<Self> {
        let effects = (0..u.cols()).map(|k| Hermitian::from_ket(&u.column(k))).collect();
        Measurement::new(effects, MeasurementKind::Pvm)
    }

    pub fn computational_basis(dim: usize) -> Self {
        Measurement::from_basis(&CMatrix::identity(dim)).expect("identity columns form a basis")
    }

    pub fn effects(&self) -> &[Hermitian] {
        &self.effects
    }

    pub fn kind(&self) -> MeasurementKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.effects[0].dim()
    }
}

fn outcome_weights(x: &PositiveOperator, m: &Measurement) -> Result<ClassicalDistribution> {
    let w = m
        .effects
        .iter()
        .map(|e| {
            let v = x.op().inner(e);
            if v < 0.0 && v >= -PROBABILITY_FLOOR {
                0.0
            } else {
                v
            }
        })
        .collect();
    ClassicalDistribution::new(w)
}

/// `(tr[rho M_x])_x` and `(tr[sigma M_x])_x`.
pub fn induced_distributions(
    rho: &PositiveOperator,
    sigma: &PositiveOperator,
    m: &Measurement,
) -> Result<(ClassicalDistribution, ClassicalDistribution)> {
    for x in [rho, sigma] {
        if x.dim() != m.dim() {
            return Err(Error::DimensionMismatch { expected: m.dim(), found: x.dim() });
        }
    }
    Ok((outcome_weights(rho, m)?, outcome_weights(sigma, m)?))
}

/// Classical f-divergence of the statistics induced by `m`.
pub fn measurement_value(
    rho: &PositiveOperator,
    sigma: &PositiveOperator,
    g: &FGenerator,
    m: &Measurement,
) -> Result<f64> {
    let (p, q) = induced_distributions(rho, sigma, m)?;
    classical_f_divergence(&p, &q, g)
}

/// Eigenprojectors of `omega`, one per cluster of eigenvalues closer than `1e-8 (1 + ||omega||)`.
pub fn pvm_from_witness(omega: &Hermitian) -> Result<Measurement> {
    let e = eig_hermitian(omega)?;
    let scale = e.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let gap = 1e-8 * (1.0 + scale);
    let mut groups: Vec<Vec<usize>> = vec![vec![0]];
    for k in 1..e.dim() {
        if e.values[k] - e.values[k - 1] > gap {
            groups.push(vec![k]);
        } else {
            groups.last_mut().unwrap().push(k);
        }
    }
    let effects = groups
        .iter()
        .map(|g| {
            let d: Vec<f64> = (0..e.dim()).map(|k| if g.contains(&k) { 1.0 } else { 0.0 }).collect();
            e.synthesize(&d)
        })
        .collect();
    Measurement::new(effects, MeasurementKind::Pvm)
}

/// Rotates columns `p, q` of `u` by a Givens rotation with angle `theta` and phase `phi`.
fn givens(u: &CMatrix, p: usize, q: usize, theta: f64, phi: f64) -> CMatrix {
    let (c, s) = (theta.cos(), theta.sin());
    let e = C64::from_polar(1.0, phi);
    let mut out = u.clone();
    for i in 0..u.rows() {
        let (a, b) = (u[(i, p)], u[(i, q)]);
        out[(i, p)] = a * c + b * e * s;
        out[(i, q)] = -a * e.conj() * s + b * c;
    }
    out
}

/// Classical value of the rank-one PVM onto the columns of `u`, without building the effects.
pub fn basis_value(rho: &PositiveOperator, sigma: &PositiveOperator, g: &FGenerator, u: &CMatrix) -> f64 {
    let n = u.rows();
    let mut p = Vec::with_capacity(u.cols());
    let mut q = Vec::with_capacity(u.cols());
    for k in 0..u.cols() {
        let (mut a, mut b) = (0.0, 0.0);
        for i in 0..n {
            let ui = u[(i, k)].conj();
            let (mut ra, mut sb) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
            for j in 0..n {
                ra += rho.op()[(i, j)] * u[(j, k)];
                sb += sigma.op()[(i, j)] * u[(j, k)];
            }
            a += (ui * ra).re;
            b += (ui * sb).re;
        }
        let clean = |v: f64| v.max(0.0);
        p.push(clean(a));
        q.push(clean(b));
    }
    match (ClassicalDistribution::new(p), ClassicalDistribution::new(q)) {
        (Ok(p), Ok(q)) => classical_f_divergence(&p, &q, g).unwrap_or(f64::NEG_INFINITY),
        _ => f64::NEG_INFINITY,
    }
}

/// Accept-if-improve sweeps over Givens rotations of every column pair, for each angle in `angles`.
pub fn hill_climb(
    rho: &PositiveOperator,
    sigma: &PositiveOperator,
    g: &FGenerator,
    mut u: CMatrix,
    angles: &[f64],
    sweeps: usize,
) -> (f64, CMatrix) {
    let n = u.cols();
    let mut best = basis_value(rho, sigma, g, &u);
    for _ in 0..sweeps {
        let mut improved = false;
        for p in 0..n {
            for q in (p + 1)..n {
                for &theta in angles {
                    for sign in [1.0, -1.0] {
                        for phi in [0.0, std::f64::consts::FRAC_PI_2] {
                            let cand = givens(&u, p, q, sign * theta, phi);
                            let v = basis_value(rho, sigma, g, &cand);
                            if v > best {
                                best = v;
                                u = cand;
                                improved = true;
                            }
                        }
                    }
                }
            }
        }
        if !improved {
            break;
        }
    }
    (best, u)
}

/// Grid resolution of the half circle searched for each column pair.
const PAIR_GRID: usize = 360;
const PAIR_GOLDEN_STEPS: usize = 80;

/// `<a|h|a>`, `<b|h|b>` and `<a|h|b>`.
fn pair_block(h: &Hermitian, a: &[C64], b: &[C64]) -> (f64, f64, C64) {
    let n = a.len();
    let (mut aa, mut bb, mut ab) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0));
    for i in 0..n {
        let (mut ha, mut hb) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for j in 0..n {
            ha += h[(i, j)] * a[j];
            hb += h[(i, j)] * b[j];
        }
        aa += a[i].conj() * ha;
        bb += b[i].conj() * hb;
        ab += a[i].conj() * hb;
    }
    (aa.re, bb.re, ab)
}

/// Trace and Bloch vector of a 2x2 block: `H = (t I + r . (X, Y, Z)) / 2`.
fn bloch(aa: f64, bb: f64, ab: C64) -> (f64, [f64; 3]) {
    (aa + bb, [2.0 * ab.re, -2.0 * ab.im, aa - bb])
}

fn dot3(x: &[f64; 3], y: &[f64; 3]) -> f64 {
    x[0] * y[0] + x[1] * y[1] + x[2] * y[2]
}

/// Orthonormal pair spanning `x` and `y` (completed arbitrarily when they are degenerate).
fn plane_basis(x: &[f64; 3], y: &[f64; 3]) -> ([f64; 3], [f64; 3]) {
    let unit = |v: [f64; 3]| {
        let n = dot3(&v, &v).sqrt();
        (n > 1e-300).then(|| [v[0] / n, v[1] / n, v[2] / n])
    };
    let e1 = unit(*x).or_else(|| unit(*y)).unwrap_or([0.0, 0.0, 1.0]);
    let reject = |v: &[f64; 3]| {
        let c = dot3(v, &e1);
        [v[0] - c * e1[0], v[1] - c * e1[1], v[2] - c * e1[2]]
    };
    let e2 = unit(reject(y))
        .filter(|v| dot3(v, v) > 0.5)
        .or_else(|| {
            let k = (0..3).min_by(|&i, &j| e1[i].abs().total_cmp(&e1[j].abs())).unwrap();
            let mut z = [0.0; 3];
            z[k] = 1.0;
            unit(reject(&z))
        })
        .unwrap();
    (e1, e2)
}

/// Exact pairwise polish of a rank-one PVM basis.
///
/// For columns `a, b` the two-outcome split of their span is a Bloch direction `n`, and the pair
/// contributes a convex function of `(r_rho . n, r_sigma . n)`. Its maximum is attained on the
/// boundary of the image ellipse, i.e. for `n` in the plane of the two Bloch vectors, which leaves
/// a search over one angle (grid, then golden section). Sweeps stop when no pair improves.
pub fn pair_polish(
    rho: &PositiveOperator,
    sigma: &PositiveOperator,
    g: &FGenerator,
    mut u: CMatrix,
    sweeps: usize,
) -> (f64, CMatrix) {
    let n = u.cols();
    let mut best = basis_value(rho, sigma, g, &u);
    if !best.is_finite() {
        return (best, u);
    }
    for _ in 0..sweeps {
        let mut improved = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (a, b) = (u.column(p), u.column(q));
                let (rt, rv) = {
                    let (aa, bb, ab) = pair_block(rho.op(), &a, &b);
                    bloch(aa, bb, ab)
                };
                let (st, sv) = {
                    let (aa, bb, ab) = pair_block(sigma.op(), &a, &b);
                    bloch(aa, bb, ab)
                };
                let split = |nv: &[f64; 3]| {
                    let (x, y) = (dot3(&rv, nv), dot3(&sv, nv));
                    let term = |p: f64, q: f64| g.perspective(p.max(0.0), q.max(0.0));
                    term(0.5 * (rt + x), 0.5 * (st + y)) + term(0.5 * (rt - x), 0.5 * (st - y))
                };
                let current = split(&[0.0, 0.0, 1.0]);
                let (e1, e2) = plane_basis(&rv, &sv);
                let dir = |th: f64| {
                    let (c, s) = (th.cos(), th.sin());
                    [c * e1[0] + s * e2[0], c * e1[1] + s * e2[1], c * e1[2] + s * e2[2]]
                };
                let h = |th: f64| split(&dir(th));
                let step = std::f64::consts::PI / PAIR_GRID as f64;
                let (mut th_best, mut v_best) = (0.0, f64::NEG_INFINITY);
                for k in 0..PAIR_GRID {
                    let th = k as f64 * step;
                    let v = h(th);
                    if v > v_best {
                        th_best = th;
                        v_best = v;
                    }
                }
                let (mut lo, mut hi) = (th_best - step, th_best + step);
                let r = 0.5 * (5f64.sqrt() - 1.0);
                for _ in 0..PAIR_GOLDEN_STEPS {
                    let c = hi - r * (hi - lo);
                    let d = lo + r * (hi - lo);
                    if h(c) >= h(d) {
                        hi = d;
                    } else {
                        lo = c;
                    }
                }
                let mid = 0.5 * (lo + hi);
                if h(mid) > v_best {
                    th_best = mid;
                    v_best = h(mid);
                }
                if !(v_best > current) {
                    continue;
                }
                let nv = dir(th_best);
                let polar = nv[2].clamp(-1.0, 1.0).acos();
                let phase = C64::from_polar(1.0, nv[1].atan2(nv[0]));
                let (c, s) = ((0.5 * polar).cos(), (0.5 * polar).sin());
                let mut cand = u.clone();
                for i in 0..u.rows() {
                    cand[(i, p)] = a[i] * c + b[i] * phase * s;
                    cand[(i, q)] = a[i] * s - b[i] * phase * c;
                }
                let v = basis_value(rho, sigma, g, &cand);
                if v > best {
                    best = v;
                    u = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
    (best, u)
}

/// Geometric angle ladder from `1e-2` down to `1e-10`, used to polish a nearly optimal basis.
pub fn fine_angles() -> Vec<f64> {
    (0..=16).map(|k| 1e-2 * 10f64.powf(-0.5 * k as f64)).collect()
}

/// Best rank-one PVM among `trials` Haar-random bases, each refined by a Givens hill climb.
pub fn search_pvm(
    rho: &PositiveOperator,
    sigma: &PositiveOperator,
    g: &FGenerator,
    trials: usize,
    seed: u64,
) -> Result<(f64, Measurement)> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: sigma.dim() });
    }
    let n = rho.dim();
    let mut rng = rng_from_seed(seed);
    let mut best: Option<(f64, CMatrix)> = None;
    for _ in 0..trials.max(1) {
        let u = haar_unitary_with(n, &mut rng);
        let (v, u) = hill_climb(rho, sigma, g, u, &HILL_CLIMB_ANGLES, HILL_CLIMB_SWEEPS);
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, u));
        }
    }
    let (v, u) = best.expect("at least one trial");
    Ok((v, Measurement::from_basis(&u)?))
}

/// Random POVM with `outcomes` rank-one effects from an isometric dilation.
///
/// The first `dim` columns of a Haar unitary on `dim * ceil(outcomes/dim)` dimensions form an
/// isometry `V`; its rows are distributed round-robin over the outcomes and each outcome's
/// effect is the sum of `v v^dagger` over its rows, so the effects sum to `V^dagger V = I`.
pub fn sample_povm<R: Rng + ?Sized>(dim: usize, outcomes: usize, rng: &mut R) -> Result<Measurement> {
    if outcomes < 2 && dim > 1 {
        return Err(Error::InvalidParameter("a POVM sample needs at least two outcomes".into()));
    }
    let big = dim * outcomes.div_ceil(dim);
    let w = haar_unitary_with(big, rng);
    let mut effects = vec![CMatrix::zeros(dim, dim); outcomes];
    for r in 0..big {
        let row: Vec<C64> = (0..dim).map(|j| w[(r, j)].conj()).collect();
        let e = &mut effects[r % outcomes];
        *e = e.add(&CMatrix::outer(&row, &row));
    }
    let effects: Vec<Hermitian> = effects.into_iter().map(Hermitian::new).collect::<Result<_>>()?;
    let kind = if outcomes == dim { MeasurementKind::Pvm } else { MeasurementKind::Povm };
    Measurement::new(effects, kind)
}

/// Best classical value over `trials` sampled POVMs with `outcomes` outcomes.
pub fn search_povm(
    rho: &PositiveOperator,
    sigma: &PositiveOperator,
    g: &FGenerator,
    outcomes: usize,
    trials: usize,
    seed: u64,
) -> Result<(f64, Measurement)> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: sigma.dim() });
    }
    let mut rng = rng_from_seed(seed);
    let mut best: Option<(f64, Measurement)> = None;
    for _ in 0..trials.max(1) {
        let m = sample_povm(rho.dim(), outcomes, &mut rng)?;
        let v = measurement_value(rho, sigma, g, &m)?;
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, m));
        }
    }
    Ok(best.expect("at least one trial"))
}

/// Default outcome budget for POVM searches: `dim^2`.
pub fn default_outcomes(dim: usize) -> usize {
    (dim * dim).max(2)
}
