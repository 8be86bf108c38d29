//! Convex generators `f`, their Fenchel conjugates and the change-of-variables maps `psi`.
//!
//! Every generator carries the data needed by the variational solver: the conjugate `f*`
//! on its domain, a map `psi: J -> dom(f*)` and the interval `J`, plus the reparameterized
//! pair `(a, b) = (psi o phi_J, f* o psi o phi_J)` that turns the constrained problem over
//! spectra in `J` into an unconstrained one.

mod certify;
mod classical;
mod conjugate;

pub use certify::{check_operator_concave, check_operator_convex, check_operator_monotone, CertificationReport};
pub use classical::{classical_f_divergence, ClassicalDistribution};
pub use conjugate::fenchel_numeric;

use std::fmt;

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::linalg::functions::{ScalarFunction, Smooth};

/// Family of a generator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Kind {
    /// `f_alpha(t) = -t^alpha` for `alpha < 1`, `t^alpha` for `alpha > 1`.
    Renyi(f64),
    /// `f(t) = t log t`.
    Kl,
    /// `f(t) = |t - 1| / 2`.
    Tv,
}

/// How the spectral interval `J` is parameterized by an unconstrained real `x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reparam {
    /// `J = (-inf, 0)`, `gamma = -e^x`.
    NegExp,
    /// `J = (0, inf)`, `gamma = e^x`.
    Exp,
    /// `J` compact; optimized directly by projected ascent.
    Compact,
}

impl Reparam {
    pub fn gamma(&self, x: f64) -> f64 {
        match self {
            Reparam::NegExp => -x.exp(),
            Reparam::Exp => x.exp(),
            Reparam::Compact => x,
        }
    }
}

/// A convex generator together with its conjugate data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FGenerator {
    kind: Kind,
}

impl fmt::Display for FGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            Kind::Renyi(a) => write!(f, "renyi:{a}"),
            Kind::Kl => write!(f, "kl"),
            Kind::Tv => write!(f, "tv"),
        }
    }
}

impl FGenerator {
    /// Builds a generator; `Renyi(1)` is routed to `Kl`.
    pub fn new(kind: Kind) -> Result<Self> {
        match kind {
            Kind::Renyi(a) if !(a >= 0.0) || !a.is_finite() => {
                Err(Error::InvalidParameter(format!("Renyi order must be finite and >= 0, got {a}")))
            }
            Kind::Renyi(a) if a == 1.0 => Ok(FGenerator { kind: Kind::Kl }),
            k => Ok(FGenerator { kind: k }),
        }
    }

    pub fn renyi(alpha: f64) -> Result<Self> {
        Self::new(Kind::Renyi(alpha))
    }

    pub fn kl() -> Self {
        FGenerator { kind: Kind::Kl }
    }

    pub fn tv() -> Self {
        FGenerator { kind: Kind::Tv }
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    /// Renyi order, with `Kl` reported as 1.
    pub fn alpha(&self) -> Option<f64> {
        match self.kind {
            Kind::Renyi(a) => Some(a),
            Kind::Kl => Some(1.0),
            Kind::Tv => None,
        }
    }

    /// `sign(alpha - 1)` for Renyi generators.
    pub fn renyi_sign(&self) -> Option<f64> {
        match self.kind {
            Kind::Renyi(a) if a < 1.0 => Some(-1.0),
            Kind::Renyi(_) => Some(1.0),
            _ => None,
        }
    }

    pub fn f_domain(&self) -> Interval {
        match self.kind {
            Kind::Renyi(a) if a < 1.0 => Interval::positive(),
            Kind::Renyi(_) | Kind::Tv => Interval::real_line(),
            Kind::Kl => Interval::positive(),
        }
    }

    pub fn f(&self, t: f64) -> f64 {
        match self.kind {
            Kind::Renyi(a) if a < 1.0 => -t.powf(a),
            Kind::Renyi(a) => {
                if t <= 0.0 {
                    0.0
                } else {
                    t.powf(a)
                }
            }
            Kind::Kl => {
                if t == 0.0 {
                    0.0
                } else {
                    t * t.ln()
                }
            }
            Kind::Tv => 0.5 * (t - 1.0).abs(),
        }
    }

    /// `q f(p/q)` with the zero-mass conventions `0 f(0/0) = 0`, `q f(0)` for `p = 0` and
    /// `p lim_{t->0} t f(1/t)` for `q = 0`.
    pub fn perspective(&self, p: f64, q: f64) -> f64 {
        match (p > 0.0, q > 0.0) {
            (false, false) => 0.0,
            (false, true) => q * self.f_at_zero(),
            (true, false) => {
                let slope = self.recession_slope();
                if slope.is_infinite() {
                    f64::INFINITY
                } else {
                    p * slope
                }
            }
            (true, true) => q * self.f(p / q),
        }
    }

    /// `f(0)` with the support convention used by classical divergences: `lim_{t->0} f(t)`,
    /// except that the order-0 generator counts only the support (value 0).
    pub fn f_at_zero(&self) -> f64 {
        match self.kind {
            Kind::Renyi(_) | Kind::Kl => 0.0,
            Kind::Tv => 0.5,
        }
    }

    /// `lim_{t->0} t f(a/t) / a`, the cost per unit of mass where the reference vanishes.
    pub fn recession_slope(&self) -> f64 {
        match self.kind {
            Kind::Renyi(a) if a < 1.0 => 0.0,
            Kind::Renyi(_) | Kind::Kl => f64::INFINITY,
            Kind::Tv => 0.5,
        }
    }

    pub fn fstar_domain(&self) -> Interval {
        match self.kind {
            Kind::Renyi(a) if a < 1.0 => Interval::negative(),
            Kind::Renyi(_) => Interval::positive(),
            Kind::Kl => Interval::real_line(),
            Kind::Tv => Interval::closed(-0.5, 0.5),
        }
    }

    /// Exponent `alpha / (1 - alpha)` or `alpha / (alpha - 1)` of the conjugate power law.
    fn conj_exponent(a: f64) -> f64 {
        if a < 1.0 {
            a / (1.0 - a)
        } else {
            a / (a - 1.0)
        }
    }

    pub fn fstar(&self, z: f64) -> f64 {
        match self.kind {
            Kind::Renyi(a) if a == 0.0 => 1.0,
            Kind::Renyi(a) if a < 1.0 => (1.0 - a) * (-z / a).powf(-Self::conj_exponent(a)),
            Kind::Renyi(a) => (a - 1.0) * (z / a).powf(Self::conj_exponent(a)),
            Kind::Kl => (z - 1.0).exp(),
            Kind::Tv => z,
        }
    }

    pub fn fstar_prime(&self, z: f64) -> f64 {
        match self.kind {
            Kind::Renyi(a) if a == 0.0 => 0.0,
            // d/dz of (1-a)(-z/a)^{-k}, k = a/(1-a): (1-a) k / a (-z/a)^{-k-1} = (-z/a)^{-k-1}
            Kind::Renyi(a) if a < 1.0 => (-z / a).powf(-Self::conj_exponent(a) - 1.0),
            // d/dz of (a-1)(z/a)^k, k = a/(a-1): (z/a)^{k-1}
            Kind::Renyi(a) => (z / a).powf(Self::conj_exponent(a) - 1.0),
            Kind::Kl => (z - 1.0).exp(),
            Kind::Tv => 1.0,
        }
    }

    pub fn psi_interval(&self) -> Interval {
        match self.kind {
            Kind::Renyi(a) if a <= 0.5 => Interval::negative(),
            Kind::Renyi(_) | Kind::Kl => Interval::positive(),
            Kind::Tv => Interval::closed(-0.5, 0.5),
        }
    }

    pub fn reparam(&self) -> Reparam {
        match self.kind {
            Kind::Renyi(a) if a <= 0.5 => Reparam::NegExp,
            Kind::Renyi(_) | Kind::Kl => Reparam::Exp,
            Kind::Tv => Reparam::Compact,
        }
    }

    pub fn psi(&self, l: f64) -> f64 {
        match self.kind {
            Kind::Renyi(a) if a <= 0.5 => l,
            Kind::Renyi(a) if a < 1.0 => -a * (l / (1.0 - a)).powf(-(1.0 - a) / a),
            Kind::Renyi(a) => a * (l / (a - 1.0)).powf((a - 1.0) / a),
            Kind::Kl => 1.0 + l.ln(),
            Kind::Tv => l,
        }
    }

    pub fn psi_prime(&self, l: f64) -> f64 {
        match self.kind {
            Kind::Renyi(a) if a <= 0.5 => 1.0,
            Kind::Renyi(a) if a < 1.0 => {
                let e = -(1.0 - a) / a;
                -a * e / (1.0 - a) * (l / (1.0 - a)).powf(e - 1.0)
            }
            Kind::Renyi(a) => {
                let e = (a - 1.0) / a;
                a * e / (a - 1.0) * (l / (a - 1.0)).powf(e - 1.0)
            }
            Kind::Kl => 1.0 / l,
            Kind::Tv => 1.0,
        }
    }

    /// The inverse of `f*` in closed form, defined on the range of `f*`.
    /// Whenever `psi` is not the identity it coincides with this map.
    pub fn fstar_inverse(&self, l: f64) -> f64 {
        match self.kind {
            Kind::Renyi(a) if a < 1.0 => -a * (l / (1.0 - a)).powf(-(1.0 - a) / a),
            Kind::Renyi(a) => a * (l / (a - 1.0)).powf((a - 1.0) / a),
            Kind::Kl => 1.0 + l.ln(),
            Kind::Tv => l,
        }
    }

    pub fn fstar_inverse_prime(&self, l: f64) -> f64 {
        match self.kind {
            Kind::Renyi(a) if a < 1.0 => {
                let e = -(1.0 - a) / a;
                -a * e / (1.0 - a) * (l / (1.0 - a)).powf(e - 1.0)
            }
            Kind::Renyi(a) => {
                let e = (a - 1.0) / a;
                a * e / (a - 1.0) * (l / (a - 1.0)).powf(e - 1.0)
            }
            Kind::Kl => 1.0 / l,
            Kind::Tv => 1.0,
        }
    }

    /// Range of `f*` (the natural domain of its inverse).
    pub fn fstar_range(&self) -> Interval {
        match self.kind {
            Kind::Tv => Interval::closed(-0.5, 0.5),
            _ => Interval::positive(),
        }
    }

    /// `a(x) = psi(phi_J(x))` with derivative.
    pub fn a(&self, x: f64) -> (f64, f64) {
        match self.kind {
            Kind::Renyi(a) if a <= 0.5 => {
                let v = -x.exp();
                (v, v)
            }
            Kind::Renyi(a) if a < 1.0 => {
                let m = (1.0 - a) / a;
                let v = -a * (1.0 - a).powf(m) * (-m * x).exp();
                (v, -m * v)
            }
            Kind::Renyi(a) => {
                let m = (a - 1.0) / a;
                let v = a * (a - 1.0).powf(-m) * (m * x).exp();
                (v, m * v)
            }
            Kind::Kl => (1.0 + x, 1.0),
            Kind::Tv => (x, 1.0),
        }
    }

    /// `b(x) = f*(psi(phi_J(x)))` with derivative.
    pub fn b(&self, x: f64) -> (f64, f64) {
        match self.kind {
            Kind::Renyi(a) if a == 0.0 => (1.0, 0.0),
            Kind::Renyi(a) if a <= 0.5 => {
                let k = a / (1.0 - a);
                let v = (1.0 - a) * a.powf(k) * (-k * x).exp();
                (v, -k * v)
            }
            Kind::Renyi(_) | Kind::Kl => {
                let v = x.exp();
                (v, v)
            }
            Kind::Tv => (x, 1.0),
        }
    }

    /// Maps the variational value `S` to the divergence scale: `D = log(sign(alpha-1) S)/(alpha-1)`
    /// for Renyi orders, identity otherwise. Order 0 uses `-log(-S)`.
    pub fn divergence_from_value(&self, s: f64) -> f64 {
        match self.kind {
            Kind::Renyi(a) if a < 1.0 => {
                let q = -s;
                if q <= 0.0 {
                    f64::INFINITY
                } else {
                    q.ln() / (a - 1.0)
                }
            }
            Kind::Renyi(a) => {
                if s.is_infinite() {
                    f64::INFINITY
                } else {
                    s.ln() / (a - 1.0)
                }
            }
            Kind::Kl | Kind::Tv => s,
        }
    }

    pub fn fstar_fn(&self) -> impl ScalarFunction + Clone {
        let g = *self;
        Smooth::new(move |z| g.fstar(z), move |z| g.fstar_prime(z)).on(g.fstar_domain())
    }

    pub fn psi_fn(&self) -> impl ScalarFunction + Clone {
        let g = *self;
        Smooth::new(move |l| g.psi(l), move |l| g.psi_prime(l)).on(g.psi_interval())
    }

    pub fn fstar_inverse_fn(&self) -> impl ScalarFunction + Clone {
        let g = *self;
        Smooth::new(move |l| g.fstar_inverse(l), move |l| g.fstar_inverse_prime(l)).on(g.fstar_range())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn registry() -> Vec<FGenerator> {
        let mut v: Vec<FGenerator> =
            [0.1, 0.25, 0.5, 0.75, 0.9, 1.5, 2.0, 3.0].iter().map(|&a| FGenerator::renyi(a).unwrap()).collect();
        v.push(FGenerator::kl());
        v.push(FGenerator::tv());
        v
    }

    #[test]
    fn table_values() {
        assert!((FGenerator::kl().fstar(1.0) - 1.0).abs() < 1e-15);
        assert_eq!(FGenerator::tv().fstar(0.3), 0.3);
        assert!(FGenerator::tv().fstar_domain().contains(0.5));
        assert!((FGenerator::renyi(0.5).unwrap().fstar(-1.0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn order_one_is_kl() {
        assert_eq!(FGenerator::renyi(1.0).unwrap().kind(), Kind::Kl);
        assert!(FGenerator::renyi(-0.1).is_err());
        assert!(FGenerator::renyi(f64::NAN).is_err());
    }

    #[test]
    fn psi_inverts_fstar_where_not_identity() {
        for g in registry() {
            if g.reparam() != Reparam::Exp {
                continue;
            }
            for &l in &[0.1, 0.7, 1.0, 2.5, 10.0] {
                let z = g.psi(l);
                assert!(g.fstar_domain().contains(z), "{g} {l}");
                assert!((g.fstar(z) - l).abs() < 1e-12 * l.max(1.0), "{g} {l}");
            }
        }
    }

    #[test]
    fn psi_maps_interval_into_conjugate_domain() {
        for g in registry() {
            let j = g.psi_interval();
            let dom = g.fstar_domain();
            let pts: Vec<f64> = (0..1000)
                .map(|i| {
                    let s = (i as f64 + 0.5) / 1000.0;
                    if j.is_bounded() {
                        j.lo + s * (j.hi - j.lo)
                    } else if j.lo.is_finite() {
                        j.lo + (8.0 * s - 4.0).exp()
                    } else {
                        j.hi - (8.0 * s - 4.0).exp()
                    }
                })
                .collect();
            let vals: Vec<f64> = pts.iter().map(|&l| g.psi(l)).collect();
            assert!(vals.iter().all(|&z| dom.contains(z)), "{g}");
            let sorted_pts: Vec<(f64, f64)> = {
                let mut v: Vec<(f64, f64)> = pts.iter().copied().zip(vals.iter().copied()).collect();
                v.sort_by(|a, b| a.0.total_cmp(&b.0));
                v
            };
            assert!(sorted_pts.windows(2).all(|w| w[1].1 > w[0].1), "{g} not increasing");
        }
    }

    #[test]
    fn psi_endpoint_limits() {
        let g = FGenerator::renyi(0.75).unwrap();
        assert!(g.psi(1e-24) < -1e6);
        assert!(g.psi(1e12).abs() < 1e-3);
        let g = FGenerator::renyi(2.0).unwrap();
        assert!(g.psi(1e-12) < 1e-5);
        assert!(g.psi(1e12) > 1e5);
        let g = FGenerator::kl();
        assert!(g.psi(1e-300) < -600.0);
    }

    #[test]
    fn reparameterized_maps_compose() {
        for g in registry() {
            if g.reparam() == Reparam::Compact {
                continue;
            }
            for &x in &[-2.0, -0.3, 0.0, 0.8, 3.0] {
                let gamma = g.reparam().gamma(x);
                let (a, da) = g.a(x);
                let (b, db) = g.b(x);
                assert!((a - g.psi(gamma)).abs() < 1e-12 * a.abs().max(1.0), "{g} a({x})");
                assert!((b - g.fstar(g.psi(gamma))).abs() < 1e-11 * b.abs().max(1.0), "{g} b({x})");
                let h = 1e-6;
                let fda = (g.a(x + h).0 - g.a(x - h).0) / (2.0 * h);
                let fdb = (g.b(x + h).0 - g.b(x - h).0) / (2.0 * h);
                assert!((fda - da).abs() < 1e-6 * da.abs().max(1.0), "{g} a'({x})");
                assert!((fdb - db).abs() < 1e-6 * db.abs().max(1.0), "{g} b'({x})");
            }
        }
    }

    #[test]
    fn conjugate_derivative_matches_difference() {
        for g in registry() {
            let z = g.fstar_domain().interior_point() * 0.7 + if g.fstar_domain().lo == 0.0 { 0.5 } else { 0.0 };
            let h = 1e-6;
            let fd = (g.fstar(z + h) - g.fstar(z - h)) / (2.0 * h);
            assert!((fd - g.fstar_prime(z)).abs() < 1e-6 * fd.abs().max(1.0), "{g} at {z}");
        }
    }

    #[test]
    fn divergence_map() {
        let g = FGenerator::renyi(0.5).unwrap();
        assert!((g.divergence_from_value(-0.5) - 2f64.ln() * 2.0).abs() < 1e-15);
        assert_eq!(g.divergence_from_value(0.0), f64::INFINITY);
        let g = FGenerator::renyi(2.0).unwrap();
        assert!((g.divergence_from_value(2.0) - 2f64.ln()).abs() < 1e-15);
    }
}
