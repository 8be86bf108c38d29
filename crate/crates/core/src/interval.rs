use std::fmt;

/// Slack used for membership tests at closed endpoints.
pub const ENDPOINT_SLACK: f64 = 1e-12;

/// A real interval with possibly infinite endpoints and open/closed flags.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Self {
        Interval { lo, hi, lo_closed, hi_closed }
    }

    pub const fn real_line() -> Self {
        Interval::new(f64::NEG_INFINITY, f64::INFINITY, false, false)
    }

    /// `(0, +inf)`
    pub const fn positive() -> Self {
        Interval::new(0.0, f64::INFINITY, false, false)
    }

    /// `(-inf, 0)`
    pub const fn negative() -> Self {
        Interval::new(f64::NEG_INFINITY, 0.0, false, false)
    }

    /// `[0, +inf)`
    pub const fn nonnegative() -> Self {
        Interval::new(0.0, f64::INFINITY, true, false)
    }

    pub const fn closed(lo: f64, hi: f64) -> Self {
        Interval::new(lo, hi, true, true)
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    /// Membership: strict at open endpoints, `ENDPOINT_SLACK` tolerance at closed ones.
    pub fn contains(&self, t: f64) -> bool {
        if t.is_nan() {
            return false;
        }
        let above = if self.lo_closed { t >= self.lo - ENDPOINT_SLACK } else { t > self.lo };
        let below = if self.hi_closed { t <= self.hi + ENDPOINT_SLACK } else { t < self.hi };
        above && below
    }

    /// Moves `t` onto the nearest endpoint when it lies outside by at most `tol`.
    /// Returns `None` if `t` is further away than that.
    pub fn clamp_within(&self, t: f64, tol: f64) -> Option<f64> {
        if self.contains(t) {
            return Some(t);
        }
        if t <= self.lo && self.lo - t <= tol {
            return Some(self.lo);
        }
        if t >= self.hi && t - self.hi <= tol {
            return Some(self.hi);
        }
        None
    }

    /// Nearest point of the closure.
    pub fn clip(&self, t: f64) -> f64 {
        t.clamp(self.lo, self.hi)
    }

    /// A representative interior point.
    pub fn interior_point(&self) -> f64 {
        match (self.lo.is_finite(), self.hi.is_finite()) {
            (true, true) => 0.5 * (self.lo + self.hi),
            (true, false) => self.lo + 1.0,
            (false, true) => self.hi - 1.0,
            (false, false) => 0.0,
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.lo_closed { '[' } else { '(' };
        let close = if self.hi_closed { ']' } else { ')' };
        write!(f, "{open}{}, {}{close}", self.lo, self.hi)
    }
}
