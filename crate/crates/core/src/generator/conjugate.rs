use crate::interval::Interval;

const GOLDEN: f64 = 0.618_033_988_749_894_8;

fn window(dom: &Interval, extent: f64) -> (f64, f64) {
    // open endpoints are approached to within a relative hair
    let lo = if dom.lo.is_finite() {
        if dom.lo_closed {
            dom.lo
        } else {
            dom.lo + 1e-12 * (1.0 + dom.lo.abs())
        }
    } else if dom.hi.is_finite() {
        dom.hi - extent
    } else {
        -extent
    };
    let hi = if dom.hi.is_finite() {
        if dom.hi_closed {
            dom.hi
        } else {
            dom.hi - 1e-12 * (1.0 + dom.hi.abs())
        }
    } else if dom.lo.is_finite() {
        dom.lo + extent
    } else {
        extent
    };
    (lo, hi)
}

/// Best grid point of `g` on `[lo, hi]`: (index, t, value).
fn scan(g: &impl Fn(f64) -> f64, lo: f64, hi: f64, grid: usize) -> (usize, f64, f64) {
    let mut best = (0, lo, f64::NEG_INFINITY);
    for k in 0..=grid {
        let t = lo + (hi - lo) * k as f64 / grid as f64;
        let v = g(t);
        if v > best.2 {
            best = (k, t, v);
        }
    }
    best
}

fn golden_max(g: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-14 * (1.0 + a.abs() + b.abs()) {
            break;
        }
        if gc >= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - GOLDEN * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + GOLDEN * (b - a);
            gd = g(d);
        }
    }
    if gc >= gd {
        (c, gc)
    } else {
        (d, gd)
    }
}

/// Numerical Fenchel conjugate `sup_{t in dom} (t z - f(t))`.
///
/// A coarse grid locates the maximizer, then three golden-section refinements on successively
/// narrower brackets polish it. Unbounded domains are searched on doubling windows until the
/// best value improves by less than `1e-9` and the maximizer is not pinned to the window edge.
/// The result is a lower bound on the true conjugate.
pub fn fenchel_numeric(f: impl Fn(f64) -> f64, dom: Interval, z: f64, grid: usize) -> f64 {
    let grid = grid.max(100);
    let g = |t: f64| {
        let v = t * z - f(t);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };
    let mut extent = 1.0;
    let (mut lo, mut hi) = window(&dom, extent);
    let mut best = scan(&g, lo, hi, grid);
    if !dom.is_bounded() {
        for _ in 0..80 {
            let pinned = (best.0 == 0 && !dom.lo.is_finite()) || (best.0 == grid && !dom.hi.is_finite());
            extent *= 2.0;
            let (l2, h2) = window(&dom, extent);
            let next = scan(&g, l2, h2, grid);
            let gain = next.2 - best.2;
            lo = l2;
            hi = h2;
            best = next;
            if gain < 1e-9 && !pinned {
                break;
            }
        }
    }
    let step = (hi - lo) / grid as f64;
    let mut a = (best.1 - step).max(lo);
    let mut b = (best.1 + step).min(hi);
    let mut value = best.2;
    for _ in 0..3 {
        let (t, v) = golden_max(&g, a, b);
        if v > value {
            value = v;
        }
        let w = (b - a) * 0.25;
        a = (t - w).max(lo);
        b = (t + w).min(hi);
    }
    value
}
