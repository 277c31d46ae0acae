//! Bracketed bisection and golden-section search.

/// Outcome of a bisection run.
#[derive(Debug, Clone, Copy)]
pub struct Bisection {
    pub root: f64,
    pub lo: f64,
    pub hi: f64,
    pub iterations: usize,
}

/// Bisects `g` on `[lo, hi]`, where `g(lo) >= 0 >= g(hi)` or the reverse.
///
/// Stops once the bracket is narrower than `width_tol` or after `max_iter`
/// halvings. The caller is responsible for checking the end-point signs.
pub fn bisect<G>(mut g: G, mut lo: f64, mut hi: f64, width_tol: f64, max_iter: usize) -> Bisection
where
    G: FnMut(f64) -> f64,
{
    let lo_positive = g(lo) >= 0.0;
    let mut iterations = 0;
    while iterations < max_iter && (hi - lo) > width_tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid);
        if gm == 0.0 {
            lo = mid;
            hi = mid;
            iterations += 1;
            break;
        }
        if (gm > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    Bisection {
        root: 0.5 * (lo + hi),
        lo,
        hi,
        iterations,
    }
}

/// Golden-section search for a minimum of `g` on `[a, b]`, assuming it is
/// unimodal there. Returns the final midpoint and its value.
pub fn golden_min<G>(mut g: G, mut a: f64, mut b: f64, iters: usize) -> (f64, f64)
where
    G: FnMut(f64) -> f64,
{
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut e = a + r * (b - a);
    let (mut gc, mut ge) = (g(c), g(e));
    for _ in 0..iters {
        if gc <= ge {
            b = e;
            e = c;
            ge = gc;
            c = b - r * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = e;
            gc = ge;
            e = a + r * (b - a);
            ge = g(e);
        }
    }
    let x = 0.5 * (a + b);
    (x, g(x))
}
