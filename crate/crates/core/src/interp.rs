//! Monotone piecewise-cubic Hermite interpolation (Fritsch–Carlson slopes).

/// Computes node slopes that keep the Hermite interpolant monotone on every
/// interval where the data are monotone. `t` must be strictly increasing.
pub fn monotone_slopes(t: &[f64], v: &[f64]) -> Vec<f64> {
    let n = t.len();
    debug_assert_eq!(n, v.len());
    if n < 2 {
        return vec![0.0; n];
    }
    let h: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
    let secant: Vec<f64> = (0..n - 1).map(|k| (v[k + 1] - v[k]) / h[k]).collect();
    if n == 2 {
        return vec![secant[0]; 2];
    }

    let mut m = vec![0.0; n];
    for k in 1..n - 1 {
        let (s0, s1) = (secant[k - 1], secant[k]);
        if s0 * s1 <= 0.0 {
            m[k] = 0.0;
        } else {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            m[k] = (w1 + w2) / (w1 / s0 + w2 / s1);
        }
    }
    m[0] = edge_slope(h[0], h[1], secant[0], secant[1]);
    m[n - 1] = edge_slope(h[n - 2], h[n - 3], secant[n - 2], secant[n - 3]);
    m
}

// Non-centered three-point estimate, clipped to preserve shape.
fn edge_slope(h0: f64, h1: f64, s0: f64, s1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
    if d.signum() != s0.signum() || s0 == 0.0 {
        0.0
    } else if s0.signum() != s1.signum() && d.abs() > 3.0 * s0.abs() {
        3.0 * s0
    } else {
        d
    }
}

/// Evaluates the Hermite interpolant at `x` inside `[t[0], t[n-1]]`.
pub fn hermite_eval(t: &[f64], v: &[f64], m: &[f64], x: f64) -> f64 {
    let n = t.len();
    let k = match t.binary_search_by(|probe| probe.total_cmp(&x)) {
        Ok(i) => return v[i],
        Err(0) => 0,
        Err(i) if i >= n => n - 2,
        Err(i) => i - 1,
    };
    let h = t[k + 1] - t[k];
    let s = (x - t[k]) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * v[k] + h10 * h * m[k] + h01 * v[k + 1] + h11 * h * m[k + 1]
}
