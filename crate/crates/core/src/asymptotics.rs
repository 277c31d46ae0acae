//! Large-`N` behaviour of packing constants.
//!
//! The constant is compared against `f(tau(A))` with `A = (N / Delta_d)^(1/d)`,
//! the value obtained by replacing `D_d(N)` with its leading term. The ratio
//! tends to one under mild regularity conditions on `f` near zero and
//! infinity; [`check_cor3_conditions`] probes those conditions numerically.

use serde::{Deserialize, Serialize};

use crate::diameter::{density_scale, diameter_bounds, exact_diameter, DensityTable};
use crate::error::{Error, Result};
use crate::tau::{lemma3_bounds, solve_tau};
use crate::weights::{ClassAParams, WeightFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RatioSource {
    /// `D_d(N)` known exactly.
    Exact,
    /// Midpoint of the density bounds.
    Midpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    ConvergingTo1,
    Inconclusive,
    Diverging,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub ratio: f64,
    #[serde(rename = "D_source")]
    pub d_source: RatioSource,
    /// Bounds on the numerator obtained from `tau(A)` alone; absent when
    /// the envelope preconditions fail.
    pub envelope_lo: Option<f64>,
    pub envelope_hi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedN {
    #[serde(rename = "N")]
    pub n: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticDiagnostic {
    pub d: usize,
    pub rows: Vec<RatioRow>,
    pub trend: Trend,
    pub skipped: Vec<SkippedN>,
    pub beta_condition: Option<ConditionReport>,
}

impl AsymptoticDiagnostic {
    pub fn n_values(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.n).collect()
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.ratio).collect()
    }
}

/// Final `|ratio - 1|` below which a decreasing sequence counts as
/// converging. A diagnostic convention, not a rate.
pub const TREND_THRESHOLD: f64 = 0.05;

/// Computes `f(tau(D_d(N))) / f(tau(A))` over increasing `N`.
///
/// `D_d(N)` is exact where known and the midpoint of the density bounds
/// otherwise. Values of `N` outside the range where either side is defined
/// are skipped and listed.
pub fn asymptotic_ratio(
    w: &WeightFunction,
    params: &ClassAParams,
    d: usize,
    densities: &DensityTable,
    n_values: &[usize],
) -> Result<AsymptoticDiagnostic> {
    if n_values.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::Domain("N values must be strictly increasing".into()));
    }
    let delta = densities.require(d)?;
    let threshold = params.threshold();
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for &n in n_values {
        if n < 2 {
            skipped.push(SkippedN {
                n,
                reason: "N must be at least 2".into(),
            });
            continue;
        }
        let a = density_scale(d, n, delta);
        let (dn, source) = match exact_diameter(d, n) {
            Some(e) => (e.value(), RatioSource::Exact),
            None => {
                let b = diameter_bounds(d, n, densities)?;
                (0.5 * (b.lower + b.upper), RatioSource::Midpoint)
            }
        };
        if !(a > threshold && dn > threshold) {
            skipped.push(SkippedN {
                n,
                reason: format!(
                    "diameter {dn} or its leading term {a} does not exceed M/eps = {threshold}"
                ),
            });
            continue;
        }
        let num = solve_tau(w, params, dn)?.f_at_tau;
        let den = solve_tau(w, params, a)?.f_at_tau;
        let env = lemma3_bounds(w, params, a, dn - a).ok();
        rows.push(RatioRow {
            n,
            ratio: num / den,
            d_source: source,
            envelope_lo: env.as_ref().map(|e| e.lower_on_f_tau),
            envelope_hi: env.as_ref().map(|e| e.upper_on_f_tau),
        });
    }
    let trend = classify_trend(&rows.iter().map(|r| r.ratio).collect::<Vec<_>>());
    Ok(AsymptoticDiagnostic {
        d,
        rows,
        trend,
        skipped,
        beta_condition: None,
    })
}

fn classify_trend(ratios: &[f64]) -> Trend {
    if ratios.len() < 2 {
        return Trend::Inconclusive;
    }
    let err: Vec<f64> = ratios.iter().map(|r| (r - 1.0).abs()).collect();
    let tail = &err[err.len() / 2..];
    let tail = if tail.len() < 2 {
        &err[err.len() - 2..]
    } else {
        tail
    };
    let last = *err.last().unwrap();
    if tail.windows(2).all(|p| p[1] < p[0]) && last < TREND_THRESHOLD {
        Trend::ConvergingTo1
    } else if tail.windows(2).all(|p| p[1] > p[0]) && last >= TREND_THRESHOLD {
        Trend::Diverging
    } else {
        Trend::Inconclusive
    }
}

/// Geometric probe grids for the regularity conditions near zero and
/// infinity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeGrid {
    pub small: (f64, f64),
    pub large: (f64, f64),
    pub points: usize,
    pub c_values: Vec<f64>,
    /// Largest deviation at the limiting end that still passes.
    pub tolerance: f64,
}

impl Default for ProbeGrid {
    fn default() -> Self {
        Self {
            small: (1e-6, 1e-1),
            large: (10.0, 1e4),
            points: 25,
            c_values: vec![-10.0, -1.0, 1.0, 10.0],
            tolerance: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    /// The grid end closest to the limit.
    pub t_limit: f64,
    /// Worst `|f(t + g(t)) / f(t) - 1|` over `c` at `t_limit`.
    pub deviation_at_limit: f64,
    /// Same quantity at the opposite grid end.
    pub deviation_far: f64,
    pub worst_c: f64,
    pub passed: bool,
}

/// Outcome of the regularity probes. A failed probe falsifies the
/// condition; a passed probe only fails to falsify it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub beta: f64,
    /// `g(t) = c t^(1 + 1/beta)` as `t -> 0`.
    pub near_zero: ProbeResult,
    /// `g(t) = c t^(-beta / (1 - beta))` as `t -> inf`.
    pub near_infinity: ProbeResult,
    pub passed: bool,
}

/// Probes whether `f(t + g(t)) / f(t) -> 1` for the perturbations allowed
/// by exponent `beta`.
pub fn check_cor3_conditions(
    w: &WeightFunction,
    beta: f64,
    grid: &ProbeGrid,
) -> Result<ConditionReport> {
    check_conditions_ln(|t| w.ln_value(t), beta, grid)
}

/// As [`check_cor3_conditions`], for a weight given through `ln f`. Working
/// with logarithms keeps the ratios meaningful where `f` underflows.
pub fn check_conditions_ln<F: Fn(f64) -> f64>(
    ln_f: F,
    beta: f64,
    grid: &ProbeGrid,
) -> Result<ConditionReport> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::Domain(format!(
            "beta must lie in (0, 1), got {beta}"
        )));
    }
    if grid.points < 2 || grid.c_values.is_empty() {
        return Err(Error::Domain(
            "probe grid needs two points and one c value".into(),
        ));
    }
    let small_exp = 1.0 + 1.0 / beta;
    let large_exp = -beta / (1.0 - beta);
    let near_zero = probe(&ln_f, grid, grid.small, grid.small.0, |t, c| {
        c * t.powf(small_exp)
    });
    let near_infinity = probe(&ln_f, grid, grid.large, grid.large.1, |t, c| {
        c * t.powf(large_exp)
    });
    Ok(ConditionReport {
        beta,
        passed: near_zero.passed && near_infinity.passed,
        near_zero,
        near_infinity,
    })
}

fn probe<F, G>(ln_f: &F, grid: &ProbeGrid, range: (f64, f64), limit: f64, g: G) -> ProbeResult
where
    F: Fn(f64) -> f64,
    G: Fn(f64, f64) -> f64,
{
    let deviation = |t: f64| -> (f64, f64) {
        let base = ln_f(t);
        let mut worst = (0.0, grid.c_values[0]);
        for &c in &grid.c_values {
            let moved = ln_f((t + g(t, c)).max(0.0));
            let dev = if base == f64::NEG_INFINITY {
                if moved == f64::NEG_INFINITY {
                    0.0
                } else {
                    1.0
                }
            } else {
                (moved - base).exp_m1().abs()
            };
            let dev = if dev.is_finite() { dev } else { f64::MAX };
            if dev > worst.0 {
                worst = (dev, c);
            }
        }
        worst
    };
    let far = if limit == range.0 { range.1 } else { range.0 };
    // Walk the grid toward the limit; the reported values are its ends.
    let ratio = (limit / far).powf(1.0 / (grid.points - 1) as f64);
    let mut t = far;
    let mut at_far = None;
    let mut last = (0.0, grid.c_values[0]);
    for k in 0..grid.points {
        let tk = if k + 1 == grid.points { limit } else { t };
        last = deviation(tk);
        at_far.get_or_insert(last.0);
        t *= ratio;
    }
    let deviation_far = at_far.unwrap_or(0.0);
    ProbeResult {
        t_limit: limit,
        deviation_at_limit: last.0,
        deviation_far,
        worst_c: last.1,
        passed: last.0 <= grid.tolerance && last.0 <= deviation_far.max(grid.tolerance),
    }
}

/// `exp(-1/x^2)` below 1 and `exp(-x^2)` from 1 on. For this weight the
/// regularity conditions fail at `beta = 1/2` on both sides, which shows
/// the exponent range cannot be widened.
pub fn sharpness_weight(x: f64) -> f64 {
    sharpness_ln_weight(x).exp()
}

pub fn sharpness_ln_weight(x: f64) -> f64 {
    if x <= 0.0 {
        f64::NEG_INFINITY
    } else if x < 1.0 {
        -1.0 / (x * x)
    } else {
        -x * x
    }
}

/// Leading-order packing constant for `f(t) = t exp(-t^2)` in the plane:
/// `f(tau(A))` at `A = (N / Delta_2)^(1/2)`, which reduces to
/// `x^(-1/(2(x-1))) ((1/2) ln x / (x - 1))^(1/2)` with `x = N / Delta_2`.
pub fn gaussian_2d_asymptote(n: usize, densities: &DensityTable) -> Result<f64> {
    let x = n as f64 / densities.require(2)?;
    if !(x > 1.0) {
        return Err(Error::Domain(format!("need N / Delta_2 > 1, got {x}")));
    }
    let lx = x.ln();
    let xm1 = x - 1.0;
    Ok((-lx / (2.0 * xm1)).exp() * (0.5 * lx / xm1).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FpqAsymptote {
    /// `Delta_d^(1/d) N^(-1/d)`.
    pub value: f64,
    /// Rigorous bound on `|1/D_d(N) - value|` from the density bounds.
    pub error_band: f64,
}

/// Leading term of the power-law constant `1 / D_d(N)` with the error
/// bound implied by `L <= D_d(N) <= A`: `|1/D - 1/A| <= (A - L) / (A L)`.
pub fn fpq_asymptote(d: usize, n: usize, densities: &DensityTable) -> Result<FpqAsymptote> {
    let b = diameter_bounds(d, n, densities)?;
    let a = b.upper;
    Ok(FpqAsymptote {
        value: 1.0 / a,
        error_band: (a - b.lower) / (a * b.lower),
    })
}
