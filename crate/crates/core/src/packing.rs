//! Best-packing constants `delta_d(N; f)`: the largest possible value of
//! the minimum pairwise weight `f(|x - y|)` over `N` points in `R^d`.
//!
//! Once `D_d(N) > M / eps` the constant is `f(tau(D_d(N)))`, and optimal
//! configurations have minimal separation `tau(D_d(N))` and diameter
//! `tau(D_d(N)) D_d(N)`.

use serde::{Deserialize, Serialize};

use crate::configuration::{config_ratio, Configuration};
use crate::diameter::{exact_diameter, structured_seeds, DiameterEstimate};
use crate::error::{Error, Result};
use crate::roots::golden_min;
use crate::search::{multistart, Goal, PairMap, Problem, SearchOptions};
use crate::tau::{lemma3_bounds, solve_tau, Lemma3Bounds};
use crate::weights::{ClassAParams, WeightFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DSource {
    #[serde(rename = "exact")]
    Exact,
    #[serde(rename = "numeric")]
    NumericEstimate,
    #[serde(rename = "lower")]
    LowerBound,
    #[serde(rename = "upper")]
    UpperBound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackingResult {
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    /// Absent when no formula applies.
    pub delta: Option<f64>,
    #[serde(rename = "t_N")]
    pub t_n: Option<f64>,
    #[serde(rename = "D_used")]
    pub d_used: f64,
    #[serde(rename = "D_source")]
    pub d_source: DSource,
    /// Whether `D_used > M / eps`.
    pub applicable: bool,
    /// Whether `delta` is proven to equal the packing constant.
    pub certified: bool,
    /// Bounds on the true constant when `D_used` is only a bound.
    pub envelope: Option<Lemma3Bounds>,
    /// Set when a maximum was located on a grid rather than analytically.
    pub reduced_precision: bool,
    pub witness: Option<Configuration>,
}

/// Applies `delta = f(tau(D))` for a known or bounded `D_d(N)`.
///
/// For bounded `D` the upper end is used, which gives a lower bound on the
/// true constant; the envelope bounds it from above.
pub fn delta_via_theorem1(
    w: &WeightFunction,
    params: &ClassAParams,
    d: usize,
    n: usize,
    dia: &DiameterEstimate,
) -> Result<PackingResult> {
    if dia.d != d || dia.n != n {
        return Err(Error::Domain(format!(
            "diameter estimate is for d = {}, N = {}, not d = {d}, N = {n}",
            dia.d, dia.n
        )));
    }
    let threshold = params.threshold();
    let (d_used, d_source) = if dia.exact {
        (dia.value(), DSource::Exact)
    } else if dia.numeric.is_some_and(|v| v <= dia.upper) {
        (dia.upper, DSource::NumericEstimate)
    } else {
        (dia.upper, DSource::UpperBound)
    };
    let mut out = PackingResult {
        d,
        n,
        delta: None,
        t_n: None,
        d_used,
        d_source,
        applicable: d_used > threshold,
        certified: false,
        envelope: None,
        reduced_precision: false,
        witness: None,
    };
    if !out.applicable {
        return Ok(out);
    }
    let tau = solve_tau(w, params, d_used)?;
    out.t_n = Some(tau.tau);
    out.delta = Some(tau.f_at_tau);
    if dia.exact {
        out.certified = true;
        out.witness = dia.witness.as_ref().map(|c| c.normalized(tau.tau));
    } else {
        out.envelope = lemma3_bounds(w, params, d_used, dia.lower - d_used).ok();
    }
    Ok(out)
}

/// The one-dimensional constant, where `D_1(N) = N - 1` and arithmetic
/// progressions with step `t_N` are optimal.
pub fn delta_1d(w: &WeightFunction, params: &ClassAParams, n: usize) -> Result<PackingResult> {
    if n < 2 {
        return Err(Error::Domain(format!("need N >= 2, got {n}")));
    }
    if n == 2 {
        return Ok(two_point_result(w, params, 1));
    }
    let dia = exact_diameter(1, n).expect("line diameters are exact");
    let mut out = delta_via_theorem1(w, params, 1, n, &dia)?;
    if let Some(t) = out.t_n {
        let pts = (0..n).map(|k| t * k as f64).collect();
        out.witness = Some(Configuration::from_flat(1, pts)?);
    }
    Ok(out)
}

/// Two points: the constant is the maximum of `f`, attained on `[eps, M]`.
fn two_point_result(w: &WeightFunction, params: &ClassAParams, d: usize) -> PackingResult {
    let (t, value, grid) = argmax_on(w, params.epsilon, params.m);
    let mut coords = vec![0.0; 2 * d];
    coords[d] = t;
    PackingResult {
        d,
        n: 2,
        delta: Some(value),
        t_n: Some(t),
        d_used: 1.0,
        d_source: DSource::Exact,
        applicable: false,
        certified: true,
        envelope: None,
        reduced_precision: grid,
        witness: Configuration::from_flat(d, coords).ok(),
    }
}

// f increases up to eps and decreases past M, so its maximum lies on
// [eps, M]. Returns (argmax, max, located-on-grid).
fn argmax_on(w: &WeightFunction, eps: f64, big_m: f64) -> (f64, f64, bool) {
    if big_m <= eps {
        return (eps, w.value(eps), false);
    }
    let k = 4096;
    let mut best = (eps, w.value(eps));
    for i in 1..=k {
        let t = eps + (big_m - eps) * i as f64 / k as f64;
        let v = w.value(t);
        if v > best.1 {
            best = (t, v);
        }
    }
    // Golden-section polish around the best grid point.
    let h = (big_m - eps) / k as f64;
    let (a, b) = ((best.0 - h).max(eps), (best.0 + h).min(big_m));
    let (t, v) = golden_min(|t| -w.value(t), a, b, 100);
    let v = -v;
    if v > best.1 {
        best = (t, v);
    }
    (best.0, best.1, true)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub min_sep: f64,
    pub diam: f64,
    #[serde(rename = "t_N")]
    pub t_n: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub min_sep_ok: bool,
    pub diam_ok: bool,
    /// Minimum over pairs of `f(|x - y|)`.
    pub achieved_delta: f64,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.min_sep_ok && self.diam_ok
    }
}

/// Checks the two optimality conditions `min_sep = t_N` and
/// `diam = t_N D` to within `tol`.
pub fn verify_optimality(
    w: &WeightFunction,
    c: &Configuration,
    t_n: f64,
    d: f64,
    tol: f64,
) -> VerificationReport {
    let achieved = c
        .pair_distances()
        .map(|r| w.value(r))
        .fold(f64::INFINITY, f64::min);
    VerificationReport {
        min_sep: c.min_sep(),
        diam: c.diam(),
        t_n,
        d,
        min_sep_ok: (c.min_sep() - t_n).abs() <= tol,
        diam_ok: (c.diam() - t_n * d).abs() <= tol,
        achieved_delta: achieved,
    }
}

/// Optimizer tolerance for the cross-check against the analytic value.
pub const CROSS_CHECK_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizedPacking {
    #[serde(flatten)]
    pub result: PackingResult,
    /// The analytic constant (or upper bound on it) the optimizer was
    /// checked against.
    pub reference_delta: Option<f64>,
    pub evaluations: u64,
    pub restarts: usize,
    pub converged: bool,
}

/// Maximizes the minimum pairwise weight directly.
///
/// The result is labelled non-certified. When the analytic constant (or
/// an upper bound on it) is available, the optimizer value is required not
/// to exceed it by more than [`CROSS_CHECK_TOL`].
pub fn optimize_packing_config(
    w: &WeightFunction,
    params: &ClassAParams,
    d: usize,
    n: usize,
    budget: u64,
    seed: u64,
) -> Result<OptimizedPacking> {
    if d == 0 || n < 2 {
        return Err(Error::Domain(format!(
            "need d >= 1 and N >= 2, got d = {d}, N = {n}"
        )));
    }
    if budget == 0 {
        return Err(Error::Domain("budget must be positive".into()));
    }
    let reference = reference_delta(w, params, d, n)?;
    let problem = Problem {
        n,
        dim: d,
        map: PairMap::LogWeight(w),
        goal: Goal::NegMin,
        seeds: structured_seeds(d, n),
        scale: Some((params.epsilon, params.m)),
        target: reference.filter(|r| *r > 0.0).map(|r| -r.ln()),
    };
    let outcome = multistart(&problem, &SearchOptions::new(budget, seed));
    let witness = Configuration::from_flat(d, outcome.best)?;
    let delta = witness
        .pair_distances()
        .map(|r| w.value(r))
        .fold(f64::INFINITY, f64::min);
    if let Some(r) = reference {
        if delta > r + CROSS_CHECK_TOL {
            return Err(Error::Internal(format!(
                "optimizer reached {delta}, above the analytic value {r}"
            )));
        }
    }
    let ratio = config_ratio(&witness);
    Ok(OptimizedPacking {
        result: PackingResult {
            d,
            n,
            delta: Some(delta),
            t_n: Some(witness.min_sep()),
            d_used: ratio,
            d_source: DSource::NumericEstimate,
            applicable: ratio > params.threshold(),
            certified: false,
            envelope: None,
            reduced_precision: false,
            witness: Some(witness),
        },
        reference_delta: reference,
        evaluations: outcome.evaluations,
        restarts: outcome.restarts,
        converged: outcome.converged,
    })
}

// The exact constant when D_d(N) is known, otherwise f(tau(lower bound)),
// which dominates the constant because f(tau(.)) is decreasing.
fn reference_delta(
    w: &WeightFunction,
    params: &ClassAParams,
    d: usize,
    n: usize,
) -> Result<Option<f64>> {
    if n == 2 {
        return Ok(two_point_result(w, params, d).delta);
    }
    if let Some(e) = exact_diameter(d, n) {
        return Ok(delta_via_theorem1(w, params, d, n, &e)?.delta);
    }
    let defaults = crate::diameter::DensityTable::default();
    let Ok(b) = crate::diameter::diameter_bounds(d, n, &defaults) else {
        return Ok(None);
    };
    if b.lower > params.threshold() {
        Ok(Some(solve_tau(w, params, b.lower)?.f_at_tau))
    } else {
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::critical_params;

    const LN2: f64 = std::f64::consts::LN_2;

    fn setup(w: WeightFunction) -> (WeightFunction, ClassAParams) {
        let p = critical_params(&w).unwrap();
        (w, p)
    }

    #[test]
    fn hexagon_gaussian_value() {
        let (w, p) = setup(WeightFunction::gaussian(2.0).unwrap());
        let r = delta_via_theorem1(&w, &p, 2, 7, &exact_diameter(2, 7).unwrap()).unwrap();
        let expect = 2f64.powf(-1.0 / 3.0) * (LN2 / 3.0).sqrt();
        assert!((r.delta.unwrap() - expect).abs() < 1e-12);
        assert!((r.t_n.unwrap() - (LN2 / 3.0).sqrt()).abs() < 1e-12);
        assert!(r.certified && r.applicable);
        let c = r.witness.unwrap();
        assert!(verify_optimality(&w, &c, r.t_n.unwrap(), 2.0, 1e-12).passed());
    }

    #[test]
    fn power_law_reciprocal() {
        let (w, p) = setup(WeightFunction::power_law(2.0, 2.0).unwrap());
        let r = delta_1d(&w, &p, 11).unwrap();
        assert!((r.delta.unwrap() - 0.1).abs() < 1e-15);
        let (w, p) = setup(WeightFunction::power_law(3.0, 1.5).unwrap());
        let r = delta_via_theorem1(&w, &p, 2, 7, &exact_diameter(2, 7).unwrap()).unwrap();
        assert!((r.delta.unwrap() * r.d_used - 1.0).abs() < 1e-12);
    }

    #[test]
    fn one_dimensional_gaussian() {
        let (w, p) = setup(WeightFunction::gaussian(1.0).unwrap());
        let r = delta_1d(&w, &p, 3).unwrap();
        assert!((r.t_n.unwrap() - LN2).abs() < 1e-14);
        assert!((r.delta.unwrap() - 0.346573590279972655).abs() < 1e-14);
        let two = delta_1d(&w, &p, 2).unwrap();
        assert!((two.delta.unwrap() - (-1f64).exp()).abs() < 1e-15);
        assert_eq!(two.witness.unwrap().coords(), &[0.0, 1.0]);
        assert!(!two.reduced_precision);
    }

    #[test]
    fn bounded_diameter_gets_envelope() {
        let (w, p) = setup(WeightFunction::gaussian(1.0).unwrap());
        let b = crate::diameter::diameter_bounds(2, 40, &Default::default()).unwrap();
        let r = delta_via_theorem1(&w, &p, 2, 40, &b).unwrap();
        assert_eq!(r.d_source, DSource::UpperBound);
        assert!(!r.certified);
        let env = r.envelope.unwrap();
        assert!(env.lower_on_f_tau <= r.delta.unwrap() + 1e-15);
        let truth_hi = solve_tau(&w, &p, b.lower).unwrap().f_at_tau;
        assert!(truth_hi <= env.upper_on_f_tau + 1e-12);
    }

    #[test]
    fn inapplicable_small_diameter() {
        let (w, p) = setup(WeightFunction::gaussian(1.0).unwrap());
        let e = exact_diameter(2, 7).unwrap();
        let mut e = e;
        e.numeric = Some(0.9);
        let r = delta_via_theorem1(&w, &p, 2, 7, &e).unwrap();
        assert!(!r.applicable && r.delta.is_none());
    }

    #[test]
    fn verification_clauses() {
        let (w, _) = setup(WeightFunction::gaussian(1.0).unwrap());
        let t = 0.7;
        let tri = Configuration::from_points(&[
            vec![0.0, 0.0],
            vec![t, 0.0],
            vec![0.5 * t, t * 3f64.sqrt() / 2.0],
        ])
        .unwrap();
        assert!(verify_optimality(&w, &tri, t, 1.0, 1e-12).passed());
        let sq =
            Configuration::from_points(&[vec![0.0, 0.0], vec![t, 0.0], vec![t, t], vec![0.0, t]])
                .unwrap();
        let rep = verify_optimality(&w, &sq, t, std::f64::consts::SQRT_2, 1e-12);
        assert!(rep.passed());
        let rep = verify_optimality(&w, &sq, t, 1.3, 1e-9);
        assert!(rep.min_sep_ok && !rep.diam_ok);
    }

    #[test]
    fn optimizer_small_cases() {
        let (w, p) = setup(WeightFunction::gaussian(1.0).unwrap());
        let r = optimize_packing_config(&w, &p, 1, 3, 100_000, 0).unwrap();
        assert!((r.result.delta.unwrap() - LN2 / 2.0).abs() < 1e-6);
        let two = optimize_packing_config(&w, &p, 2, 2, 10_000, 0).unwrap();
        assert!((two.result.delta.unwrap() - (-1f64).exp()).abs() < 1e-9);
    }
}
