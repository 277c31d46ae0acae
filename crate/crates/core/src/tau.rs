//! The functional equation `f(t) = f(alpha t)` and the envelopes that bound
//! `f(tau(A + lambda))` in terms of `tau(A)`.
//!
//! For `alpha > M / eps` the equation has exactly one positive root and it
//! lies in `(M / alpha, eps)`; `g(t) = f(alpha t) - f(t)` is positive at the
//! left end of that bracket and negative at the right end.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::bisect;
use crate::weights::{ClassAParams, WeightFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauMethod {
    ClosedFormPowerLaw,
    ClosedFormGaussian,
    Bisection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauResult {
    pub alpha: f64,
    pub tau: f64,
    pub f_at_tau: f64,
    pub bracket: (f64, f64),
    /// `f(tau) - f(alpha tau)`.
    pub residual: f64,
    pub method: TauMethod,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauOptions {
    /// Skip the closed forms of the built-in families.
    pub force_bisection: bool,
    /// Bisection stops at bracket width `width_rel * eps`.
    pub width_rel: f64,
    pub max_iter: usize,
}

impl Default for TauOptions {
    fn default() -> Self {
        Self {
            force_bisection: false,
            width_rel: 1e-14,
            max_iter: 200,
        }
    }
}

impl TauOptions {
    pub fn bisection() -> Self {
        Self {
            force_bisection: true,
            ..Self::default()
        }
    }
}

// Below this relative bracket width the root is taken as the midpoint.
const THIN_BRACKET: f64 = 1e-12;

pub fn solve_tau(w: &WeightFunction, params: &ClassAParams, alpha: f64) -> Result<TauResult> {
    solve_tau_with(w, params, alpha, &TauOptions::default())
}

pub fn solve_tau_with(
    w: &WeightFunction,
    params: &ClassAParams,
    alpha: f64,
    opts: &TauOptions,
) -> Result<TauResult> {
    let threshold = params.threshold();
    if !(alpha > threshold) || !alpha.is_finite() {
        return Err(Error::Precondition(format!(
            "alpha = {alpha} must exceed M/eps = {threshold}"
        )));
    }
    let lo = params.m / alpha;
    let hi = params.epsilon;
    let finish = |tau: f64, method: TauMethod| {
        let f_at_tau = w.value(tau);
        TauResult {
            alpha,
            tau,
            f_at_tau,
            bracket: (lo, hi),
            residual: f_at_tau - w.value(alpha * tau),
            method,
        }
    };

    if !opts.force_bisection {
        match *w {
            WeightFunction::PowerLaw { p, q } => {
                return Ok(finish(
                    alpha.powf(-q / (p + q)),
                    TauMethod::ClosedFormPowerLaw,
                ));
            }
            WeightFunction::GaussianType { beta } => {
                let la = alpha.ln();
                let tau = (la / (beta * la).exp_m1()).powf(1.0 / beta);
                return Ok(finish(tau, TauMethod::ClosedFormGaussian));
            }
            WeightFunction::Piecewise(_) => {}
        }
    }

    if (hi - lo) <= THIN_BRACKET * hi {
        return Ok(finish(0.5 * (lo + hi), TauMethod::Bisection));
    }
    let g = |t: f64| w.value(alpha * t) - w.value(t);
    let (g_lo, g_hi) = (g(lo), g(hi));
    if g_lo < 0.0 || g_hi > 0.0 {
        return Err(Error::Certification(format!(
            "f(alpha t) - f(t) has signs ({g_lo:e}, {g_hi:e}) on [{lo}, {hi}]; \
             expected (+, -) for an admissible weight"
        )));
    }
    let b = bisect(g, lo, hi, opts.width_rel * hi, opts.max_iter);
    Ok(finish(b.root, TauMethod::Bisection))
}

/// The four envelope inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Lemma3Case {
    /// `lambda >= 0`: `f(A tau(A)/(A+lambda)) <= . <= f(tau(A))`
    In1,
    /// `lambda >= 0`: `f((A+lambda) tau(A)) <= . <= f(A tau(A))`
    In2,
    /// `lambda <= 0`, `A tau(A)/(A+lambda) <= M`: `f(tau(A)) <= . <= f(A tau(A)/(A+lambda))`
    In3,
    /// `lambda <= 0`, `eps <= (A+lambda) tau(A)`: `f(A tau(A)) <= . <= f((A+lambda) tau(A))`
    In4,
}

/// Two-sided bounds on `f(tau(A + lambda))` computed from `tau(A)` alone.
///
/// When several cases apply the bounds are intersected. If `lambda < 0` and
/// neither side condition holds, `side_conditions_met` is false and the
/// bounds fall back to `[f(tau(A)), f(eps)]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma3Bounds {
    #[serde(rename = "A")]
    pub a: f64,
    pub lambda: f64,
    pub lower_on_f_tau: f64,
    pub upper_on_f_tau: f64,
    pub cases: Vec<Lemma3Case>,
    pub side_conditions_met: bool,
}

pub fn lemma3_bounds(
    w: &WeightFunction,
    params: &ClassAParams,
    a: f64,
    lambda: f64,
) -> Result<Lemma3Bounds> {
    let threshold = params.threshold();
    let shifted = a + lambda;
    if !(a > threshold && shifted > threshold) {
        return Err(Error::Precondition(format!(
            "A = {a} and A + lambda = {shifted} must both exceed M/eps = {threshold}"
        )));
    }
    if lambda <= 0.0 && !(a <= shifted * shifted) {
        return Err(Error::Precondition(format!(
            "for lambda <= 0 the envelope requires A <= (A + lambda)^2, got A = {a}, A + lambda = {shifted}"
        )));
    }
    let base = solve_tau(w, params, a)?;
    let tau_a = base.tau;
    let f_tau_a = base.f_at_tau;

    let mut cases = Vec::new();
    let (lower, upper, met);
    if lambda >= 0.0 {
        let in1 = w.value(a * tau_a / shifted);
        let in2 = w.value(shifted * tau_a);
        let in2_upper = w.value(a * tau_a);
        cases.push(Lemma3Case::In1);
        cases.push(Lemma3Case::In2);
        if lambda == 0.0 {
            cases.push(Lemma3Case::In3);
            cases.push(Lemma3Case::In4);
        }
        lower = in1.max(in2);
        upper = f_tau_a.min(in2_upper);
        met = true;
        if lambda == 0.0 {
            return Ok(Lemma3Bounds {
                a,
                lambda,
                lower_on_f_tau: f_tau_a,
                upper_on_f_tau: f_tau_a,
                cases,
                side_conditions_met: true,
            });
        }
    } else {
        let mut lo = f_tau_a;
        let mut hi = f64::INFINITY;
        let x3 = a * tau_a / shifted;
        if x3 <= params.m {
            cases.push(Lemma3Case::In3);
            hi = hi.min(w.value(x3));
        }
        let x4 = shifted * tau_a;
        if params.epsilon <= x4 {
            cases.push(Lemma3Case::In4);
            lo = lo.max(w.value(a * tau_a));
            hi = hi.min(w.value(x4));
        }
        met = !cases.is_empty();
        if !met {
            hi = w.value(params.epsilon);
        }
        lower = lo;
        upper = hi;
    }
    Ok(Lemma3Bounds {
        a,
        lambda,
        lower_on_f_tau: lower,
        upper_on_f_tau: upper,
        cases,
        side_conditions_met: met,
    })
}
