//! Weight functions of the admissible class and their critical parameters.
//!
//! A weight `f` on `[0, inf)` is admissible when `f(0) = 0`, `f > 0` on
//! `(0, inf)`, `f(t) -> 0` as `t -> inf`, and there are `0 < eps <= M` with
//! `f` strictly increasing on `[0, eps]` and strictly decreasing on
//! `[M, inf)`. The parameters are normalized so that
//! `f(eps) = f(M) = min_{[eps, M]} f`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::{hermite_eval, monotone_slopes};
use crate::roots::bisect;

/// How a piecewise weight continues past its last breakpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailDecay {
    /// `v_n * exp(-r (t - t_n))`
    Exponential,
    /// `v_n * (t / t_n)^(-k)`
    Power,
}

/// A weight given by samples, interpolated with monotone cubics.
#[derive(Debug, Clone, PartialEq)]
pub struct Piecewise {
    t: Vec<f64>,
    v: Vec<f64>,
    slopes: Vec<f64>,
    tail: TailDecay,
    tail_rate: f64,
}

impl Piecewise {
    pub fn new(points: &[(f64, f64)], tail: TailDecay) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidWeight(
                "piecewise weight needs at least two breakpoints".into(),
            ));
        }
        let t: Vec<f64> = points.iter().map(|p| p.0).collect();
        let v: Vec<f64> = points.iter().map(|p| p.1).collect();
        if t[0] != 0.0 {
            return Err(Error::InvalidWeight(format!(
                "first breakpoint must be at t = 0, got {}",
                t[0]
            )));
        }
        if let Some(i) = t.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidWeight(format!(
                "breakpoints must be strictly increasing (points {} and {})",
                i,
                i + 1
            )));
        }
        if let Some(i) = v.iter().position(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidWeight(format!(
                "value at breakpoint {i} must be finite and non-negative"
            )));
        }
        if t.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidWeight("breakpoints must be finite".into()));
        }
        let slopes = monotone_slopes(&t, &v);
        let n = t.len();
        let secant = (v[n - 1] - v[n - 2]) / (t[n - 1] - t[n - 2]);
        let tail_rate = if v[n - 1] > 0.0 && secant < 0.0 {
            match tail {
                TailDecay::Exponential => -secant / v[n - 1],
                TailDecay::Power => -secant * t[n - 1] / v[n - 1],
            }
        } else {
            0.0
        };
        Ok(Self {
            t,
            v,
            slopes,
            tail,
            tail_rate,
        })
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.t.iter().copied().zip(self.v.iter().copied())
    }

    pub fn tail(&self) -> TailDecay {
        self.tail
    }

    /// Decay rate of the tail envelope, matched to the last secant.
    pub fn tail_rate(&self) -> f64 {
        self.tail_rate
    }

    fn last(&self) -> (f64, f64) {
        let n = self.t.len();
        (self.t[n - 1], self.v[n - 1])
    }

    fn value(&self, t: f64) -> f64 {
        let (tn, vn) = self.last();
        if t <= tn {
            return hermite_eval(&self.t, &self.v, &self.slopes, t);
        }
        match self.tail {
            TailDecay::Exponential => vn * (-self.tail_rate * (t - tn)).exp(),
            TailDecay::Power => vn * (t / tn).powf(-self.tail_rate),
        }
    }

    /// Solves `tail(t) = level` for `t > t_n`, given `0 < level <= v_n`.
    fn tail_inverse(&self, level: f64) -> f64 {
        let (tn, vn) = self.last();
        match self.tail {
            TailDecay::Exponential => tn + (vn / level).ln() / self.tail_rate,
            TailDecay::Power => tn * (vn / level).powf(1.0 / self.tail_rate),
        }
    }

    /// Index of the end of the strictly increasing prefix of the samples.
    fn head_end(&self) -> usize {
        self.v
            .windows(2)
            .position(|w| !(w[1] > w[0]))
            .unwrap_or(self.v.len() - 1)
    }

    /// Index of the start of the strictly decreasing suffix of the samples.
    fn tail_start(&self) -> usize {
        let n = self.v.len();
        let mut i = n - 1;
        while i > 0 && self.v[i - 1] > self.v[i] {
            i -= 1;
        }
        i
    }
}

/// A weight function of the admissible class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WeightSpec", into = "WeightSpec")]
pub enum WeightFunction {
    /// `t^p` on `[0, 1]`, `t^-q` beyond, with `1/p + 1/q = 1`.
    PowerLaw {
        p: f64,
        q: f64,
    },
    /// `t * exp(-t^beta)`.
    GaussianType {
        beta: f64,
    },
    Piecewise(Piecewise),
}

const CONJUGATE_TOL: f64 = 1e-12;

impl WeightFunction {
    pub fn power_law(p: f64, q: f64) -> Result<Self> {
        if !(p > 0.0 && q > 0.0 && p.is_finite() && q.is_finite()) {
            return Err(Error::InvalidWeight(format!(
                "power-law exponents must be positive and finite, got p={p}, q={q}"
            )));
        }
        if (1.0 / p + 1.0 / q - 1.0).abs() > CONJUGATE_TOL {
            return Err(Error::InvalidWeight(format!(
                "power-law exponents must satisfy 1/p + 1/q = 1, got {}",
                1.0 / p + 1.0 / q
            )));
        }
        Ok(Self::PowerLaw { p, q })
    }

    pub fn gaussian(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidWeight(format!(
                "gaussian-type exponent must be positive, got {beta}"
            )));
        }
        Ok(Self::GaussianType { beta })
    }

    pub fn piecewise(points: &[(f64, f64)], tail: TailDecay) -> Result<Self> {
        Piecewise::new(points, tail).map(Self::Piecewise)
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            Self::PowerLaw { .. } => "powerlaw",
            Self::GaussianType { .. } => "gaussian",
            Self::Piecewise(_) => "piecewise",
        }
    }

    /// Evaluates `f(t)`, rejecting negative or non-finite distances.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::Domain(format!(
                "weight evaluated at t = {t}; distances must be non-negative"
            )));
        }
        Ok(self.value(t))
    }

    /// Unchecked evaluation; `t` must be non-negative.
    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Self::PowerLaw { p, q } => {
                if t <= 1.0 {
                    pow_fast(t, *p)
                } else {
                    pow_fast(t, -*q)
                }
            }
            Self::GaussianType { beta } => t * (-pow_fast(t, *beta)).exp(),
            Self::Piecewise(pw) => pw.value(t),
        }
    }

    /// `ln f(t)`, computed without underflow for the built-in families.
    #[inline]
    pub fn ln_value(&self, t: f64) -> f64 {
        match self {
            Self::PowerLaw { p, q } => {
                if t <= 1.0 {
                    p * t.ln()
                } else {
                    -q * t.ln()
                }
            }
            Self::GaussianType { beta } => t.ln() - pow_fast(t, *beta),
            Self::Piecewise(pw) => pw.value(t).ln(),
        }
    }
}

#[inline]
fn pow_fast(t: f64, e: f64) -> f64 {
    if e == 1.0 {
        t
    } else if e == 2.0 {
        t * t
    } else if e == 0.5 {
        t.sqrt()
    } else if e == -2.0 {
        1.0 / (t * t)
    } else {
        t.powf(e)
    }
}

/// The on-disk weight definition.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum WeightSpec {
    Gaussian {
        beta: f64,
    },
    Powerlaw {
        p: f64,
        q: f64,
    },
    Piecewise {
        points: Vec<(f64, f64)>,
        tail: TailDecay,
    },
}

impl TryFrom<WeightSpec> for WeightFunction {
    type Error = Error;

    fn try_from(spec: WeightSpec) -> Result<Self> {
        match spec {
            WeightSpec::Gaussian { beta } => Self::gaussian(beta),
            WeightSpec::Powerlaw { p, q } => Self::power_law(p, q),
            WeightSpec::Piecewise { points, tail } => Self::piecewise(&points, tail),
        }
    }
}

impl From<WeightFunction> for WeightSpec {
    fn from(w: WeightFunction) -> Self {
        match w {
            WeightFunction::GaussianType { beta } => WeightSpec::Gaussian { beta },
            WeightFunction::PowerLaw { p, q } => WeightSpec::Powerlaw { p, q },
            WeightFunction::Piecewise(pw) => WeightSpec::Piecewise {
                points: pw.points().collect(),
                tail: pw.tail,
            },
        }
    }
}

// Flat mirror of `WeightSpec`. Tagged enums buffer their input, which loses
// the position of type errors; a plain struct keeps it.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    family: String,
    beta: Option<f64>,
    p: Option<f64>,
    q: Option<f64>,
    points: Option<Vec<(f64, f64)>>,
    tail: Option<TailDecay>,
}

fn field<T>(value: Option<T>, family: &str, name: &str) -> Result<T> {
    value.ok_or_else(|| Error::Parse(format!("{family} weight requires field `{name}`")))
}

/// Parses a weight from its JSON definition.
pub fn parse_weight_json(text: &str) -> Result<WeightFunction> {
    let raw: RawSpec = serde_json::from_str(text).map_err(|e| {
        Error::Parse(format!(
            "weight definition, line {} column {}: {e}",
            e.line(),
            e.column()
        ))
    })?;
    let fam = raw.family.as_str();
    let spec = match fam {
        "gaussian" => WeightSpec::Gaussian {
            beta: field(raw.beta, fam, "beta")?,
        },
        "powerlaw" => WeightSpec::Powerlaw {
            p: field(raw.p, fam, "p")?,
            q: field(raw.q, fam, "q")?,
        },
        "piecewise" => WeightSpec::Piecewise {
            points: field(raw.points, fam, "points")?,
            tail: field(raw.tail, fam, "tail")?,
        },
        other => {
            return Err(Error::Parse(format!(
                "unknown weight family `{other}`; expected gaussian, powerlaw or piecewise"
            )))
        }
    };
    WeightFunction::try_from(spec)
}

/// Normalized critical parameters `(eps, M)` of an admissible weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassAParams {
    pub epsilon: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub certified: bool,
}

impl ClassAParams {
    /// `M / eps`: the functional equation has a unique root only above this.
    pub fn threshold(&self) -> f64 {
        self.m / self.epsilon
    }
}

/// Tolerances used when certifying critical parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyTolerances {
    pub analytic: f64,
    pub piecewise: f64,
    pub grid_size: usize,
}

impl Default for CertifyTolerances {
    fn default() -> Self {
        Self {
            analytic: 1e-10,
            piecewise: 1e-6,
            grid_size: 1024,
        }
    }
}

pub fn critical_params(w: &WeightFunction) -> Result<ClassAParams> {
    critical_params_with(w, &CertifyTolerances::default())
}

pub fn critical_params_with(w: &WeightFunction, tol: &CertifyTolerances) -> Result<ClassAParams> {
    match w {
        WeightFunction::PowerLaw { .. } | WeightFunction::GaussianType { .. } => {
            let report = validate_class_a(w, tol.grid_size);
            if let Some(bad) = report.first_failure() {
                return Err(Error::Classification {
                    clause: bad.clause.name().into(),
                    lo: 0.0,
                    hi: f64::INFINITY,
                    detail: bad.note.clone(),
                });
            }
            let peak = match w {
                WeightFunction::PowerLaw { .. } => 1.0,
                WeightFunction::GaussianType { beta } => beta.powf(-1.0 / beta),
                WeightFunction::Piecewise(_) => unreachable!(),
            };
            Ok(ClassAParams {
                epsilon: peak,
                m: peak,
                certified: true,
            })
        }
        WeightFunction::Piecewise(pw) => piecewise_params(w, pw, tol),
    }
}

fn piecewise_params(
    w: &WeightFunction,
    pw: &Piecewise,
    tol: &CertifyTolerances,
) -> Result<ClassAParams> {
    let n = pw.t.len();
    let ia = pw.head_end();
    if ia == 0 {
        return Err(Error::Classification {
            clause: Clause::MonotoneHead.name().into(),
            lo: pw.t[0],
            hi: pw.t[1],
            detail: "weight does not increase away from the origin".into(),
        });
    }
    let ib = pw.tail_start();
    if ib == n - 1 || pw.tail_rate <= 0.0 {
        return Err(Error::Classification {
            clause: Clause::MonotoneTail.name().into(),
            lo: pw.t[n - 2],
            hi: pw.t[n - 1],
            detail: "weight is not strictly decreasing into its tail".into(),
        });
    }
    let report = validate_class_a(w, tol.grid_size);
    if let Some(bad) = report.first_failure() {
        let lo = bad.violations.first().copied().unwrap_or(0.0);
        let hi = bad.violations.last().copied().unwrap_or(lo);
        return Err(Error::Classification {
            clause: bad.clause.name().into(),
            lo,
            hi,
            detail: bad.note.clone(),
        });
    }

    let (a, b) = (pw.t[ia], pw.t[ib]);
    let (epsilon, m) = if ia >= ib {
        (a, a)
    } else {
        // Monotone segments attain their extrema at the nodes.
        let level = pw.v[ia..=ib].iter().copied().fold(f64::INFINITY, f64::min);
        let width = 1e-15 * b.max(1.0);
        let eps = if pw.v[ia] == level {
            a
        } else {
            bisect(|t| pw.value(t) - level, 0.0, a, width, 200).root
        };
        let big_m = if pw.v[ib] == level {
            b
        } else if pw.v[n - 1] <= level {
            bisect(|t| pw.value(t) - level, b, pw.t[n - 1], width, 200).root
        } else {
            pw.tail_inverse(level)
        };
        (eps, big_m)
    };

    let fe = pw.value(epsilon);
    let fm = pw.value(m);
    if (fe - fm).abs() > tol.piecewise {
        return Err(Error::Certification(format!(
            "critical values differ: f(eps) = {fe}, f(M) = {fm}"
        )));
    }
    if m > epsilon {
        let grid = 1000;
        for k in 0..=grid {
            let t = epsilon + (m - epsilon) * k as f64 / grid as f64;
            if pw.value(t) < fe - tol.piecewise {
                return Err(Error::Certification(format!(
                    "f({t}) = {} lies below f(eps) = {fe} inside [eps, M]",
                    pw.value(t)
                )));
            }
        }
    }
    Ok(ClassAParams {
        epsilon,
        m,
        certified: true,
    })
}

/// One clause of the admissible-class definition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Clause {
    Parameters,
    ZeroAtOrigin,
    Positivity,
    Decay,
    MonotoneHead,
    MonotoneTail,
}

impl Clause {
    pub fn name(&self) -> &'static str {
        match self {
            Clause::Parameters => "parameters",
            Clause::ZeroAtOrigin => "zero_at_origin",
            Clause::Positivity => "positivity",
            Clause::Decay => "decay",
            Clause::MonotoneHead => "monotone_head",
            Clause::MonotoneTail => "monotone_tail",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClauseCheck {
    pub clause: Clause,
    pub passed: bool,
    /// Sample points where the clause was seen to fail (truncated).
    pub violations: Vec<f64>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub family: String,
    pub analytic: bool,
    pub clauses: Vec<ClauseCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.clauses.iter().all(|c| c.passed)
    }

    pub fn clause(&self, clause: Clause) -> Option<&ClauseCheck> {
        self.clauses.iter().find(|c| c.clause == clause)
    }

    pub fn first_failure(&self) -> Option<&ClauseCheck> {
        self.clauses.iter().find(|c| !c.passed)
    }
}

const MAX_VIOLATIONS: usize = 16;

fn check(clause: Clause, violations: Vec<f64>, ok_note: &str, bad_note: &str) -> ClauseCheck {
    let passed = violations.is_empty();
    let mut violations = violations;
    violations.truncate(MAX_VIOLATIONS);
    ClauseCheck {
        clause,
        passed,
        violations,
        note: if passed { ok_note } else { bad_note }.to_string(),
    }
}

fn analytic(clause: Clause, passed: bool, note: &str) -> ClauseCheck {
    ClauseCheck {
        clause,
        passed,
        violations: Vec::new(),
        note: note.to_string(),
    }
}

/// Checks every clause of the class definition. Built-in families are
/// decided from their parameters; piecewise weights are sampled on grids of
/// `grid_size` points (at least 16).
pub fn validate_class_a(w: &WeightFunction, grid_size: usize) -> ValidationReport {
    let grid_size = grid_size.max(16);
    let clauses = match w {
        WeightFunction::PowerLaw { p, q } => {
            let head = *p > 0.0 && p.is_finite();
            let tail = *q > 0.0 && q.is_finite();
            let conj = (1.0 / p + 1.0 / q - 1.0).abs() <= CONJUGATE_TOL;
            vec![
                analytic(Clause::Parameters, conj, "1/p + 1/q = 1"),
                analytic(Clause::ZeroAtOrigin, head, "t^p vanishes at 0 for p > 0"),
                analytic(
                    Clause::Positivity,
                    head && tail,
                    "powers of t > 0 are positive",
                ),
                analytic(Clause::Decay, tail, "t^-q -> 0 for q > 0"),
                analytic(Clause::MonotoneHead, head, "t^p increasing on [0, 1]"),
                analytic(Clause::MonotoneTail, tail, "t^-q decreasing on [1, inf)"),
            ]
        }
        WeightFunction::GaussianType { beta } => {
            let ok = *beta > 0.0 && beta.is_finite();
            vec![
                analytic(Clause::Parameters, ok, "beta > 0"),
                analytic(Clause::ZeroAtOrigin, true, "t exp(-t^beta) vanishes at 0"),
                analytic(Clause::Positivity, true, "t exp(-t^beta) > 0 for t > 0"),
                analytic(Clause::Decay, ok, "exp(-t^beta) dominates t"),
                analytic(Clause::MonotoneHead, ok, "f' > 0 below beta^(-1/beta)"),
                analytic(Clause::MonotoneTail, ok, "f' < 0 above beta^(-1/beta)"),
            ]
        }
        WeightFunction::Piecewise(pw) => piecewise_clauses(pw, grid_size),
    };
    ValidationReport {
        family: w.family_name().to_string(),
        analytic: !matches!(w, WeightFunction::Piecewise(_)),
        clauses,
    }
}

fn piecewise_clauses(pw: &Piecewise, grid_size: usize) -> Vec<ClauseCheck> {
    let tol = CertifyTolerances::default().piecewise;
    let (tn, vn) = pw.last();
    let uniform: Vec<f64> = (0..grid_size)
        .map(|k| tn * k as f64 / (grid_size - 1) as f64)
        .collect();
    let tail_grid: Vec<f64> = (1..=grid_size)
        .map(|k| tn * 100f64.powf(k as f64 / grid_size as f64))
        .collect();

    let zero = if pw.value(0.0).abs() <= tol {
        Vec::new()
    } else {
        vec![0.0]
    };

    // The tail envelope is positive iff its anchor is; sampling it far out
    // would only observe floating-point underflow.
    let mut positivity: Vec<f64> = uniform
        .iter()
        .skip(1)
        .copied()
        .filter(|&t| !(pw.value(t) > 0.0))
        .collect();
    if !(vn > 0.0) {
        positivity.push(tn);
    }

    let mut decay = Vec::new();
    if !(pw.tail_rate > 0.0) {
        decay.push(tn);
    } else {
        let end = *tail_grid.last().unwrap();
        if !(pw.value(end) < vn) {
            decay.push(end);
        }
    }

    let ia = pw.head_end();
    let head = if ia == 0 {
        vec![pw.t[0], pw.t[1]]
    } else {
        strict_violations(pw, 0.0, pw.t[ia], grid_size, true)
    };

    let n = pw.t.len();
    let ib = pw.tail_start();
    let tail = if ib == n - 1 || !(pw.tail_rate > 0.0) {
        vec![pw.t[n - 2], pw.t[n - 1]]
    } else {
        let mut bad = strict_violations(pw, pw.t[ib], tn, grid_size, false);
        let mut prev = (tn, vn);
        for &t in &tail_grid {
            let v = pw.value(t);
            if !(v < prev.1) && v > 0.0 {
                bad.push(prev.0);
            }
            prev = (t, v);
        }
        bad
    };

    vec![
        check(Clause::ZeroAtOrigin, zero, "f(0) = 0", "f(0) is not zero"),
        check(
            Clause::Positivity,
            positivity,
            "f > 0 on every sampled t > 0",
            "f vanishes at sampled t > 0",
        ),
        check(
            Clause::Decay,
            decay,
            "declared tail decays on the sampled range",
            "declared tail does not decay to zero",
        ),
        check(
            Clause::MonotoneHead,
            head,
            "strictly increasing on [0, eps]",
            "no strictly increasing head",
        ),
        check(
            Clause::MonotoneTail,
            tail,
            "strictly decreasing on [M, inf) (sampled)",
            "no strictly decreasing tail",
        ),
    ]
}

fn strict_violations(pw: &Piecewise, lo: f64, hi: f64, grid: usize, increasing: bool) -> Vec<f64> {
    let mut bad = Vec::new();
    let mut prev = pw.value(lo);
    for k in 1..grid {
        let t = lo + (hi - lo) * k as f64 / (grid - 1) as f64;
        let v = pw.value(t);
        let ok = if increasing { v > prev } else { v < prev };
        if !ok {
            bad.push(t);
        }
        prev = v;
    }
    bad
}
