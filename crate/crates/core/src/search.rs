//! Multistart compass search over point configurations.
//!
//! Objectives are functions of the pairwise values `v_ij = phi(|x_i - x_j|)`:
//! either the spread `max v - min v` or the negated minimum `-min v`, both
//! minimized. Soft stages replace max/min by log-sum-exp at a temperature
//! `1/p`; the final stage is exact. Moving one point only changes one row of
//! the pair matrix, so candidate moves are scored in `O(N)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::configuration::{self, distance};
use crate::roots::golden_min;
use crate::weights::WeightFunction;

#[derive(Debug, Clone, Copy)]
pub(crate) enum PairMap<'a> {
    /// `ln r`
    LogDistance,
    /// `ln f(r)`
    LogWeight(&'a WeightFunction),
}

impl PairMap<'_> {
    #[inline]
    fn apply(&self, r: f64) -> f64 {
        match self {
            PairMap::LogDistance => r.ln(),
            PairMap::LogWeight(w) => w.ln_value(r),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Goal {
    Spread,
    NegMin,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Smoothing {
    Exact,
    Soft(f64),
}

const NONE: usize = usize::MAX;

// Two smallest entries of a row of the pair matrix.
#[derive(Debug, Clone, Copy)]
struct Top2 {
    v1: f64,
    a1: usize,
    v2: f64,
    a2: usize,
}

impl Top2 {
    const EMPTY: Top2 = Top2 {
        v1: f64::INFINITY,
        a1: NONE,
        v2: f64::INFINITY,
        a2: NONE,
    };

    #[inline]
    fn offer(&mut self, v: f64, k: usize) {
        if v < self.v1 {
            self.v2 = self.v1;
            self.a2 = self.a1;
            self.v1 = v;
            self.a1 = k;
        } else if v < self.v2 {
            self.v2 = v;
            self.a2 = k;
        }
    }

    #[inline]
    fn excluding(&self, i: usize) -> f64 {
        if self.a1 != i {
            self.v1
        } else {
            self.v2
        }
    }
}

struct Soft {
    p: f64,
    ref_lo: f64,
    ref_hi: f64,
    t_lo: Vec<f64>,
    t_hi: Vec<f64>,
    rs_lo: Vec<f64>,
    rs_hi: Vec<f64>,
    s_lo: f64,
    s_hi: f64,
    // Largest sums since the last refresh; bounds the rounding error.
    peak_lo: f64,
    peak_hi: f64,
    cand_lo: Vec<f64>,
    cand_hi: Vec<f64>,
    cand_s_lo: f64,
    cand_s_hi: f64,
}

struct PairState<'a> {
    n: usize,
    dim: usize,
    x: Vec<f64>,
    v: Vec<f64>,
    map: PairMap<'a>,
    goal: Goal,
    lo_rows: Vec<Top2>,
    // Negated values, so that the two largest are tracked as two smallest.
    hi_rows: Vec<Top2>,
    soft: Option<Soft>,
    current: f64,
    cand: Vec<f64>,
}

impl<'a> PairState<'a> {
    fn new(x: Vec<f64>, dim: usize, map: PairMap<'a>, goal: Goal, smoothing: Smoothing) -> Self {
        let n = x.len() / dim;
        let soft = match smoothing {
            Smoothing::Exact => None,
            Smoothing::Soft(p) => Some(Soft {
                p,
                ref_lo: 0.0,
                ref_hi: 0.0,
                t_lo: vec![0.0; n * n],
                t_hi: vec![0.0; n * n],
                rs_lo: vec![0.0; n],
                rs_hi: vec![0.0; n],
                s_lo: 0.0,
                s_hi: 0.0,
                peak_lo: 0.0,
                peak_hi: 0.0,
                cand_lo: vec![0.0; n],
                cand_hi: vec![0.0; n],
                cand_s_lo: 0.0,
                cand_s_hi: 0.0,
            }),
        };
        let mut s = Self {
            n,
            dim,
            x,
            v: vec![0.0; n * n],
            map,
            goal,
            lo_rows: vec![Top2::EMPTY; n],
            hi_rows: vec![Top2::EMPTY; n],
            soft,
            current: f64::INFINITY,
            cand: vec![0.0; n],
        };
        s.rebuild();
        s
    }

    fn point(&self, i: usize) -> &[f64] {
        &self.x[i * self.dim..(i + 1) * self.dim]
    }

    fn set_coords(&mut self, x: &[f64]) {
        self.x.copy_from_slice(x);
        self.rebuild();
    }

    fn rebuild(&mut self) {
        let n = self.n;
        for i in 0..n {
            for j in i + 1..n {
                let val = self.map.apply(distance(self.point(i), self.point(j)));
                self.v[i * n + j] = val;
                self.v[j * n + i] = val;
            }
        }
        for j in 0..n {
            self.rescan_row(j);
        }
        self.refresh_soft();
        self.current = self.objective_now();
    }

    fn rescan_row(&mut self, j: usize) {
        let n = self.n;
        let mut lo = Top2::EMPTY;
        let mut hi = Top2::EMPTY;
        let track_hi = self.goal == Goal::Spread;
        for k in 0..n {
            if k != j {
                let val = self.v[j * n + k];
                lo.offer(val, k);
                if track_hi {
                    hi.offer(-val, k);
                }
            }
        }
        self.lo_rows[j] = lo;
        self.hi_rows[j] = hi;
    }

    fn exact_min(&self) -> f64 {
        self.lo_rows
            .iter()
            .map(|r| r.v1)
            .fold(f64::INFINITY, f64::min)
    }

    fn exact_max(&self) -> f64 {
        -self
            .hi_rows
            .iter()
            .map(|r| r.v1)
            .fold(f64::INFINITY, f64::min)
    }

    /// Re-centers the log-sum-exp references on the current extremes.
    fn refresh_soft(&mut self) {
        let (lo, hi) = (self.exact_min(), self.exact_max());
        let n = self.n;
        let Some(s) = self.soft.as_mut() else {
            return;
        };
        s.ref_lo = lo;
        s.ref_hi = hi;
        s.rs_lo.iter_mut().for_each(|r| *r = 0.0);
        s.rs_hi.iter_mut().for_each(|r| *r = 0.0);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let val = self.v[i * n + j];
                let tl = (-s.p * (val - lo)).exp();
                s.t_lo[i * n + j] = tl;
                s.rs_lo[i] += tl;
                if self.goal == Goal::Spread {
                    let th = (s.p * (val - hi)).exp();
                    s.t_hi[i * n + j] = th;
                    s.rs_hi[i] += th;
                }
            }
        }
        s.s_lo = 0.5 * s.rs_lo.iter().sum::<f64>();
        s.s_hi = 0.5 * s.rs_hi.iter().sum::<f64>();
        s.peak_lo = s.s_lo;
        s.peak_hi = s.s_hi;
        self.current = self.objective_now();
    }

    fn objective_now(&self) -> f64 {
        match &self.soft {
            None => match self.goal {
                Goal::Spread => self.exact_max() - self.exact_min(),
                Goal::NegMin => -self.exact_min(),
            },
            Some(s) => soft_value(self.goal, s, s.s_lo, s.s_hi),
        }
    }

    /// Scores moving point `i` to `y` without committing.
    fn try_move(&mut self, i: usize, y: &[f64]) -> f64 {
        let n = self.n;
        let dim = self.dim;
        for j in 0..n {
            if j != i {
                let r = distance(y, &self.x[j * dim..(j + 1) * dim]);
                self.cand[j] = self.map.apply(r);
            }
        }
        match self.soft.as_mut() {
            None => {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for j in 0..n {
                    if j != i {
                        lo = lo.min(self.lo_rows[j].excluding(i)).min(self.cand[j]);
                        if self.goal == Goal::Spread {
                            hi = hi.max(-self.hi_rows[j].excluding(i)).max(self.cand[j]);
                        }
                    }
                }
                if !lo.is_finite() && lo < 0.0 {
                    return f64::INFINITY;
                }
                match self.goal {
                    Goal::Spread => hi - lo,
                    Goal::NegMin => -lo,
                }
            }
            Some(s) => {
                let mut add_lo = 0.0;
                let mut add_hi = 0.0;
                for j in 0..n {
                    if j == i {
                        continue;
                    }
                    let val = self.cand[j];
                    let tl = (-s.p * (val - s.ref_lo)).exp();
                    s.cand_lo[j] = tl;
                    add_lo += tl;
                    if self.goal == Goal::Spread {
                        let th = (s.p * (val - s.ref_hi)).exp();
                        s.cand_hi[j] = th;
                        add_hi += th;
                    }
                }
                let mut keep_lo = s.s_lo - s.rs_lo[i];
                let mut keep_hi = s.s_hi - s.rs_hi[i];
                let spread = self.goal == Goal::Spread;
                if !(keep_lo > 1e-6 * s.peak_lo) || (spread && !(keep_hi > 1e-6 * s.peak_hi)) {
                    // Row i dominates: sum the surviving terms directly.
                    (keep_lo, keep_hi) = (0.0, 0.0);
                    for a in 0..n {
                        for b in a + 1..n {
                            if a != i && b != i {
                                keep_lo += s.t_lo[a * n + b];
                                keep_hi += s.t_hi[a * n + b];
                            }
                        }
                    }
                }
                let s_lo = keep_lo + add_lo;
                let s_hi = keep_hi + add_hi;
                s.cand_s_lo = s_lo;
                s.cand_s_hi = s_hi;
                let val = soft_value(self.goal, s, s_lo, s_hi);
                if val.is_nan() {
                    f64::INFINITY
                } else {
                    val
                }
            }
        }
    }

    /// Commits the move last scored by `try_move(i, y)`.
    fn commit(&mut self, i: usize, y: &[f64], value: f64) {
        let n = self.n;
        let dim = self.dim;
        self.x[i * dim..(i + 1) * dim].copy_from_slice(y);
        let track_hi = self.goal == Goal::Spread;
        for j in 0..n {
            if j == i {
                continue;
            }
            let new = self.cand[j];
            self.v[i * n + j] = new;
            self.v[j * n + i] = new;
            let lo = self.lo_rows[j];
            if lo.a1 == i || lo.a2 == i {
                self.rescan_row(j);
                continue;
            }
            self.lo_rows[j].offer(new, i);
            if track_hi {
                let hi = self.hi_rows[j];
                if hi.a1 == i || hi.a2 == i {
                    self.rescan_row(j);
                } else {
                    self.hi_rows[j].offer(-new, i);
                }
            }
        }
        self.rescan_row(i);
        if let Some(s) = self.soft.as_mut() {
            let mut row_lo = 0.0;
            let mut row_hi = 0.0;
            for j in 0..n {
                if j == i {
                    continue;
                }
                s.rs_lo[j] += s.cand_lo[j] - s.t_lo[j * n + i];
                s.t_lo[j * n + i] = s.cand_lo[j];
                s.t_lo[i * n + j] = s.cand_lo[j];
                row_lo += s.cand_lo[j];
                if track_hi {
                    s.rs_hi[j] += s.cand_hi[j] - s.t_hi[j * n + i];
                    s.t_hi[j * n + i] = s.cand_hi[j];
                    s.t_hi[i * n + j] = s.cand_hi[j];
                    row_hi += s.cand_hi[j];
                }
            }
            s.rs_lo[i] = row_lo;
            s.rs_hi[i] = row_hi;
            s.s_lo = s.cand_s_lo;
            s.s_hi = s.cand_s_hi;
            s.peak_lo = s.peak_lo.max(s.s_lo);
            s.peak_hi = s.peak_hi.max(s.s_hi);
            let lost = s.s_lo < 1e-4 * s.peak_lo || (track_hi && s.s_hi < 1e-4 * s.peak_hi);
            if lost {
                self.refresh_soft();
                return;
            }
        }
        self.current = value;
    }
}

fn soft_value(goal: Goal, s: &Soft, s_lo: f64, s_hi: f64) -> f64 {
    let lse_neg = -s.ref_lo + s_lo.ln() / s.p;
    match goal {
        Goal::NegMin => lse_neg,
        Goal::Spread => lse_neg + s.ref_hi + s_hi.ln() / s.p,
    }
}

/// Exact objective of a coordinate buffer, computed from scratch.
pub(crate) fn exact_objective(x: &[f64], dim: usize, map: PairMap<'_>, goal: Goal) -> f64 {
    let n = x.len() / dim;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            let val = map.apply(distance(
                &x[i * dim..(i + 1) * dim],
                &x[j * dim..(j + 1) * dim],
            ));
            lo = lo.min(val);
            hi = hi.max(val);
        }
    }
    let out = match goal {
        Goal::Spread => hi - lo,
        Goal::NegMin => -lo,
    };
    if out.is_nan() {
        f64::INFINITY
    } else {
        out
    }
}

fn soft_objective(x: &[f64], dim: usize, map: PairMap<'_>, goal: Goal, p: f64) -> f64 {
    let n = x.len() / dim;
    let mut vals = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            vals.push(map.apply(distance(
                &x[i * dim..(i + 1) * dim],
                &x[j * dim..(j + 1) * dim],
            )));
        }
    }
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() {
        return f64::INFINITY;
    }
    let neg = -lo + vals.iter().map(|v| (-p * (v - lo)).exp()).sum::<f64>().ln() / p;
    match goal {
        Goal::NegMin => neg,
        Goal::Spread => neg + hi + vals.iter().map(|v| (p * (v - hi)).exp()).sum::<f64>().ln() / p,
    }
}

fn stage_objective(x: &[f64], dim: usize, map: PairMap<'_>, goal: Goal, sm: Smoothing) -> f64 {
    match sm {
        Smoothing::Exact => exact_objective(x, dim, map, goal),
        Smoothing::Soft(p) => soft_objective(x, dim, map, goal, p),
    }
}

fn extent(x: &[f64], dim: usize) -> (f64, f64) {
    configuration::extent(dim, x)
}

fn centroid(x: &[f64], dim: usize) -> Vec<f64> {
    let n = x.len() / dim;
    let mut c = vec![0.0; dim];
    for p in x.chunks_exact(dim) {
        for (ci, xi) in c.iter_mut().zip(p) {
            *ci += xi / n as f64;
        }
    }
    c
}

fn dilate(x: &[f64], dim: usize, factor: f64) -> Vec<f64> {
    let c = centroid(x, dim);
    x.chunks_exact(dim)
        .flat_map(|p| {
            p.iter()
                .zip(c.iter())
                .map(|(xi, ci)| ci + factor * (xi - ci))
                .collect::<Vec<_>>()
        })
        .collect()
}

/// What the multistart driver optimizes.
pub(crate) struct Problem<'a> {
    pub n: usize,
    pub dim: usize,
    pub map: PairMap<'a>,
    pub goal: Goal,
    /// Structured starting configurations; run first, exact stage only.
    pub seeds: Vec<Vec<f64>>,
    /// `Some((eps, M))` when the objective depends on scale; enables an
    /// initial scale scan and dilation moves. `None` for scale-free
    /// objectives, which are renormalized to unit separation instead.
    pub scale: Option<(f64, f64)>,
    /// A proven lower bound on the objective. Reaching it within `1e-8`
    /// ends the search early.
    pub target: Option<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct SearchOptions {
    /// Objective evaluations. Checked between sweeps, so a run may overshoot
    /// by one sweep.
    pub budget: u64,
    pub seed: u64,
    /// Random waves in a row without improvement before stopping.
    pub patience: usize,
    /// Random restarts per wave; fixed so results do not depend on threads.
    pub wave: usize,
    pub soft_schedule: Vec<f64>,
    pub soft_min_step: f64,
    pub exact_min_step: f64,
    pub initial_step: f64,
    pub warm_step: f64,
}

impl SearchOptions {
    pub fn new(budget: u64, seed: u64) -> Self {
        Self {
            budget,
            seed,
            patience: usize::MAX,
            wave: 2,
            soft_schedule: vec![8.0, 64.0, 512.0, 4096.0, 32768.0, 262144.0, 2097152.0],
            soft_min_step: 1e-7,
            exact_min_step: 1e-9,
            initial_step: 0.3,
            warm_step: 0.01,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct SearchOutcome {
    pub best: Vec<f64>,
    pub evaluations: u64,
    pub restarts: usize,
    /// At least one restart ran to the minimum step.
    pub converged: bool,
}

struct RestartResult {
    best: Vec<f64>,
    objective: f64,
    evaluations: u64,
    converged: bool,
}

fn random_start(n: usize, dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let radius = (n as f64).powf(1.0 / dim as f64);
    loop {
        let mut x = Vec::with_capacity(n * dim);
        for _ in 0..n {
            let dir: Vec<f64> = (0..dim)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect();
            let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
            if norm == 0.0 {
                continue;
            }
            let r = radius * rng.random::<f64>().powf(1.0 / dim as f64);
            x.extend(dir.iter().map(|d| r * d / norm));
        }
        if x.len() == n * dim && extent(&x, dim).0 > 0.0 {
            return x;
        }
    }
}

struct Runner<'p, 'a> {
    problem: &'p Problem<'a>,
    opts: &'p SearchOptions,
}

impl Runner<'_, '_> {
    fn restart(&self, index: usize, cap: u64) -> RestartResult {
        let pr = self.problem;
        let structured = index < pr.seeds.len();
        let mut x = if structured {
            pr.seeds[index].clone()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed);
            rng.set_stream(index as u64);
            random_start(pr.n, pr.dim, &mut rng)
        };
        let mut evals = 0u64;
        if let Some((eps, big_m)) = pr.scale {
            x = self.scan_scale(&x, eps, big_m, &mut evals);
        } else {
            x = normalize(&x, pr.dim);
        }

        let mut stages: Vec<Smoothing> = Vec::new();
        if !structured {
            stages.extend(self.opts.soft_schedule.iter().map(|&p| Smoothing::Soft(p)));
        }
        stages.push(Smoothing::Exact);

        let mut best = x.clone();
        let mut best_obj = exact_objective(&x, pr.dim, pr.map, pr.goal);
        let mut converged = false;
        for (k, &sm) in stages.iter().enumerate() {
            if evals >= cap {
                break;
            }
            let (first_step, min_rel) = match sm {
                Smoothing::Exact => (
                    if k == 0 {
                        self.opts.initial_step
                    } else {
                        self.opts.warm_step
                    },
                    self.opts.exact_min_step,
                ),
                // Resolving a smoothed landscape below its blur is wasted work.
                Smoothing::Soft(p) => (
                    if k == 0 {
                        self.opts.initial_step
                    } else {
                        self.opts.warm_step
                    },
                    self.opts.soft_min_step.max(0.5 / p),
                ),
            };
            let done = self.compass(&mut x, sm, first_step, min_rel, cap, &mut evals);
            if sm == Smoothing::Exact {
                converged = done;
            }
            let obj = exact_objective(&x, pr.dim, pr.map, pr.goal);
            if obj < best_obj {
                best_obj = obj;
                best.clone_from(&x);
            }
        }
        RestartResult {
            best,
            objective: best_obj,
            evaluations: evals,
            converged,
        }
    }

    /// Picks the best dilation of `x` on a geometric grid bracketing the
    /// admissible separations, then polishes it by golden section.
    fn scan_scale(&self, x: &[f64], eps: f64, big_m: f64, evals: &mut u64) -> Vec<f64> {
        let pr = self.problem;
        let (sep, diam) = extent(x, pr.dim);
        let ratio = diam / sep;
        let lo = (0.25 * eps.min(big_m / ratio)).ln();
        let hi = (2.0 * eps).ln();
        let steps = 32;
        let h = (hi - lo) / steps as f64;
        let mut eval = |s: f64| {
            *evals += 1;
            let cand = dilate(x, pr.dim, s.exp() / sep);
            exact_objective(&cand, pr.dim, pr.map, pr.goal)
        };
        let mut best = (lo, f64::INFINITY);
        for k in 0..=steps {
            let s = lo + h * k as f64;
            let obj = eval(s);
            if obj < best.1 {
                best = (s, obj);
            }
        }
        let polished = golden_min(&mut eval, best.0 - h, best.0 + h, 80);
        if polished.1 < best.1 {
            best = polished;
        }
        dilate(x, pr.dim, best.0.exp() / sep)
    }

    /// Compass search until the step drops below `min_rel` times the
    /// separation at entry or the evaluation cap is hit. Returns whether
    /// the step criterion was reached.
    fn compass(
        &self,
        x: &mut Vec<f64>,
        sm: Smoothing,
        step_rel: f64,
        min_rel: f64,
        cap: u64,
        evals: &mut u64,
    ) -> bool {
        let pr = self.problem;
        let dim = pr.dim;
        let n = pr.n;
        let (sep0, diam0) = extent(x, dim);
        let min_step = min_rel * sep0;
        let mut step = step_rel * diam0;
        let mut state = PairState::new(x.clone(), dim, pr.map, pr.goal, sm);
        let mut y = vec![0.0; dim];
        let mut reached = false;
        while *evals < cap {
            if step < min_step {
                reached = true;
                break;
            }
            state.refresh_soft();
            let mut improved = false;
            for i in 0..n {
                for k in 0..dim {
                    for sign in [1.0, -1.0] {
                        y.copy_from_slice(state.point(i));
                        y[k] += sign * step;
                        let val = state.try_move(i, &y);
                        *evals += 1;
                        let cur = state.current;
                        if val < cur - 1e-15 * cur.abs().max(1e-300) {
                            state.commit(i, &y, val);
                            improved = true;
                            break;
                        }
                    }
                }
            }
            if pr.scale.is_some() {
                let diam = extent(&state.x, dim).1;
                let h = (step / diam).min(0.5);
                for factor in [1.0 + h, 1.0 - h] {
                    let cand = dilate(&state.x, dim, factor);
                    let val = stage_objective(&cand, dim, pr.map, pr.goal, sm);
                    *evals += 1;
                    let cur = state.current;
                    if val < cur - 1e-15 * cur.abs().max(1e-300) {
                        state.set_coords(&cand);
                        improved = true;
                        break;
                    }
                }
            } else {
                let (sep, _) = extent(&state.x, dim);
                if (sep - 1.0).abs() > 1e-3 {
                    let xs = normalize(&state.x, dim);
                    step /= sep;
                    state.set_coords(&xs);
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        x.clone_from(&state.x);
        reached
    }
}

fn normalize(x: &[f64], dim: usize) -> Vec<f64> {
    let (sep, _) = extent(x, dim);
    let c = centroid(x, dim);
    x.chunks_exact(dim)
        .flat_map(|p| {
            p.iter()
                .zip(c.iter())
                .map(|(xi, ci)| (xi - ci) / sep)
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Runs structured seeds, then waves of random restarts, keeping the first
/// configuration that attains the best exact objective.
pub(crate) fn multistart(problem: &Problem<'_>, opts: &SearchOptions) -> SearchOutcome {
    let runner = Runner { problem, opts };
    let per_restart_cap = (opts.budget / 4).max(1);
    let mut spent = 0u64;
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut restarts = 0usize;
    let mut converged = false;
    let mut stale_waves = 0usize;
    let mut next = 0usize;
    let min_useful = (2 * problem.n * problem.dim + 2) as u64;

    loop {
        let remaining = opts.budget.saturating_sub(spent);
        if remaining < min_useful {
            break;
        }
        let wave: Vec<usize> = if next < problem.seeds.len() {
            (next..problem.seeds.len()).collect()
        } else {
            (next..next + opts.wave).collect()
        };
        let random_wave = wave[0] >= problem.seeds.len();
        let cap = per_restart_cap.min(remaining / wave.len() as u64).max(1);
        let results: Vec<RestartResult> =
            wave.par_iter().map(|&k| runner.restart(k, cap)).collect();
        next = wave.last().unwrap() + 1;

        let mut improved = false;
        for r in results {
            spent += r.evaluations;
            restarts += 1;
            converged |= r.converged;
            let better = match &best {
                None => true,
                Some((_, b)) => r.objective < b - 1e-12 * b.abs().max(1e-12),
            };
            if better {
                best = Some((r.best, r.objective));
                improved = true;
            }
        }
        if let (Some(t), Some((_, b))) = (problem.target, &best) {
            if *b <= t + 1e-8 * t.abs().max(1.0) {
                break;
            }
        }
        if random_wave {
            if improved && restarts > wave.len() {
                stale_waves = 0;
            } else if !improved {
                stale_waves += 1;
            }
            if stale_waves >= opts.patience {
                break;
            }
        }
    }

    let (best, _) = best.unwrap_or_else(|| {
        let x = problem.seeds.first().cloned().unwrap_or_else(|| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            random_start(problem.n, problem.dim, &mut rng)
        });
        let obj = exact_objective(&x, problem.dim, problem.map, problem.goal);
        (x, obj)
    });
    SearchOutcome {
        best,
        evaluations: spent,
        restarts,
        converged,
    }
}
