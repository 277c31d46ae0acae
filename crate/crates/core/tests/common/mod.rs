//! Randomized invariants shared by the property and acceptance targets.
//!
//! Every property runs a fixed number of cases from a deterministic RNG so
//! failures reproduce.

#![allow(dead_code)]

use std::f64::consts::PI;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use packfn::asymptotics::{asymptotic_ratio, fpq_asymptote, gaussian_2d_asymptote};
use packfn::cli::run;
use packfn::diameter::{diameter_bounds, estimate_diameter, exact_diameter, DensityTable};
use packfn::packing::{delta_1d, delta_via_theorem1, optimize_packing_config, verify_optimality};
use packfn::tau::{solve_tau, solve_tau_with, TauOptions, TauResult};
use packfn::weights::{critical_params, ClassAParams, WeightFunction};
use packfn::{config_ratio, Configuration, DiameterEstimate, PackingResult};

pub const CASES: u32 = 1000;

pub type Property = (&'static str, fn() -> Result<(), String>);

pub fn all() -> Vec<Property> {
    vec![
        (
            "weights: strict monotonicity at eps and M",
            boundary_monotonicity,
        ),
        (
            "weights: critical-value residual and plateau minimum",
            critical_residual,
        ),
        ("weights: power-law duality", power_law_duality),
        ("tau: bracket containment", bracket_containment),
        ("tau: single sign change", single_sign_change),
        (
            "tau: tau decreasing, alpha*tau increasing",
            tau_monotonicity,
        ),
        (
            "tau: bisection matches closed forms",
            bisection_matches_closed_form,
        ),
        (
            "diameter: scale and rigid-motion invariance",
            ratio_invariance,
        ),
        (
            "diameter: ratio >= 1, simplices attain 1",
            ratio_at_least_one,
        ),
        ("diameter: bound sandwich width", bound_sandwich),
        (
            "diameter: exact line values increase",
            line_diameter_monotone,
        ),
        ("diameter: estimator witness soundness", estimator_soundness),
        (
            "packing: optimizer below analytic value",
            optimizer_never_exceeds,
        ),
        ("packing: rigid-motion invariance", packing_rigid_motion),
        ("packing: power-law reciprocal", power_law_bridge),
        (
            "asymptotics: gaussian asymptote identity",
            gaussian_identity,
        ),
        (
            "asymptotics: ratio inside envelope width",
            ratio_within_envelope,
        ),
        (
            "asymptotics: power-law scaled difference bounded",
            fpq_scaled_difference,
        ),
        ("cli: deterministic output", cli_determinism),
        ("cli: JSON round trip", cli_round_trip),
    ]
}

fn runner() -> TestRunner {
    TestRunner::new_with_rng(
        Config {
            cases: CASES,
            max_global_rejects: 100 * CASES,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    )
}

fn check<S, F>(strategy: S, test: F) -> Result<(), String>
where
    S: Strategy,
    F: Fn(S::Value) -> Result<(), TestCaseError>,
{
    runner().run(&strategy, test).map_err(|e| e.to_string())
}

fn fail<E: std::fmt::Display>(e: E) -> TestCaseError {
    TestCaseError::fail(e.to_string())
}

pub fn builtin_weight() -> impl Strategy<Value = WeightFunction> {
    prop_oneof![
        (1.05f64..20.0).prop_map(|p| WeightFunction::power_law(p, p / (p - 1.0)).unwrap()),
        (0.2f64..5.0).prop_map(|b| WeightFunction::gaussian(b).unwrap()),
    ]
}

fn with_params(w: WeightFunction) -> (WeightFunction, ClassAParams) {
    let p = critical_params(&w).unwrap();
    (w, p)
}

/// A weight together with a log-uniform alpha above its threshold.
fn weight_and_alpha() -> impl Strategy<Value = (WeightFunction, f64)> {
    (builtin_weight(), 1e-6f64..7.0).prop_map(|(w, la)| {
        let t = critical_params(&w).unwrap().threshold();
        (w, t * la.exp())
    })
}

pub fn boundary_monotonicity() -> Result<(), String> {
    check(builtin_weight(), |w| {
        let (w, p) = with_params(w);
        let fe = w.value(p.epsilon);
        let fm = w.value(p.m);
        for k in 1..=20 {
            let h = 0.1 * k as f64 / 20.0;
            prop_assert!(w.value(p.epsilon * (1.0 - h)) < fe);
            prop_assert!(w.value(p.m * (1.0 + h)) < fm);
        }
        Ok(())
    })
}

pub fn critical_residual() -> Result<(), String> {
    check(builtin_weight(), |w| {
        let (w, p) = with_params(w);
        let fe = w.value(p.epsilon);
        prop_assert!((fe - w.value(p.m)).abs() <= 1e-10);
        for k in 0..=1000 {
            let t = p.epsilon + (p.m - p.epsilon) * k as f64 / 1000.0;
            prop_assert!(w.value(t) >= fe - 1e-10);
        }
        Ok(())
    })
}

pub fn power_law_duality() -> Result<(), String> {
    check((1.05f64..20.0, 0.0f64..1.0, 1.0f64..1e3), |(p, s, l)| {
        let q = p / (p - 1.0);
        let w = WeightFunction::power_law(p, q).map_err(fail)?;
        let s = s.max(1e-300);
        prop_assert_eq!(w.value(s), s.powf(p));
        let l = l + 1e-9;
        prop_assert_eq!(w.value(l), l.powf(-q));
        prop_assert!((w.value(1.0 - 1e-12) - w.value(1.0 + 1e-12)).abs() < 1e-10);
        Ok(())
    })
}

pub fn bracket_containment() -> Result<(), String> {
    check(weight_and_alpha(), |(w, alpha)| {
        let (w, p) = with_params(w);
        for opts in [TauOptions::default(), TauOptions::bisection()] {
            let r = solve_tau_with(&w, &p, alpha, &opts).map_err(fail)?;
            prop_assert!(r.tau > p.m / alpha && r.tau < p.epsilon, "{r:?}");
        }
        Ok(())
    })
}

pub fn single_sign_change() -> Result<(), String> {
    check(weight_and_alpha(), |(w, alpha)| {
        let (w, p) = with_params(w);
        let (lo, hi) = (p.m / alpha, p.epsilon);
        let k = 10_000;
        let mut changes = 0;
        let mut prev = 0.0f64;
        for i in 1..k {
            let t = lo + (hi - lo) * i as f64 / k as f64;
            let g = w.value(alpha * t) - w.value(t);
            if g != 0.0 {
                if prev != 0.0 && g.signum() != prev.signum() {
                    changes += 1;
                }
                prev = g;
            }
        }
        prop_assert!(changes <= 1, "{changes} sign changes");
        Ok(())
    })
}

pub fn tau_monotonicity() -> Result<(), String> {
    check((weight_and_alpha(), 1e-3f64..3.0), |((w, a1), step)| {
        let (w, p) = with_params(w);
        let a2 = a1 * (1.0 + step);
        let t1 = solve_tau(&w, &p, a1).map_err(fail)?.tau;
        let t2 = solve_tau(&w, &p, a2).map_err(fail)?.tau;
        prop_assert!(t2 < t1 + 1e-10, "tau({a2}) = {t2} vs tau({a1}) = {t1}");
        prop_assert!(a2 * t2 > a1 * t1 - 1e-10);
        Ok(())
    })
}

pub fn bisection_matches_closed_form() -> Result<(), String> {
    check(weight_and_alpha(), |(w, alpha)| {
        let (w, p) = with_params(w);
        let closed = solve_tau(&w, &p, alpha).map_err(fail)?;
        let bis = solve_tau_with(&w, &p, alpha, &TauOptions::bisection()).map_err(fail)?;
        prop_assert!((closed.tau - bis.tau).abs() <= 1e-10 * closed.tau.max(1.0));
        Ok(())
    })
}

fn points(dim: usize, max_n: usize) -> impl Strategy<Value = (usize, Vec<f64>)> {
    (2..=max_n).prop_flat_map(move |n| {
        proptest::collection::vec(-1.0f64..1.0, n * dim).prop_map(move |v| (dim, v))
    })
}

fn any_points() -> impl Strategy<Value = (usize, Vec<f64>)> {
    prop_oneof![points(1, 10), points(2, 10), points(3, 10)]
}

// Random rotation: Gram-Schmidt on a random matrix.
fn rotation(dim: usize, raw: &[f64]) -> Vec<Vec<f64>> {
    let mut q: Vec<Vec<f64>> = Vec::new();
    for i in 0..dim {
        let mut v: Vec<f64> = (0..dim)
            .map(|j| raw[i * dim + j] + if i == j { 1.5 } else { 0.0 })
            .collect();
        for u in &q {
            let dot: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(u).for_each(|(a, b)| *a -= dot * b);
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v.iter_mut().for_each(|a| *a /= norm);
        q.push(v);
    }
    q
}

fn transform(c: &Configuration, scale: f64, rot: &[Vec<f64>], shift: &[f64]) -> Configuration {
    let d = c.dim();
    let coords = c
        .points()
        .flat_map(|p| {
            (0..d)
                .map(|i| scale * rot[i].iter().zip(p).map(|(r, x)| r * x).sum::<f64>() + shift[i])
                .collect::<Vec<_>>()
        })
        .collect();
    Configuration::from_flat(d, coords).unwrap()
}

fn motion() -> impl Strategy<Value = (f64, Vec<f64>, Vec<f64>)> {
    (
        prop_oneof![-50.0f64..-0.02, 0.02f64..50.0],
        proptest::collection::vec(-0.5f64..0.5, 9),
        proptest::collection::vec(-100.0f64..100.0, 3),
    )
}

pub fn ratio_invariance() -> Result<(), String> {
    check(
        (any_points(), motion()),
        |((d, pts), (scale, raw, shift))| {
            let Ok(c) = Configuration::from_flat(d, pts) else {
                return Err(TestCaseError::reject("coincident points"));
            };
            prop_assume!(c.min_sep() > 1e-2);
            let r = config_ratio(&c);
            let moved = transform(&c, scale, &rotation(d, &raw), &shift[..d]);
            // Coordinates are rounded at their own magnitude, so gaps small
            // relative to the shift carry proportionally larger error.
            let big = moved.coords().iter().fold(1.0f64, |m, x| m.max(x.abs()));
            let rounding = 8.0 * f64::EPSILON * big / moved.min_sep();
            let tol = (1e-12 + rounding) * r;
            prop_assert!((config_ratio(&moved) - r).abs() <= tol, "{r}");
            Ok(())
        },
    )
}

pub fn ratio_at_least_one() -> Result<(), String> {
    check(
        (any_points(), 2usize..8, motion()),
        |((d, pts), n, (scale, _, shift))| {
            if let Ok(c) = Configuration::from_flat(d, pts) {
                prop_assert!(config_ratio(&c) >= 1.0);
            }
            // Regular simplex: unit vectors in R^n.
            let mut coords = vec![0.0; n * n];
            for i in 0..n {
                coords[i * n + i] = scale;
            }
            let s = Configuration::from_flat(n, coords).unwrap();
            let s = s.affine(1.0, &[shift[0]; 8][..n]).unwrap();
            prop_assert!((config_ratio(&s) - 1.0).abs() < 1e-12);
            Ok(())
        },
    )
}

pub fn bound_sandwich() -> Result<(), String> {
    check((1usize..=3, 2usize..100_000), |(d, n)| {
        let b = diameter_bounds(d, n, &DensityTable::default()).map_err(fail)?;
        prop_assert!(b.lower >= 1.0);
        prop_assert!(b.lower <= b.upper);
        prop_assert!(b.upper - b.lower <= 2.0 + 1e-12);
        Ok(())
    })
}

pub fn line_diameter_monotone() -> Result<(), String> {
    check(2usize..1_000_000, |n| {
        let a = exact_diameter(1, n).unwrap().numeric.unwrap();
        let b = exact_diameter(1, n + 1).unwrap().numeric.unwrap();
        prop_assert!(b > a);
        prop_assert_eq!(a, (n - 1) as f64);
        Ok(())
    })
}

pub fn estimator_soundness() -> Result<(), String> {
    check((1usize..=3, 2usize..=8, any::<u64>()), |(d, n, seed)| {
        let e = estimate_diameter(d, n, 2_000, seed, &DensityTable::default()).map_err(fail)?;
        let w = e.witness.as_ref().unwrap();
        let again = Configuration::from_points(&Vec::<Vec<f64>>::from(w.clone())).unwrap();
        prop_assert!((config_ratio(&again) - e.numeric.unwrap()).abs() <= 1e-12);
        prop_assert!(e.numeric.unwrap() >= e.lower - 1e-9);
        prop_assert!((w.min_sep() - 1.0).abs() <= 1e-12);
        Ok(())
    })
}

/// Gap spread of a 1-D configuration relative to `t`.
pub fn gap_deviation(c: &Configuration, t: f64) -> f64 {
    let mut xs: Vec<f64> = c.coords().to_vec();
    xs.sort_by(f64::total_cmp);
    xs.windows(2)
        .map(|w| (w[1] - w[0] - t).abs())
        .fold(0.0, f64::max)
        / t
}

pub fn optimizer_never_exceeds() -> Result<(), String> {
    let cases = prop_oneof![
        (Just(1usize), 3usize..=12, 0.3f64..4.0),
        (Just(2usize), Just(7usize), 0.3f64..4.0),
    ];
    check((cases, any::<u64>()), |((d, n, beta), seed)| {
        let (w, p) = with_params(WeightFunction::gaussian(beta).unwrap());
        let exact =
            delta_via_theorem1(&w, &p, d, n, &exact_diameter(d, n).unwrap()).map_err(fail)?;
        let (Some(delta), Some(t)) = (exact.delta, exact.t_n) else {
            return Err(TestCaseError::reject("below threshold"));
        };
        let opt = optimize_packing_config(&w, &p, d, n, 10_000, seed).map_err(fail)?;
        let got = opt.result.delta.unwrap();
        prop_assert!(got <= delta + 1e-6, "{got} > {delta}");
        if (got - delta).abs() <= 1e-6 {
            let c = opt.result.witness.as_ref().unwrap();
            let rep = verify_optimality(&w, c, t, exact.d_used, 1e-5);
            prop_assert!(rep.passed(), "{rep:?}");
        }
        Ok(())
    })
}

pub fn packing_rigid_motion() -> Result<(), String> {
    check(
        (any_points(), motion(), 0.3f64..4.0),
        |((d, pts), (_, raw, shift), beta)| {
            let Ok(c) = Configuration::from_flat(d, pts) else {
                return Err(TestCaseError::reject("coincident points"));
            };
            let w = WeightFunction::gaussian(beta).unwrap();
            let achieved = |c: &Configuration| {
                c.pair_distances()
                    .map(|r| w.value(r))
                    .fold(f64::INFINITY, f64::min)
            };
            let moved = transform(&c, 1.0, &rotation(d, &raw), &shift[..d]);
            prop_assert!((achieved(&c) - achieved(&moved)).abs() < 1e-12);
            Ok(())
        },
    )
}

pub fn power_law_bridge() -> Result<(), String> {
    check((1.05f64..20.0, 2usize..2000), |(p, n)| {
        let (w, params) = with_params(WeightFunction::power_law(p, p / (p - 1.0)).unwrap());
        let r = delta_1d(&w, &params, n).map_err(fail)?;
        if r.applicable {
            prop_assert!((r.delta.unwrap() * r.d_used - 1.0).abs() <= 1e-12);
        }
        let r =
            delta_via_theorem1(&w, &params, 2, 7, &exact_diameter(2, 7).unwrap()).map_err(fail)?;
        prop_assert!((r.delta.unwrap() * r.d_used - 1.0).abs() <= 1e-12);
        Ok(())
    })
}

pub fn gaussian_identity() -> Result<(), String> {
    let (w, p) = with_params(WeightFunction::gaussian(2.0).unwrap());
    let table = DensityTable::default();
    let delta2 = PI / 12f64.sqrt();
    check(1.0f64..8.0, |e| {
        let n = 10f64.powf(e).round() as usize;
        let lhs = gaussian_2d_asymptote(n, &table).map_err(fail)?;
        let rhs = solve_tau(&w, &p, (n as f64 / delta2).sqrt())
            .map_err(fail)?
            .f_at_tau;
        prop_assert!((lhs - rhs).abs() <= 1e-12, "{lhs} vs {rhs}");
        Ok(())
    })
}

pub fn ratio_within_envelope() -> Result<(), String> {
    check((0.3f64..4.0, 3usize..1_000_000), |(beta, n)| {
        let (w, p) = with_params(WeightFunction::gaussian(beta).unwrap());
        let diag = asymptotic_ratio(&w, &p, 1, &DensityTable::default(), &[n]).map_err(fail)?;
        prop_assume!(!diag.rows.is_empty());
        let row = &diag.rows[0];
        let (lo, hi) = (row.envelope_lo.unwrap(), row.envelope_hi.unwrap());
        prop_assert!((row.ratio - 1.0).abs() <= (hi - lo) / lo + 1e-12);
        Ok(())
    })
}

pub fn fpq_scaled_difference() -> Result<(), String> {
    check(10usize..=1_000_000, |n| {
        let a = fpq_asymptote(1, n, &DensityTable::default()).map_err(fail)?;
        let exact = 1.0 / (n - 1) as f64;
        let nf = n as f64;
        prop_assert!(nf * nf * (a.value - exact).abs() <= 2.01);
        prop_assert!((a.value - exact).abs() <= a.error_band * (1.0 + 1e-12));
        Ok(())
    })
}

fn command() -> impl Strategy<Value = Vec<String>> {
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    prop_oneof![
        (0.2f64..5.0, 1.5f64..1e3).prop_map(move |(b, a)| {
            s(&[
                "tau",
                "--weight",
                &format!("gaussian:{b}"),
                "--alpha",
                &a.to_string(),
            ])
        }),
        (1usize..=3, 2usize..40).prop_map(move |(d, n)| {
            s(&[
                "delta",
                "--weight",
                "powerlaw:2,2",
                "--d",
                &d.to_string(),
                "--N",
                &n.to_string(),
            ])
        }),
        (1usize..=3, 2usize..7, any::<u64>()).prop_map(move |(d, n, seed)| {
            s(&[
                "diameter",
                "--d",
                &d.to_string(),
                "--N",
                &n.to_string(),
                "--budget",
                "500",
                "--seed",
                &seed.to_string(),
            ])
        }),
        (0.3f64..4.0, 3usize..200).prop_map(move |(b, n)| {
            s(&[
                "asympt",
                "--weight",
                &format!("gaussian:{b}"),
                "--d",
                "1",
                "--N",
                &format!("{n},{}", 10 * n),
            ])
        }),
    ]
}

pub fn cli_determinism() -> Result<(), String> {
    check(command(), |args| {
        let a = run(args.clone());
        let b = run(args);
        prop_assert_eq!(a, b);
        Ok(())
    })
}

fn reserialize<T>(text: &str) -> Result<String, TestCaseError>
where
    T: serde::Serialize + serde::de::DeserializeOwned,
{
    let v: T = serde_json::from_str(text).map_err(fail)?;
    let mut s = serde_json::to_string_pretty(&v).map_err(fail)?;
    s.push('\n');
    Ok(s)
}

pub fn cli_round_trip() -> Result<(), String> {
    check(command(), |args| {
        let out = run(args.clone());
        prop_assume!(!out.stdout.is_empty());
        let again = match args[0].as_str() {
            "tau" => reserialize::<TauResult>(&out.stdout)?,
            "delta" => reserialize::<PackingResult>(&out.stdout)?,
            "diameter" => reserialize::<DiameterEstimate>(&out.stdout)?,
            "asympt" => reserialize::<packfn::AsymptoticDiagnostic>(&out.stdout)?,
            other => return Err(fail(format!("unexpected command {other}"))),
        };
        prop_assert_eq!(again, out.stdout);
        Ok(())
    })
}
