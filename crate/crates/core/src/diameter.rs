//! The minimal `N`-point diameter `D_d(N)`: the least possible ratio of
//! largest to smallest pairwise distance among `N` points in `R^d`.
//!
//! Exact values are known only in a few cases. Otherwise the density bound
//! `A - 2 <= D_d(N) <= A` with `A = (N / Delta_d)^(1/d)` applies, sharpened to
//! `A - 1` in the plane, and a multistart search supplies a numeric upper
//! witness.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::configuration::{config_ratio, Configuration};
use crate::error::{Error, Result};
use crate::search::{multistart, Goal, PairMap, Problem, SearchOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DensitySource {
    Builtin,
    User,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityEntry {
    pub value: f64,
    pub source: DensitySource,
}

/// Maximal sphere-packing densities `Delta_d`, keyed by dimension.
///
/// Dimensions 1 to 3 are built in. Higher dimensions must be supplied; no
/// value is guessed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityTable {
    entries: BTreeMap<usize, DensityEntry>,
}

impl Default for DensityTable {
    fn default() -> Self {
        let builtin = |value| DensityEntry {
            value,
            source: DensitySource::Builtin,
        };
        let mut entries = BTreeMap::new();
        entries.insert(1, builtin(1.0));
        entries.insert(2, builtin(PI / 12f64.sqrt()));
        entries.insert(3, builtin(PI / 18f64.sqrt()));
        Self { entries }
    }
}

impl DensityTable {
    /// Inserts or overrides `Delta_d`, which must lie in `(0, 1]`.
    pub fn set(&mut self, d: usize, value: f64) -> Result<()> {
        if d == 0 {
            return Err(Error::Domain("dimension must be positive".into()));
        }
        if !(value > 0.0 && value <= 1.0) {
            return Err(Error::Domain(format!(
                "packing density for d = {d} must lie in (0, 1], got {value}"
            )));
        }
        self.entries.insert(
            d,
            DensityEntry {
                value,
                source: DensitySource::User,
            },
        );
        Ok(())
    }

    pub fn with(mut self, d: usize, value: f64) -> Result<Self> {
        self.set(d, value)?;
        Ok(self)
    }

    pub fn get(&self, d: usize) -> Option<f64> {
        self.entries.get(&d).map(|e| e.value)
    }

    pub fn entry(&self, d: usize) -> Option<&DensityEntry> {
        self.entries.get(&d)
    }

    pub fn require(&self, d: usize) -> Result<f64> {
        self.get(d).ok_or(Error::MissingDensity { d })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiameterEstimate {
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub lower: f64,
    pub upper: f64,
    pub numeric: Option<f64>,
    pub exact: bool,
    pub seed: Option<u64>,
    /// Normalized to unit minimal separation.
    pub witness: Option<Configuration>,
}

impl DiameterEstimate {
    /// The best available point value: the exact or numeric value when
    /// present, else the midpoint of the bounds.
    pub fn value(&self) -> f64 {
        self.numeric.unwrap_or(0.5 * (self.lower + self.upper))
    }
}

fn check_args(d: usize, n: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    if n < 2 {
        return Err(Error::Domain(format!("need N >= 2, got {n}")));
    }
    Ok(())
}

/// `(N / Delta_d)^(1/d)`.
pub fn density_scale(d: usize, n: usize, delta: f64) -> f64 {
    let x = n as f64 / delta;
    match d {
        1 => x,
        2 => x.sqrt(),
        3 => x.cbrt(),
        _ => x.powf(1.0 / d as f64),
    }
}

/// Analytic bounds from the packing density.
pub fn diameter_bounds(d: usize, n: usize, densities: &DensityTable) -> Result<DiameterEstimate> {
    check_args(d, n)?;
    let a = density_scale(d, n, densities.require(d)?);
    let mut lower = (a - 2.0).max(1.0);
    if d == 2 {
        lower = lower.max(a - 1.0);
    }
    Ok(DiameterEstimate {
        d,
        n,
        lower,
        upper: a,
        numeric: None,
        exact: false,
        seed: None,
        witness: None,
    })
}

/// The known exact values: `D_1(N) = N - 1` and `D_2(7) = 2`.
pub fn exact_diameter(d: usize, n: usize) -> Option<DiameterEstimate> {
    if d == 0 || n < 2 {
        return None;
    }
    let (value, witness) = match (d, n) {
        (1, _) => {
            let pts: Vec<f64> = (0..n).map(|k| k as f64).collect();
            ((n - 1) as f64, Configuration::from_flat(1, pts).ok()?)
        }
        (2, 7) => (2.0, hexagon_with_center()),
        _ => return None,
    };
    let bounds = diameter_bounds(d, n, &DensityTable::default()).ok()?;
    // The analytic bounds are kept as they are, bracketing the exact value.
    Some(DiameterEstimate {
        numeric: Some(value),
        witness: Some(witness),
        exact: true,
        ..bounds
    })
}

fn hexagon_with_center() -> Configuration {
    let mut pts = vec![vec![0.0, 0.0]];
    for k in 0..6 {
        let a = k as f64 * PI / 3.0;
        pts.push(vec![a.cos(), a.sin()]);
    }
    Configuration::from_points(&pts).expect("hexagon points are distinct")
}

/// Structured starts: arithmetic progressions on the line, triangular
/// lattice patches in the plane and integer lattice patches otherwise.
pub(crate) fn structured_seeds(d: usize, n: usize) -> Vec<Vec<f64>> {
    match d {
        1 => vec![(0..n).map(|k| k as f64).collect()],
        2 => {
            let h = 3f64.sqrt() / 2.0;
            [(0.0, 0.0), (0.5, 0.0), (0.5, 3f64.sqrt() / 6.0)]
                .iter()
                .map(|&(cx, cy)| {
                    let r = (n as f64).sqrt().ceil() as i64 + 2;
                    let mut pts = Vec::new();
                    for j in -r..=r {
                        for i in -r..=r {
                            let x = i as f64 + 0.5 * j as f64;
                            let y = h * j as f64;
                            pts.push((x, y));
                        }
                    }
                    nearest_patch(pts, &[cx, cy], n)
                })
                .collect()
        }
        _ => {
            let r = (n as f64).powf(1.0 / d as f64).ceil() as i64 + 1;
            let side = (2 * r + 1) as usize;
            let total = side.pow(d as u32);
            let mut pts = Vec::with_capacity(total);
            for idx in 0..total {
                let mut rem = idx;
                let mut p = Vec::with_capacity(d);
                for _ in 0..d {
                    p.push((rem % side) as f64 - r as f64);
                    rem /= side;
                }
                pts.push(p);
            }
            let centre = vec![0.25; d];
            let mut order: Vec<usize> = (0..pts.len()).collect();
            order.sort_by(|&a, &b| {
                dist2(&pts[a], &centre)
                    .total_cmp(&dist2(&pts[b], &centre))
                    .then(a.cmp(&b))
            });
            vec![order[..n].iter().flat_map(|&k| pts[k].clone()).collect()]
        }
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest_patch(mut pts: Vec<(f64, f64)>, c: &[f64], n: usize) -> Vec<f64> {
    let key = |p: &(f64, f64)| (p.0 - c[0]).powi(2) + (p.1 - c[1]).powi(2);
    pts.sort_by(|a, b| key(a).total_cmp(&key(b)));
    pts[..n].iter().flat_map(|&(x, y)| [x, y]).collect()
}

/// Numerically minimizes the diameter ratio with a seeded multistart search.
///
/// `budget` counts objective evaluations. The result carries the analytic
/// bounds, the best ratio found and its witness.
pub fn estimate_diameter(
    d: usize,
    n: usize,
    budget: u64,
    seed: u64,
    densities: &DensityTable,
) -> Result<DiameterEstimate> {
    check_args(d, n)?;
    if budget == 0 {
        return Err(Error::Domain("budget must be positive".into()));
    }
    let bounds = diameter_bounds(d, n, densities)?;
    let problem = Problem {
        n,
        dim: d,
        map: PairMap::LogDistance,
        goal: Goal::Spread,
        seeds: structured_seeds(d, n),
        scale: None,
        target: exact_diameter(d, n).and_then(|e| e.numeric).map(f64::ln),
    };
    let outcome = multistart(&problem, &SearchOptions::new(budget, seed));
    let witness = Configuration::from_flat(d, outcome.best)?.normalized(1.0);
    let numeric = config_ratio(&witness);
    if numeric < bounds.lower - 1e-9 {
        return Err(Error::Internal(format!(
            "numeric diameter {numeric} for d = {d}, N = {n} is below the proven lower bound {}",
            bounds.lower
        )));
    }
    Ok(DiameterEstimate {
        upper: bounds.upper.min(numeric),
        numeric: Some(numeric),
        seed: Some(seed),
        witness: Some(witness),
        ..bounds
    })
}

/// Leading-order value `(N / Delta_2)^(1/2)`, accurate to an additive `O(1)`.
pub fn asymptotic_diameter_2d(n: usize) -> f64 {
    density_scale(2, n, PI / 12f64.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    const DELTA2: f64 = 0.906899682117108925;

    #[test]
    fn builtin_densities() {
        let t = DensityTable::default();
        assert_eq!(t.get(1), Some(1.0));
        assert!((t.get(2).unwrap() - DELTA2).abs() < 1e-15);
        assert!((t.get(3).unwrap() - 0.740480489693061041).abs() < 1e-15);
        assert!(t.get(4).is_none());
        assert!(t.clone().with(4, 1.5).is_err());
        assert!(t.clone().with(4, 0.0).is_err());
        let t4 = t.with(4, 0.6168502750680849).unwrap();
        assert_eq!(t4.entry(4).unwrap().source, DensitySource::User);
    }

    #[test]
    fn exact_values() {
        let e = exact_diameter(1, 5).unwrap();
        assert_eq!(e.numeric, Some(4.0));
        assert!(e.exact);
        assert_eq!(config_ratio(e.witness.as_ref().unwrap()), 4.0);
        let h = exact_diameter(2, 7).unwrap();
        assert_eq!(h.numeric, Some(2.0));
        assert!((config_ratio(h.witness.as_ref().unwrap()) - 2.0).abs() < 1e-15);
        assert!(exact_diameter(3, 10).is_none());
        assert!(exact_diameter(2, 6).is_none());
    }

    #[test]
    fn bounds_examples() {
        let t = DensityTable::default();
        let b = diameter_bounds(1, 10, &t).unwrap();
        assert_eq!((b.lower, b.upper), (8.0, 10.0));
        let b = diameter_bounds(2, 7, &t).unwrap();
        assert!((b.upper - 2.77823766728210074).abs() < 1e-14);
        assert!((b.lower - 1.77823766728210074).abs() < 1e-14);
        let b = diameter_bounds(2, 2, &t).unwrap();
        assert_eq!(b.lower, 1.0);
        assert!((b.upper - 1.48503049857138227).abs() < 1e-14);
        assert!(matches!(
            diameter_bounds(5, 10, &t),
            Err(Error::MissingDensity { d: 5 })
        ));
    }

    #[test]
    fn asymptote_examples() {
        assert!((asymptotic_diameter_2d(7) - 2.77823766728210074).abs() < 1e-14);
        let big = asymptotic_diameter_2d(1_000_000);
        assert!((big - 1050.07513580866398).abs() < 1e-9);
        let b = diameter_bounds(2, 1_000_000, &DensityTable::default()).unwrap();
        assert!(b.lower <= big && big <= b.upper);
    }

    #[test]
    fn seeds_have_the_right_shape() {
        for (d, n) in [(1, 4), (2, 7), (3, 9), (4, 5)] {
            for s in structured_seeds(d, n) {
                let c = Configuration::from_flat(d, s).unwrap();
                assert_eq!(c.len(), n);
            }
        }
        let s = &structured_seeds(2, 7)[0];
        let c = Configuration::from_flat(2, s.clone()).unwrap();
        assert!((config_ratio(&c) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn estimates_small_cases() {
        let t = DensityTable::default();
        let e = estimate_diameter(2, 3, 10_000, 1, &t).unwrap();
        assert!((e.numeric.unwrap() - 1.0).abs() < 1e-6);
        let e = estimate_diameter(1, 6, 10_000, 1, &t).unwrap();
        assert!((e.numeric.unwrap() - 5.0).abs() < 1e-9);
        let w = e.witness.unwrap();
        assert!((w.min_sep() - 1.0).abs() < 1e-12);
    }
}
