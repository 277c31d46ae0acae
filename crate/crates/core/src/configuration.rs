//! Finite point sets in `R^d` with cached separation and diameter.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `N >= 2` distinct points in `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Configuration {
    d: usize,
    coords: Vec<f64>,
    min_sep: f64,
    diam: f64,
}

impl Configuration {
    /// Builds a configuration from a flat, row-major coordinate buffer.
    pub fn from_flat(d: usize, coords: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::DegenerateConfiguration(
                "dimension must be positive".into(),
            ));
        }
        if !coords.len().is_multiple_of(d) {
            return Err(Error::DegenerateConfiguration(format!(
                "{} coordinates do not split into points of dimension {d}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::DegenerateConfiguration(
                "coordinates must be finite".into(),
            ));
        }
        let n = coords.len() / d;
        if n < 2 {
            return Err(Error::DegenerateConfiguration(format!(
                "need at least two points, got {n}"
            )));
        }
        let (min_sep, diam) = extent(d, &coords);
        if !(min_sep > 0.0) {
            return Err(Error::DegenerateConfiguration(
                "configuration contains coincident points".into(),
            ));
        }
        Ok(Self {
            d,
            coords,
            min_sep,
            diam,
        })
    }

    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let d = points.first().map_or(0, |p| p.len());
        if points.iter().any(|p| p.len() != d) {
            return Err(Error::DegenerateConfiguration(
                "points have mixed dimensions".into(),
            ));
        }
        Self::from_flat(d, points.concat())
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.d)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Smallest pairwise distance.
    pub fn min_sep(&self) -> f64 {
        self.min_sep
    }

    /// Largest pairwise distance.
    pub fn diam(&self) -> f64 {
        self.diam
    }

    /// Iterates over all pairwise distances `|x_i - x_j|`, `i < j`.
    pub fn pair_distances(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.len();
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| distance(self.point(i), self.point(j))))
    }

    /// Applies `x -> scale * x + shift`.
    pub fn affine(&self, scale: f64, shift: &[f64]) -> Result<Self> {
        let coords = self
            .coords
            .chunks_exact(self.d)
            .flat_map(|p| p.iter().zip(shift).map(|(x, b)| scale * x + b))
            .collect();
        Self::from_flat(self.d, coords)
    }

    /// Rescales about the centroid so that the minimal separation is `sep`.
    pub fn normalized(&self, sep: f64) -> Self {
        let n = self.len();
        let mut centroid = vec![0.0; self.d];
        for p in self.points() {
            for (c, x) in centroid.iter_mut().zip(p) {
                *c += x / n as f64;
            }
        }
        let s = sep / self.min_sep;
        let coords: Vec<f64> = self
            .coords
            .chunks_exact(self.d)
            .flat_map(|p| p.iter().zip(&centroid).map(move |(x, c)| s * (x - c)))
            .collect();
        Self::from_flat(self.d, coords).expect("rescaling preserves distinctness")
    }
}

impl TryFrom<Vec<Vec<f64>>> for Configuration {
    type Error = Error;

    fn try_from(points: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_points(&points)
    }
}

impl From<Configuration> for Vec<Vec<f64>> {
    fn from(c: Configuration) -> Self {
        c.points().map(|p| p.to_vec()).collect()
    }
}

#[inline]
pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `(min_sep, diam)` of a flat coordinate buffer.
pub(crate) fn extent(d: usize, coords: &[f64]) -> (f64, f64) {
    if d == 1 {
        let mut xs = coords.to_vec();
        xs.sort_by(f64::total_cmp);
        let lo = xs
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        return (lo, xs[xs.len() - 1] - xs[0]);
    }
    let n = coords.len() / d;
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for i in 0..n {
        let a = &coords[i * d..(i + 1) * d];
        for j in i + 1..n {
            let r = distance(a, &coords[j * d..(j + 1) * d]);
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    (lo, hi)
}

/// `diam / min_sep` of a configuration.
pub fn config_ratio(c: &Configuration) -> f64 {
    c.diam() / c.min_sep()
}
