//! Space and time discretizations, discrete paths, and endpoint maps.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{format_q, q, qi, Q};

/// Default cap on the number of enumerated paths.
pub const DEFAULT_PATH_CAP: u128 = 10_000_000;

/// Sorted, duplicate-free set of points on the real line.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GridRepr", into = "GridRepr")]
pub struct SpatialGrid {
    points: Vec<Q>,
}

#[derive(Serialize, Deserialize)]
#[serde(transparent)]
struct GridRepr(#[serde(with = "crate::rational::serde_q::vec")] Vec<Q>);

impl TryFrom<GridRepr> for SpatialGrid {
    type Error = Error;
    fn try_from(repr: GridRepr) -> Result<Self> {
        SpatialGrid::new(repr.0)
    }
}

impl From<SpatialGrid> for GridRepr {
    fn from(grid: SpatialGrid) -> Self {
        GridRepr(grid.points)
    }
}

impl SpatialGrid {
    pub fn new(points: Vec<Q>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::invalid(format!(
                "a spatial grid needs at least 2 points, got {}",
                points.len()
            )));
        }
        if let Some(w) = points.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::invalid(format!(
                "grid points must be strictly increasing ({} then {})",
                format_q(&w[0]),
                format_q(&w[1])
            )));
        }
        Ok(SpatialGrid { points })
    }

    /// Cell midpoints of `n` equal cells covering `[-1, 1]`.
    pub fn uniform_symmetric(n: usize) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return Err(Error::invalid(format!(
                "midpoint grid needs an even cell count >= 2, got {n}"
            )));
        }
        let n_i = n as i64;
        let points = (0..n_i).map(|k| q(2 * k + 1, n_i) - qi(1)).collect();
        SpatialGrid::new(points)
    }

    /// The three-point space `{-1, 0, 1}`.
    pub fn three_point() -> Self {
        SpatialGrid {
            points: vec![qi(-1), qi(0), qi(1)],
        }
    }

    pub fn points(&self) -> &[Q] {
        &self.points
    }

    pub fn point(&self, index: usize) -> &Q {
        &self.points[index]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn index_of(&self, x: &Q) -> Option<usize> {
        self.points.binary_search(x).ok()
    }

    /// True iff the point set is closed under `x -> -x`.
    pub fn is_symmetric(&self) -> bool {
        self.points.iter().all(|x| self.index_of(&-x).is_some())
    }

    /// Coordinates of an index path.
    pub fn coordinates(&self, path: &[usize]) -> Vec<Q> {
        path.iter().map(|&i| self.points[i].clone()).collect()
    }
}

/// Strictly increasing time points `t_0 < ... < t_N` with `N >= 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GridRepr", into = "GridRepr")]
pub struct TimeGrid {
    times: Vec<Q>,
}

impl TryFrom<GridRepr> for TimeGrid {
    type Error = Error;
    fn try_from(repr: GridRepr) -> Result<Self> {
        TimeGrid::new(repr.0)
    }
}

impl From<TimeGrid> for GridRepr {
    fn from(grid: TimeGrid) -> Self {
        GridRepr(grid.times)
    }
}

impl TimeGrid {
    pub fn new(times: Vec<Q>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::invalid("a time grid needs at least one interval"));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("time points must be strictly increasing"));
        }
        Ok(TimeGrid { times })
    }

    /// `t_j = j` for `j = 0..=steps`.
    pub fn unit(steps: usize) -> Result<Self> {
        TimeGrid::new((0..=steps as i64).map(qi).collect())
    }

    pub fn times(&self) -> &[Q] {
        &self.times
    }

    /// Number of intervals `N`.
    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    /// Number of time points `N + 1`.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `t_i - t_{i-1}` for `i` in `1..=N`.
    pub fn step(&self, i: usize) -> Q {
        &self.times[i] - &self.times[i - 1]
    }

    /// The grid with its last time point removed, or `None` for a single interval.
    pub fn truncated(&self) -> Option<TimeGrid> {
        if self.times.len() <= 2 {
            return None;
        }
        Some(TimeGrid {
            times: self.times[..self.times.len() - 1].to_vec(),
        })
    }

    /// Whether `self` equals `other` with exactly one extra final time point.
    pub fn extends(&self, other: &TimeGrid) -> bool {
        self.times.len() == other.times.len() + 1 && self.times[..other.times.len()] == other.times[..]
    }
}

/// One path: a grid-point index for every time point.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DiscretePath(pub Vec<usize>);

impl DiscretePath {
    pub fn new(indices: Vec<usize>) -> Self {
        DiscretePath(indices)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Builds a path from coordinates that must all lie on `grid`.
    pub fn from_coordinates(grid: &SpatialGrid, coords: &[Q]) -> Result<Self> {
        coords
            .iter()
            .map(|x| {
                grid.index_of(x).ok_or_else(|| {
                    Error::invalid(format!("coordinate {} is not a grid point", format_q(x)))
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(DiscretePath)
    }

    pub fn validate(&self, grid: &SpatialGrid, time_points: usize) -> Result<()> {
        if self.0.len() != time_points {
            return Err(Error::invalid(format!(
                "path has {} entries, expected {time_points}",
                self.0.len()
            )));
        }
        if let Some(bad) = self.0.iter().find(|&&i| i >= grid.len()) {
            return Err(Error::invalid(format!(
                "path index {bad} out of range for a {}-point grid",
                grid.len()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for DiscretePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, ")")
    }
}

/// A permutation of grid indices coupling initial and final positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct EndpointMap {
    permutation: Vec<usize>,
}

impl TryFrom<Vec<usize>> for EndpointMap {
    type Error = Error;
    fn try_from(permutation: Vec<usize>) -> Result<Self> {
        EndpointMap::new(permutation)
    }
}

impl From<EndpointMap> for Vec<usize> {
    fn from(map: EndpointMap) -> Self {
        map.permutation
    }
}

impl EndpointMap {
    pub fn new(permutation: Vec<usize>) -> Result<Self> {
        let n = permutation.len();
        let mut seen = vec![false; n];
        for &p in &permutation {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::invalid(format!(
                    "endpoint map {permutation:?} is not a permutation of 0..{n}"
                )));
            }
        }
        Ok(EndpointMap { permutation })
    }

    pub fn identity(n: usize) -> Self {
        EndpointMap {
            permutation: (0..n).collect(),
        }
    }

    /// `x -> -x`, defined only on symmetric grids.
    pub fn flip(grid: &SpatialGrid) -> Result<Self> {
        let permutation = grid
            .points()
            .iter()
            .map(|x| {
                grid.index_of(&-x).ok_or_else(|| {
                    Error::EndpointMapUndefined(format!(
                        "{} has no mirror image in the grid",
                        format_q(x)
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(EndpointMap { permutation })
    }

    pub fn apply(&self, index: usize) -> usize {
        self.permutation[index]
    }

    pub fn len(&self) -> usize {
        self.permutation.len()
    }

    pub fn is_empty(&self) -> bool {
        self.permutation.is_empty()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &EndpointMap) -> EndpointMap {
        EndpointMap {
            permutation: other.permutation.iter().map(|&i| self.permutation[i]).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.permutation.iter().enumerate().all(|(i, &p)| i == p)
    }

    pub fn check_grid(&self, grid: &SpatialGrid) -> Result<()> {
        if self.permutation.len() != grid.len() {
            return Err(Error::invalid(format!(
                "endpoint map acts on {} points but the grid has {}",
                self.permutation.len(),
                grid.len()
            )));
        }
        Ok(())
    }
}

pub(crate) fn checked_pow(base: usize, exp: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base as u128);
    }
    acc
}

/// All index tuples of length `len` over `0..base`, in lexicographic order.
pub(crate) fn index_tuples(base: usize, len: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = checked_pow(base, len);
    let mut current = vec![0usize; len];
    let mut emitted: u128 = 0;
    std::iter::from_fn(move || {
        if emitted >= total {
            return None;
        }
        let out = current.clone();
        emitted += 1;
        for slot in current.iter_mut().rev() {
            *slot += 1;
            if *slot < base {
                break;
            }
            *slot = 0;
        }
        Some(out)
    })
}

/// Lexicographically ordered paths over `timegrid`, optionally restricted to `ω_N = g*(ω_0)`.
pub fn enumerate_paths(
    grid: &SpatialGrid,
    timegrid: &TimeGrid,
    endpoint: Option<&EndpointMap>,
    cap: u128,
) -> Result<Vec<DiscretePath>> {
    let n_steps = timegrid.steps();
    let free = if endpoint.is_some() { n_steps } else { n_steps + 1 };
    let required = checked_pow(grid.len(), free);
    if required > cap {
        return Err(Error::ResourceLimit {
            what: "path enumeration".into(),
            required,
            cap,
        });
    }
    match endpoint {
        None => Ok(index_tuples(grid.len(), free).map(DiscretePath).collect()),
        Some(map) => {
            map.check_grid(grid)?;
            Ok(index_tuples(grid.len(), free)
                .map(|mut head| {
                    head.push(map.apply(head[0]));
                    DiscretePath(head)
                })
                .collect())
        }
    }
}

/// Whether all grid points are of the form `-1 + (2k+1)/n`; returns `n` if so.
pub fn midpoint_cell_count(grid: &SpatialGrid) -> Option<usize> {
    let n = grid.len();
    let expected = SpatialGrid::uniform_symmetric(n).ok()?;
    (expected == *grid).then_some(n)
}
