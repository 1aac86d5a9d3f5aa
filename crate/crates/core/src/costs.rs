//! Path cost catalog.
//!
//! Every cost is a total function of real (here: rational) coordinate tuples;
//! [`CostFunction::evaluate`] adapts it to index paths on a grid.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{EndpointMap, SpatialGrid, TimeGrid};
use crate::rational::{qi, Q};

/// A cost value; `Infinite` marks coincident points under the Coulomb cost.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CostValue {
    Finite(Q),
    Infinite,
}

impl CostValue {
    pub fn finite(&self) -> Option<&Q> {
        match self {
            CostValue::Finite(v) => Some(v),
            CostValue::Infinite => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CostFunction {
    /// `Σ |ω_i − ω_{i−1}|² / (t_i − t_{i−1})` over the full path.
    Action { timegrid: TimeGrid },
    /// Action of `(ω_0, …, ω_{N−1}, g*(ω_0))`; `timegrid` is the full grid with `N + 1` points.
    ReducedAction {
        timegrid: TimeGrid,
        endpoint: EndpointMap,
    },
    /// `(ω_0 − ω_1 + ω_2)²` on triples (three unit steps, flip endpoint).
    ModifiedAction,
    Barycenter {
        #[serde(with = "crate::rational::serde_q::vec")]
        weights: Vec<Q>,
    },
    Coulomb,
    FrenkelKontorova,
    CubicSpline,
}

impl CostFunction {
    pub fn name(&self) -> &'static str {
        match self {
            CostFunction::Action { .. } => "action",
            CostFunction::ReducedAction { .. } => "reduced_action",
            CostFunction::ModifiedAction => "modified_action",
            CostFunction::Barycenter { .. } => "barycenter",
            CostFunction::Coulomb => "coulomb",
            CostFunction::FrenkelKontorova => "frenkel_kontorova",
            CostFunction::CubicSpline => "cubic_spline",
        }
    }

    pub fn evaluate(&self, grid: &SpatialGrid, path: &[usize]) -> Result<CostValue> {
        match self {
            CostFunction::ReducedAction { timegrid, endpoint } => {
                reduced_cost(grid, path, timegrid, endpoint).map(CostValue::Finite)
            }
            _ => self.evaluate_coords(&grid.coordinates(path)),
        }
    }

    /// Evaluates on coordinates. Not available for the reduced action, whose
    /// endpoint map acts on grid indices.
    pub fn evaluate_coords(&self, coords: &[Q]) -> Result<CostValue> {
        let finite = |v: Result<Q>| v.map(CostValue::Finite);
        match self {
            CostFunction::Action { timegrid } => finite(action_cost(coords, timegrid)),
            CostFunction::ReducedAction { .. } => Err(Error::invalid(
                "the reduced action needs grid indices; use evaluate",
            )),
            CostFunction::ModifiedAction => {
                let triple: &[Q; 3] = coords.try_into().map_err(|_| {
                    Error::invalid(format!("modified action takes 3 coordinates, got {}", coords.len()))
                })?;
                Ok(CostValue::Finite(modified_cost(triple)))
            }
            CostFunction::Barycenter { weights } => finite(barycenter_cost(coords, weights)),
            CostFunction::Coulomb => Ok(coulomb_cost(coords)),
            CostFunction::FrenkelKontorova => Ok(CostValue::Finite(frenkel_kontorova_cost(coords))),
            CostFunction::CubicSpline => Ok(CostValue::Finite(cubic_spline_cost(coords))),
        }
    }
}

pub fn action_cost(path: &[Q], timegrid: &TimeGrid) -> Result<Q> {
    if path.len() != timegrid.len() {
        return Err(Error::invalid(format!(
            "path of length {} on a time grid with {} points",
            path.len(),
            timegrid.len()
        )));
    }
    Ok(path
        .windows(2)
        .enumerate()
        .map(|(k, w)| {
            let d = &w[1] - &w[0];
            &d * &d / timegrid.step(k + 1)
        })
        .sum())
}

/// Action of the path extended by `g*(ω_0)`; `path` has `N` entries.
pub fn reduced_cost(
    grid: &SpatialGrid,
    path: &[usize],
    timegrid: &TimeGrid,
    endpoint: &EndpointMap,
) -> Result<Q> {
    endpoint.check_grid(grid)?;
    let first = *path
        .first()
        .ok_or_else(|| Error::invalid("empty path"))?;
    let mut full = path.to_vec();
    full.push(endpoint.apply(first));
    action_cost(&grid.coordinates(&full), timegrid)
}

/// `(ω_0 − ω_1 + ω_2)²`: the action of `(ω_0, ω_1, ω_2, −ω_0)` minus `Σ ω_i²`.
pub fn modified_cost(triple: &[Q; 3]) -> Q {
    let s = &triple[0] - &triple[1] + &triple[2];
    &s * &s
}

pub fn barycenter_cost(points: &[Q], weights: &[Q]) -> Result<Q> {
    if points.len() != weights.len() {
        return Err(Error::invalid(format!(
            "{} points but {} barycenter weights",
            points.len(),
            weights.len()
        )));
    }
    if weights.iter().any(|w| !w.is_positive()) {
        return Err(Error::invalid("barycenter weights must be positive"));
    }
    if !weights.iter().sum::<Q>().is_one() {
        return Err(Error::invalid("barycenter weights must sum to 1"));
    }
    let center: Q = points.iter().zip(weights).map(|(x, w)| x * w).sum();
    Ok(points
        .iter()
        .zip(weights)
        .map(|(x, w)| {
            let d = x - &center;
            w * &d * &d
        })
        .sum())
}

pub fn coulomb_cost(points: &[Q]) -> CostValue {
    let mut total = Q::zero();
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            let d = (a - b).abs();
            if d.is_zero() {
                return CostValue::Infinite;
            }
            total += d.recip();
        }
    }
    CostValue::Finite(total)
}

/// Pair potential `v(r) = r⁴/4 − r³/3`.
pub fn frenkel_kontorova_potential(r: &Q) -> Q {
    let r3 = r * r * r;
    &r3 * r / qi(4) - r3 / qi(3)
}

pub fn frenkel_kontorova_cost(points: &[Q]) -> Q {
    let mut total = Q::zero();
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            total += frenkel_kontorova_potential(&(a - b).abs());
        }
    }
    total
}

pub fn cubic_spline_cost(points: &[Q]) -> Q {
    points
        .windows(3)
        .map(|w| {
            let d = &w[0] - &w[1] * qi(2) + &w[2];
            &d * &d
        })
        .sum()
}
