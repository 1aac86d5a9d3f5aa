//! The continuous-space optimizer on `[-1, 1]` with three unit steps and
//! flip endpoint, its trigonometric paths, and an exact discretization.

use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{DiscretePath, SpatialGrid, TimeGrid};
use crate::measures::TransportPlan;
use crate::rational::{q, qi, Q};

use super::qsqrt3::QSqrt3;

/// The pressure `p(x) = x²/2`, with `p′(x) = x`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PressureFunction;

impl PressureFunction {
    pub fn value(&self, x: &QSqrt3) -> QSqrt3 {
        (x * x).scale(&q(1, 2))
    }

    pub fn derivative(&self, x: &QSqrt3) -> QSqrt3 {
        x.clone()
    }
}

/// Initial position `x` and discrete initial velocity `v` of the path
/// `ω_n = x cos(nπ/3) + v sin(nπ/3)`, `n = 0, …, steps`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrigPathParams {
    pub x: QSqrt3,
    pub v: QSqrt3,
    pub steps: usize,
}

/// `cos(nπ/3)` and `sin(nπ/3)` in `ℚ(√3)`.
fn trig_sixth(n: usize) -> (QSqrt3, QSqrt3) {
    let half = q(1, 2);
    let (c, s) = match n % 6 {
        0 => (qi(1), qi(0)),
        1 => (half.clone(), half.clone()),
        2 => (-half.clone(), half.clone()),
        3 => (qi(-1), qi(0)),
        4 => (-half.clone(), -half.clone()),
        _ => (half.clone(), -half),
    };
    (QSqrt3::rational(c), QSqrt3::new(Q::zero(), s))
}

/// The general solution of the discrete Euler–Lagrange equation for `p(x) = x²/2`.
pub fn solve_discrete_el(params: &TrigPathParams) -> Vec<QSqrt3> {
    (0..=params.steps)
        .map(|n| {
            let (c, s) = trig_sixth(n);
            &(&params.x * &c) + &(&params.v * &s)
        })
        .collect()
}

/// `max_i |ω_{i+1} − 2ω_i + ω_{i−1} + p′(ω_i)|` over the interior times.
pub fn el_residual(path: &[QSqrt3], pressure: &PressureFunction) -> Result<QSqrt3> {
    if path.len() < 3 {
        return Err(Error::invalid(format!(
            "residual needs at least 3 positions, got {}",
            path.len()
        )));
    }
    let two = qi(2);
    Ok(path
        .windows(3)
        .map(|w| {
            let second = &(&w[2] - &w[1].scale(&two)) + &w[0];
            (&second + &pressure.derivative(&w[1])).abs()
        })
        .max()
        .unwrap_or_else(QSqrt3::zero))
}

/// `v = (ω_1 − ω_{−1})/√3 = (2ω_1 − ω_0)/√3`, with the backward extension `ω_{−1} = ω_0 − ω_1`.
pub fn velocity_from_path(path: &[QSqrt3]) -> Result<QSqrt3> {
    if path.len() < 2 {
        return Err(Error::invalid("velocity needs at least 2 positions"));
    }
    Ok((&path[1].scale(&qi(2)) - &path[0]).div_sqrt3())
}

/// The piecewise linear measure-preserving maps `ω_0 ↦ ω_i` of the two building blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchMap {
    /// Expand and mix: `2x − 1` for `x ≥ 0`, `2x + 1` otherwise.
    T1,
    /// `T1(x) − x`: `x − 1` for `x ≥ 0`, `x + 1` otherwise.
    T2,
    /// Flip each block: `−x + 1` for `x ≥ 0`, `−x − 1` otherwise.
    S1,
    /// `S1(x) − x`: `−2x + 1` for `x ≥ 0`, `−2x − 1` otherwise.
    S2,
}

impl BranchMap {
    pub const ALL: [BranchMap; 4] = [BranchMap::T1, BranchMap::T2, BranchMap::S1, BranchMap::S2];

    /// `(slope, intercept)` of the branch for `x ≥ 0` (`nonnegative`) or `x < 0`.
    fn affine(self, nonnegative: bool) -> (i64, i64) {
        let sign = if nonnegative { 1 } else { -1 };
        match self {
            BranchMap::T1 => (2, -sign),
            BranchMap::T2 => (1, -sign),
            BranchMap::S1 => (-1, sign),
            BranchMap::S2 => (-2, sign),
        }
    }

    fn apply_branch(self, x: &Q, nonnegative: bool) -> Q {
        let (a, b) = self.affine(nonnegative);
        x * qi(a) + qi(b)
    }

    /// The map on `[-1, 1]`; `x = 0` takes the `x ≥ 0` branch.
    pub fn apply(self, x: &Q) -> Result<Q> {
        if x.abs() > qi(1) {
            return Err(Error::invalid(format!("{x} lies outside [-1, 1]")));
        }
        Ok(self.apply_branch(x, !x.is_negative()))
    }
}

impl fmt::Display for BranchMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            BranchMap::T1 => "T1",
            BranchMap::T2 => "T2",
            BranchMap::S1 => "S1",
            BranchMap::S2 => "S2",
        };
        f.write_str(name)
    }
}

pub fn map_t1(x: &Q) -> Result<Q> {
    BranchMap::T1.apply(x)
}

pub fn map_t2(x: &Q) -> Result<Q> {
    BranchMap::T2.apply(x)
}

pub fn map_s1(x: &Q) -> Result<Q> {
    BranchMap::S1.apply(x)
}

pub fn map_s2(x: &Q) -> Result<Q> {
    BranchMap::S2.apply(x)
}

/// Which plan of the decomposition `γ₀ = ½(γ₁ + γ₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    Gamma0,
    Gamma1,
    Gamma2,
}

impl Component {
    pub const ALL: [Component; 3] = [Component::Gamma0, Component::Gamma1, Component::Gamma2];

    /// The building blocks this component mixes, with their weights.
    fn blocks(self) -> Vec<(Q, Component)> {
        match self {
            Component::Gamma0 => vec![(q(1, 2), Component::Gamma1), (q(1, 2), Component::Gamma2)],
            block => vec![(qi(1), block)],
        }
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Component::Gamma0 => "gamma0",
            Component::Gamma1 => "gamma1",
            Component::Gamma2 => "gamma2",
        };
        f.write_str(name)
    }
}

impl FromStr for Component {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gamma0" | "0" => Ok(Component::Gamma0),
            "gamma1" | "1" => Ok(Component::Gamma1),
            "gamma2" | "2" => Ok(Component::Gamma2),
            other => Err(Error::invalid(format!("unknown component '{other}'"))),
        }
    }
}

/// The two-branch velocity law `v = ±(3|x| − 2)/√3` of the continuous optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContinuousPlanSpec {
    pub component: Component,
}

/// `(3|x| − 2)/√3`.
pub fn branch_velocity(x: &Q) -> QSqrt3 {
    QSqrt3::over_sqrt3(x.abs() * qi(3) - qi(2))
}

impl ContinuousPlanSpec {
    /// Conditional velocity law at initial position `x`: `(weight, velocity)` pairs summing to weight 1.
    pub fn branches(&self, x: &Q) -> Result<Vec<(Q, QSqrt3)>> {
        if x.abs() > qi(1) {
            return Err(Error::invalid(format!("{x} lies outside [-1, 1]")));
        }
        let v = branch_velocity(x);
        let plus_first = !x.is_negative();
        Ok(self
            .component
            .blocks()
            .into_iter()
            .map(|(w, block)| {
                let plus = (block == Component::Gamma1) == plus_first;
                (w, if plus { v.clone() } else { -v.clone() })
            })
            .collect())
    }
}

/// The unsnapped path `(x, M₁(x), M₂(x), −x)` of building block `γ₁` (`T₁, T₂`) or `γ₂` (`S₁, S₂`).
pub fn branch_tuple(block: Component, x: &Q) -> Result<[Q; 4]> {
    let (m1, m2) = match block {
        Component::Gamma1 => (BranchMap::T1, BranchMap::T2),
        Component::Gamma2 => (BranchMap::S1, BranchMap::S2),
        Component::Gamma0 => {
            return Err(Error::invalid("gamma0 mixes two blocks; pick gamma1 or gamma2"))
        }
    };
    Ok([x.clone(), m1.apply(x)?, m2.apply(x)?, -x.clone()])
}

fn check_cells(n: usize) -> Result<()> {
    if n < 2 || n % 2 == 1 {
        return Err(Error::invalid(format!(
            "resolution must be an even number >= 2, got {n}"
        )));
    }
    Ok(())
}

/// Midpoints of the `2n` cells of width `1/n` partitioning `[-1, 1]`.
pub fn cell_midpoints(n: usize) -> Vec<Q> {
    (0..2 * n as i64).map(|k| q(2 * k + 1, 2 * n as i64) - qi(1)).collect()
}

/// Cell of `y` among the `2n` cells of width `1/n`. A value on an interior
/// cell boundary goes to the lower cell when `prefer_lower`, else the upper.
fn cell_of(y: &Q, n: usize, prefer_lower: bool) -> Result<usize> {
    let t = (y + qi(1)) * qi(n as i64);
    let k = if t.is_integer() {
        let t = t.to_integer();
        if prefer_lower {
            t - 1
        } else {
            t
        }
    } else {
        t.floor().to_integer()
    };
    let cells = 2 * n as i64;
    let k: i64 = k
        .try_into()
        .map_err(|_| Error::Internal(format!("cell index of {y} overflows")))?;
    if !(0..cells).contains(&k) {
        return Err(Error::Internal(format!("{y} has no cell at resolution {n}")));
    }
    Ok(k as usize)
}

/// The unsnapped branch tuples `(x*, M₁(x*), M₂(x*), −x*)` at every cell midpoint `x*`,
/// for each building block of the component.
pub fn theorem1_branch_tuples(n: usize, component: Component) -> Result<Vec<[Q; 4]>> {
    check_cells(n)?;
    let mut tuples = Vec::new();
    for (_, block) in component.blocks() {
        for x in cell_midpoints(n) {
            tuples.push(branch_tuple(block, &x)?);
        }
    }
    Ok(tuples)
}

/// Discretization of the continuous optimizer on the `2n`-point midpoint grid, three unit steps.
///
/// Each building block places one atom of mass `1/(2n)` per cell, following
/// the branch tuple of the cell midpoint `x*`. Positions at slope `±1` land on
/// midpoints exactly; the slope-`±2` images land on cell boundaries and are
/// assigned to the lower cell for `x* ≥ 0` and the upper cell for `x* < 0`,
/// which keeps every time marginal exactly uniform. `γ₀` averages the blocks,
/// so its atoms carry multiples of `1/(4n)`.
pub fn theorem1_discretized_plan(n: usize, component: Component) -> Result<TransportPlan> {
    check_cells(n)?;
    let grid = SpatialGrid::uniform_symmetric(2 * n)?;
    let timegrid = TimeGrid::unit(3)?;
    let mass = q(1, 2 * n as i64);
    let mut atoms = Vec::new();
    for (weight, block) in component.blocks() {
        for x in cell_midpoints(n) {
            let tuple = branch_tuple(block, &x)?;
            let prefer_lower = !x.is_negative();
            let indices = tuple
                .iter()
                .map(|y| cell_of(y, n, prefer_lower))
                .collect::<Result<Vec<_>>>()?;
            atoms.push((DiscretePath(indices), &weight * &mass));
        }
    }
    TransportPlan::from_rational(grid, timegrid, atoms)
}

/// Push-forward of the uniform probability on `[-1, 1]`, taken piecewise on the
/// `4n` pieces of width `1/(2n)`, onto the `2n` cells of width `1/n`.
///
/// Each piece lies within one branch of the map, so its image is an interval
/// carrying the piece mass uniformly; cell masses are exact interval overlaps.
pub fn pushforward_partition(map: BranchMap, n: usize) -> Result<Vec<Q>> {
    check_cells(n)?;
    let pieces = 4 * n as i64;
    let piece_mass = q(1, pieces);
    let mut cells = vec![Q::zero(); 2 * n];
    for j in 0..pieces {
        let a = q(j, 2 * n as i64) - qi(1);
        let b = q(j + 1, 2 * n as i64) - qi(1);
        let nonnegative = !a.is_negative();
        let (ya, yb) = (map.apply_branch(&a, nonnegative), map.apply_branch(&b, nonnegative));
        let (lo, hi) = if ya <= yb { (ya, yb) } else { (yb, ya) };
        let length = &hi - &lo;
        for (k, cell) in cells.iter_mut().enumerate() {
            let c0 = q(k as i64, n as i64) - qi(1);
            let c1 = q(k as i64 + 1, n as i64) - qi(1);
            let overlap = (&hi).min(&c1) - (&lo).max(&c0);
            if overlap.is_positive() {
                *cell += &piece_mass * overlap / &length;
            }
        }
    }
    Ok(cells)
}

/// Optimal value of the continuous problem with uniform marginals on `[-1, 1]`:
/// `Σ_{i=0}^{2} ∫ ω_i² dμ = 3 · 1/3`.
pub fn continuous_optimal_cost() -> Q {
    qi(1)
}

/// Bound on `|cost(discretized γ) − 1|` at resolution `n`.
pub fn theorem1_cost_tolerance(n: usize) -> Q {
    q(4, n as i64)
}
