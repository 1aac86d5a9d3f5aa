//! Closed-form optimizers and cost bounds on the three-point grid `{-1, 0, 1}`.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{DiscretePath, SpatialGrid, TimeGrid};
use crate::measures::TransportPlan;
use crate::rational::{format_q, q, qi, serde_q, Q};

/// The three exact cost levels appearing in the mass-splitting argument.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostBounds {
    pub steps: usize,
    /// Optimal cost among plans that never split mass.
    #[serde(with = "serde_q")]
    pub no_split_optimum: Q,
    /// Lower bound when the middle orbit stays at `0`.
    #[serde(with = "serde_q")]
    pub middle_static_lower_bound: Q,
    /// `(4 + 4/(N−1))/3`, attained by the splitting plan.
    #[serde(with = "serde_q")]
    pub split_optimum: Q,
}

pub fn cost_bounds(steps: usize) -> Result<CostBounds> {
    check_steps(steps)?;
    Ok(CostBounds {
        steps,
        no_split_optimum: qi(2),
        middle_static_lower_bound: q(8, 3),
        split_optimum: (qi(4) + q(4, steps as i64 - 1)) / qi(3),
    })
}

fn check_steps(steps: usize) -> Result<()> {
    if steps < 3 {
        return Err(Error::invalid(format!("need at least 3 time steps, got {steps}")));
    }
    Ok(())
}

/// Path on `{-1, 0, 1}` given by coordinates, as grid indices.
fn path(coords: &[i64]) -> DiscretePath {
    DiscretePath(coords.iter().map(|&c| (c + 1) as usize).collect())
}

/// `±(1, …, 1, 0, −1, …, −1)` with the `0` at time index `nu`.
fn passing_path(steps: usize, nu: usize, sign: i64) -> DiscretePath {
    let coords: Vec<i64> = (0..=steps)
        .map(|i| match i.cmp(&nu) {
            std::cmp::Ordering::Less => sign,
            std::cmp::Ordering::Equal => 0,
            std::cmp::Ordering::Greater => -sign,
        })
        .collect();
    path(&coords)
}

/// `(0, ±1, …, ±1, 0)`.
fn vacating_path(steps: usize, sign: i64) -> DiscretePath {
    let coords: Vec<i64> = (0..=steps)
        .map(|i| if i == 0 || i == steps { 0 } else { sign })
        .collect();
    path(&coords)
}

fn static_path(steps: usize) -> DiscretePath {
    path(&vec![0; steps + 1])
}

fn three_point_plan(steps: usize, atoms: Vec<(DiscretePath, Q)>) -> Result<TransportPlan> {
    TransportPlan::from_rational(SpatialGrid::three_point(), TimeGrid::unit(steps)?, atoms)
}

/// The splitting optimizer `γ₀` on `{-1, 0, 1}` with unit steps and flip endpoint.
///
/// Outer orbits pass through `0` at each of the times `t_1, …, t_{N−1}` with
/// mass `1/(3(N−1))` each; the middle orbit vacates `0` upward and downward
/// with the same mass and otherwise stays put.
pub fn gerosplan_plan(steps: usize) -> Result<TransportPlan> {
    check_steps(steps)?;
    let unit = q(1, 3 * (steps as i64 - 1));
    let mut atoms = Vec::new();
    for nu in 1..steps {
        atoms.push((passing_path(steps, nu, 1), unit.clone()));
        atoms.push((passing_path(steps, nu, -1), unit.clone()));
    }
    atoms.push((static_path(steps), &unit * qi(steps as i64 - 3)));
    atoms.push((vacating_path(steps, 1), unit.clone()));
    atoms.push((vacating_path(steps, -1), unit));
    three_point_plan(steps, atoms)
}

/// The one-parameter family of optimizers; `δ = 0` gives [`gerosplan_plan`].
///
/// Passing orbits through `0` at time `t_i` carry `1/(3(N−1)) ± (−1)^{i−1} δ`.
/// For even `N` only `δ = 0` keeps the marginals uniform.
pub fn delta_family_plan(steps: usize, delta: &Q) -> Result<TransportPlan> {
    check_steps(steps)?;
    let unit = q(1, 3 * (steps as i64 - 1));
    if delta.abs() > unit {
        return Err(Error::invalid(format!(
            "delta {} outside [-{}, {}]",
            format_q(delta),
            format_q(&unit),
            format_q(&unit)
        )));
    }
    if steps % 2 == 0 && !delta.is_zero() {
        return Err(Error::invalid(format!(
            "delta must be 0 for even N = {steps}: the family violates the marginals otherwise"
        )));
    }
    let mut atoms = Vec::new();
    for i in 1..steps {
        let signed = if i % 2 == 1 { delta.clone() } else { -delta.clone() };
        atoms.push((passing_path(steps, i, 1), &unit + &signed));
        atoms.push((passing_path(steps, i, -1), &unit - &signed));
    }
    atoms.push((static_path(steps), &unit * qi(steps as i64 - 3)));
    atoms.push((vacating_path(steps, 1), &unit + delta));
    atoms.push((vacating_path(steps, -1), &unit - delta));
    three_point_plan(steps, atoms)
}

/// The vacating path `(0, 1, …, 1, 0)` whose mass separates the optimizers.
pub fn upper_vacating_path(steps: usize) -> DiscretePath {
    vacating_path(steps, 1)
}

/// `2/(3(N−1))` for odd `N`, `0` for even `N`: the range of the upper vacating mass over all optimizers.
pub fn optimal_face_width(steps: usize) -> Q {
    if steps % 2 == 0 {
        Q::zero()
    } else {
        q(2, 3 * (steps as i64 - 1))
    }
}
