//! The Kantorovich linear program over discrete path space.
//!
//! One column per admissible path, one equality row per (time, grid point)
//! prescribing the uniform marginal `1/|Ω|`. Columns follow lexicographic
//! path order so that solves are reproducible.

mod face;
mod monge;
pub mod simplex;

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::costs::{CostFunction, CostValue};
use crate::error::{Error, Result};
use crate::grid::{enumerate_paths, DiscretePath, EndpointMap, SpatialGrid, TimeGrid, DEFAULT_PATH_CAP};
use crate::measures::{Arith, MassValue, TransportPlan};
use crate::rational::{format_q, Q};

pub use face::{optimal_face_probe, path_functional, FaceInterval};
pub use monge::{monge_bruteforce, MongeOptimum, DEFAULT_MONGE_CAP};
pub use simplex::PricingRule;

use simplex::{LpScalar, StandardForm, Termination};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LpForm {
    /// Paths on all `N + 1` times, restricted to the endpoint condition when one is given.
    Full,
    /// Paths on the first `N` times; the endpoint map is folded into the cost.
    Reduced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RowLabel {
    pub time: usize,
    pub point: usize,
}

#[derive(Debug, Clone)]
pub struct AssembleOptions {
    pub path_cap: u128,
    /// Drop the last-point row of every time block except the first. The
    /// dropped rows are implied by the remaining ones and total mass.
    pub drop_redundant_rows: bool,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        AssembleOptions {
            path_cap: DEFAULT_PATH_CAP,
            drop_redundant_rows: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub grid: SpatialGrid,
    /// Full time grid `t_0..t_N`, also for the reduced form.
    pub timegrid: TimeGrid,
    pub endpoint: Option<EndpointMap>,
    pub form: LpForm,
    /// Column paths in lexicographic order (length `N + 1`, or `N` when reduced).
    pub columns: Vec<DiscretePath>,
    pub objective: Vec<Q>,
    pub rows: Vec<RowLabel>,
    pub dropped_rows: Vec<RowLabel>,
    pub rhs: Vec<Q>,
    /// Row indices hit by each column (all coefficients are one).
    pub entries: Vec<Vec<usize>>,
    /// Paths left out because their cost is infinite.
    pub excluded_columns: usize,
}

pub fn assemble_mmot_lp(
    grid: &SpatialGrid,
    timegrid: &TimeGrid,
    cost: &CostFunction,
    endpoint: Option<&EndpointMap>,
    form: LpForm,
    options: &AssembleOptions,
) -> Result<LinearProgram> {
    let paths = match form {
        LpForm::Full => enumerate_paths(grid, timegrid, endpoint, options.path_cap)?,
        LpForm::Reduced => {
            if endpoint.is_none() {
                return Err(Error::invalid("the reduced form needs an endpoint map"));
            }
            let short = timegrid
                .truncated()
                .ok_or_else(|| Error::invalid("the reduced form needs at least two time steps"))?;
            enumerate_paths(grid, &short, None, options.path_cap)?
        }
    };
    let time_points = paths.first().map_or(0, |p| p.len());

    let mut rows = Vec::new();
    let mut dropped_rows = Vec::new();
    let mut row_index = vec![vec![None; grid.len()]; time_points];
    for (time, slots) in row_index.iter_mut().enumerate() {
        for (point, slot) in slots.iter_mut().enumerate() {
            let label = RowLabel { time, point };
            if options.drop_redundant_rows && time > 0 && point + 1 == grid.len() {
                dropped_rows.push(label);
            } else {
                *slot = Some(rows.len());
                rows.push(label);
            }
        }
    }
    let target = Q::new(1.into(), grid.len().into());
    let rhs = vec![target; rows.len()];

    let mut columns = Vec::with_capacity(paths.len());
    let mut objective = Vec::with_capacity(paths.len());
    let mut entries = Vec::with_capacity(paths.len());
    let mut excluded_columns = 0;
    for path in paths {
        let value = match (form, endpoint) {
            (LpForm::Reduced, Some(map)) => {
                let mut full = path.0.clone();
                full.push(map.apply(path.0[0]));
                cost.evaluate(grid, &full)?
            }
            _ => cost.evaluate(grid, &path.0)?,
        };
        let CostValue::Finite(value) = value else {
            excluded_columns += 1;
            continue;
        };
        entries.push(
            path.0
                .iter()
                .enumerate()
                .filter_map(|(t, &x)| row_index[t][x])
                .collect(),
        );
        objective.push(value);
        columns.push(path);
    }

    Ok(LinearProgram {
        grid: grid.clone(),
        timegrid: timegrid.clone(),
        endpoint: endpoint.cloned(),
        form,
        columns,
        objective,
        rows,
        dropped_rows,
        rhs,
        entries,
        excluded_columns,
    })
}

impl LinearProgram {
    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Time grid matching the column paths.
    pub fn column_timegrid(&self) -> TimeGrid {
        match self.form {
            LpForm::Full => self.timegrid.clone(),
            LpForm::Reduced => self.timegrid.truncated().expect("checked at assembly"),
        }
    }

    pub fn column_of(&self, path: &DiscretePath) -> Option<usize> {
        self.columns.binary_search(path).ok()
    }

    pub(crate) fn standard_form<T: LpScalar>(&self) -> StandardForm<T> {
        let one = T::from_q(&Q::from_integer(1.into()));
        StandardForm {
            rows: self.rows.len(),
            columns: self
                .entries
                .iter()
                .map(|rows| rows.iter().map(|&r| (r, one.clone())).collect())
                .collect(),
            rhs: self.rhs.iter().map(T::from_q).collect(),
            cost: self.objective.iter().map(T::from_q).collect(),
        }
    }

    /// Debug export: objective, triplet-form constraints, right-hand side.
    pub fn to_json(&self) -> serde_json::Value {
        let triplets: Vec<(usize, usize, &str)> = self
            .entries
            .iter()
            .enumerate()
            .flat_map(|(j, rows)| rows.iter().map(move |&r| (r, j, "1")))
            .collect();
        serde_json::json!({
            "form": self.form,
            "grid": self.grid,
            "times": self.timegrid,
            "endpoint": self.endpoint,
            "columns": self.columns,
            "objective": self.objective.iter().map(format_q).collect::<Vec<_>>(),
            "rows": self.rows,
            "dropped_rows": self.dropped_rows,
            "constraints": triplets,
            "rhs": self.rhs.iter().map(format_q).collect::<Vec<_>>(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    ResourceLimit,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub arith: Arith,
    /// Defaults to Bland in rational mode and Dantzig in float mode.
    pub pricing: Option<PricingRule>,
    pub max_pivots: usize,
    pub time_limit: Option<Duration>,
}

impl SolveOptions {
    pub fn rational() -> Self {
        SolveOptions {
            arith: Arith::Rational,
            pricing: None,
            max_pivots: 10_000_000,
            time_limit: None,
        }
    }

    pub fn float() -> Self {
        SolveOptions {
            arith: Arith::Float,
            pricing: None,
            max_pivots: 10_000_000,
            time_limit: Some(Duration::from_secs(60)),
        }
    }

    fn limits(&self) -> simplex::Limits {
        simplex::Limits {
            pricing: self.pricing.unwrap_or(match self.arith {
                Arith::Rational => PricingRule::Bland,
                Arith::Float => PricingRule::Dantzig,
            }),
            max_pivots: self.max_pivots,
            time_limit: self.time_limit,
        }
    }
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions::rational()
    }
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub arith: Arith,
    /// Optimal objective value; `None` unless optimal.
    pub value: Option<MassValue>,
    /// Nonzero column masses `(column, mass)` in column order.
    pub masses: Vec<(usize, MassValue)>,
    /// Basic original columns.
    pub basis: Vec<usize>,
    pub pivots: usize,
    /// Largest absolute constraint violation (exactly zero in rational mode).
    pub residual: f64,
    pub elapsed: Duration,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// Exact optimal value, when optimal in rational mode.
    pub fn exact_value(&self) -> Option<&Q> {
        self.value.as_ref().and_then(MassValue::exact)
    }

    /// The solution as a plan on the program's own path space.
    pub fn to_plan(&self, lp: &LinearProgram) -> Result<TransportPlan> {
        if !self.is_optimal() {
            return Err(Error::invalid(format!("solution status is {:?}", self.status)));
        }
        TransportPlan::new(
            lp.grid.clone(),
            lp.column_timegrid(),
            self.arith,
            self.masses
                .iter()
                .map(|(j, m)| (lp.columns[*j].clone(), m.clone())),
        )
    }

    /// The solution on full paths, extending reduced-form columns by the endpoint map.
    pub fn to_full_plan(&self, lp: &LinearProgram) -> Result<TransportPlan> {
        let plan = self.to_plan(lp)?;
        match (lp.form, &lp.endpoint) {
            (LpForm::Reduced, Some(map)) => plan.extend(map, &lp.timegrid),
            _ => Ok(plan),
        }
    }
}

pub(crate) fn solve_form<T: LpScalar>(
    form: &StandardForm<T>,
    options: &SolveOptions,
) -> Result<(simplex::Outcome<T>, LpStatus)> {
    let outcome = simplex::solve(form, &options.limits());
    let status = match outcome.termination {
        Termination::Optimal => LpStatus::Optimal,
        Termination::Infeasible => LpStatus::Infeasible,
        Termination::PivotLimit | Termination::TimeLimit => LpStatus::ResourceLimit,
        Termination::Unbounded => {
            return Err(Error::Internal(
                "simplex reported an unbounded ray on a bounded program".into(),
            ))
        }
    };
    Ok((outcome, status))
}

fn finish<T: LpScalar>(
    lp: &LinearProgram,
    outcome: simplex::Outcome<T>,
    status: LpStatus,
    arith: Arith,
    wrap: impl Fn(&T) -> MassValue,
    start: Instant,
) -> LpSolution {
    let mut residual = 0.0f64;
    let mut masses = Vec::new();
    if status == LpStatus::Optimal {
        let mut row_sums = vec![T::zero(); lp.rows.len()];
        for (j, x) in outcome.x.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for &r in &lp.entries[j] {
                row_sums[r] = row_sums[r].add(x);
            }
            if x.is_pos() {
                masses.push((j, wrap(x)));
            }
        }
        residual = row_sums
            .iter()
            .zip(&lp.rhs)
            .map(|(s, b)| s.sub(&T::from_q(b)).abs_f64())
            .fold(0.0, f64::max);
    }
    let value = (status == LpStatus::Optimal).then(|| {
        let total = outcome
            .x
            .iter()
            .zip(&lp.objective)
            .fold(T::zero(), |acc, (x, c)| acc.add(&x.mul(&T::from_q(c))));
        wrap(&total)
    });
    LpSolution {
        status,
        arith,
        value,
        masses,
        basis: outcome.basis,
        pivots: outcome.pivots,
        residual,
        elapsed: start.elapsed(),
    }
}

/// Solves the program; rational mode returns the exact optimum at a basic solution.
pub fn solve_simplex(lp: &LinearProgram, options: &SolveOptions) -> Result<LpSolution> {
    let start = Instant::now();
    let solution = match options.arith {
        Arith::Rational => {
            let (outcome, status) = solve_form::<Q>(&lp.standard_form(), options)?;
            finish(lp, outcome, status, Arith::Rational, |x| MassValue::Exact(x.clone()), start)
        }
        Arith::Float => {
            let (outcome, status) = solve_form::<f64>(&lp.standard_form(), options)?;
            finish(lp, outcome, status, Arith::Float, |x| MassValue::Approx(*x), start)
        }
    };
    if solution.is_optimal() {
        let limit = match options.arith {
            Arith::Rational => 0.0,
            Arith::Float => simplex::FLOAT_TOL,
        };
        if solution.residual > limit {
            return Err(Error::Internal(format!(
                "solution violates the marginal constraints by {}",
                solution.residual
            )));
        }
    }
    Ok(solution)
}

/// Optimum of the fully discrete problem on `{-1, 0, 1}`: `(4 + 4/(N−1))/3`.
pub fn closed_form_optimum(steps: usize) -> Q {
    let n = Q::from_integer((steps as i64 - 1).into());
    (Q::from_integer(4.into()) + Q::from_integer(4.into()) / n) / Q::from_integer(3.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeGrid;
    use crate::rational::{q, qi};

    fn three_point_lp(steps: usize, form: LpForm) -> LinearProgram {
        let g = SpatialGrid::three_point();
        let tg = TimeGrid::unit(steps).unwrap();
        let flip = EndpointMap::flip(&g).unwrap();
        let cost = CostFunction::Action { timegrid: tg.clone() };
        assemble_mmot_lp(&g, &tg, &cost, Some(&flip), form, &AssembleOptions::default()).unwrap()
    }

    #[test]
    fn assembly_counts() {
        let reduced = three_point_lp(3, LpForm::Reduced);
        assert_eq!(reduced.num_columns(), 27);
        assert_eq!(reduced.num_rows(), 9);
        assert!(reduced.rhs.iter().all(|b| *b == q(1, 3)));
        assert!(reduced.entries.iter().all(|e| e.len() == 3));

        let full = three_point_lp(4, LpForm::Full);
        assert_eq!(full.num_columns(), 81);
        assert_eq!(full.num_rows(), 15);
        assert!(full.entries.iter().all(|e| e.len() == 5));

        let g = SpatialGrid::three_point();
        let tg = TimeGrid::unit(4).unwrap();
        let cost = CostFunction::Action { timegrid: tg.clone() };
        let flip = EndpointMap::flip(&g).unwrap();
        let opts = AssembleOptions {
            drop_redundant_rows: true,
            ..AssembleOptions::default()
        };
        let dropped = assemble_mmot_lp(&g, &tg, &cost, Some(&flip), LpForm::Full, &opts).unwrap();
        assert_eq!(dropped.num_rows(), 11);
        assert_eq!(dropped.dropped_rows.len(), 4);
        let sol = solve_simplex(&dropped, &SolveOptions::rational()).unwrap();
        assert_eq!(sol.exact_value(), Some(&q(16, 9)));
    }

    #[test]
    fn reduced_form_needs_endpoint() {
        let g = SpatialGrid::three_point();
        let tg = TimeGrid::unit(3).unwrap();
        let cost = CostFunction::Action { timegrid: tg.clone() };
        assert!(assemble_mmot_lp(&g, &tg, &cost, None, LpForm::Reduced, &AssembleOptions::default()).is_err());
        let tight = AssembleOptions {
            path_cap: 10,
            ..AssembleOptions::default()
        };
        let flip = EndpointMap::flip(&g).unwrap();
        assert!(matches!(
            assemble_mmot_lp(&g, &tg, &cost, Some(&flip), LpForm::Full, &tight),
            Err(Error::ResourceLimit { required: 27, .. })
        ));
    }

    #[test]
    fn small_exact_optima() {
        for (steps, expected) in [(3, qi(2)), (4, q(16, 9))] {
            for form in [LpForm::Full, LpForm::Reduced] {
                let lp = three_point_lp(steps, form);
                let sol = solve_simplex(&lp, &SolveOptions::rational()).unwrap();
                assert_eq!(sol.status, LpStatus::Optimal);
                assert_eq!(sol.exact_value(), Some(&expected), "N={steps} {form:?}");
                assert_eq!(sol.residual, 0.0);
                let plan = sol.to_full_plan(&lp).unwrap();
                assert!(crate::measures::has_uniform_marginals(&plan));
            }
        }
    }

    #[test]
    fn identity_coupling_two_points() {
        let g = SpatialGrid::uniform_symmetric(2).unwrap();
        let tg = TimeGrid::unit(1).unwrap();
        let cost = CostFunction::Action { timegrid: tg.clone() };
        let id = EndpointMap::identity(2);
        for endpoint in [None, Some(&id)] {
            let lp = assemble_mmot_lp(&g, &tg, &cost, endpoint, LpForm::Full, &AssembleOptions::default())
                .unwrap();
            let sol = solve_simplex(&lp, &SolveOptions::rational()).unwrap();
            assert_eq!(sol.exact_value(), Some(&qi(0)));
        }
    }

    #[test]
    fn float_mode_agrees() {
        let lp = three_point_lp(5, LpForm::Full);
        let sol = solve_simplex(&lp, &SolveOptions::float()).unwrap();
        assert!((sol.value.as_ref().unwrap().to_f64() - 5.0 / 3.0).abs() < 1e-9);
        assert!(sol.residual <= simplex::FLOAT_TOL);
        sol.to_plan(&lp).unwrap();
    }

    #[test]
    fn infeasible_program_is_reported() {
        let mut lp = three_point_lp(3, LpForm::Reduced);
        lp.rhs[0] = q(1, 2);
        let sol = solve_simplex(&lp, &SolveOptions::rational()).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
        assert!(sol.value.is_none());
        assert!(sol.to_plan(&lp).is_err());
    }

    #[test]
    fn coulomb_columns_with_coincident_points_are_excluded() {
        let g = SpatialGrid::three_point();
        let tg = TimeGrid::unit(2).unwrap();
        let lp = assemble_mmot_lp(&g, &tg, &CostFunction::Coulomb, None, LpForm::Full, &AssembleOptions::default())
            .unwrap();
        assert_eq!(lp.num_columns(), 6);
        assert_eq!(lp.excluded_columns, 21);
        let sol = solve_simplex(&lp, &SolveOptions::rational()).unwrap();
        // Every feasible plan is a mixture of permutations of {-1, 0, 1}: cost 1 + 1 + 1/2.
        assert_eq!(sol.exact_value(), Some(&q(5, 2)));
    }

    #[test]
    fn export_has_triplets() {
        let lp = three_point_lp(3, LpForm::Reduced);
        let v = lp.to_json();
        assert_eq!(v["constraints"].as_array().unwrap().len(), 81);
        assert_eq!(v["rhs"][0], "1/3");
    }
}
