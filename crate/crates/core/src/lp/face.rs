//! Extent of a linear functional over the optimal face.

use crate::error::{Error, Result};
use crate::grid::DiscretePath;
use crate::measures::{Arith, MassValue};
use crate::rational::{from_f64, Q};

use super::simplex::{LpScalar, StandardForm};
use super::{solve_form, LinearProgram, LpSolution, LpStatus, SolveOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct FaceInterval {
    pub min: MassValue,
    pub max: MassValue,
}

impl FaceInterval {
    pub fn width(&self) -> MassValue {
        match (&self.min, &self.max) {
            (MassValue::Exact(a), MassValue::Exact(b)) => MassValue::Exact(b - a),
            (a, b) => MassValue::Approx(b.to_f64() - a.to_f64()),
        }
    }
}

/// The functional "mass of `path`". Accepts full-length paths on reduced programs.
pub fn path_functional(lp: &LinearProgram, path: &DiscretePath) -> Result<Vec<(usize, Q)>> {
    let width = lp.columns.first().map_or(0, DiscretePath::len);
    let key = if path.len() == width + 1 {
        DiscretePath(path.0[..width].to_vec())
    } else {
        path.clone()
    };
    let column = lp
        .column_of(&key)
        .ok_or_else(|| Error::invalid(format!("path {path} is not a column of the program")))?;
    Ok(vec![(column, Q::from_integer(1.into()))])
}

fn pinned_form<T: LpScalar>(
    lp: &LinearProgram,
    optimum: &Q,
    functional: &[(usize, Q)],
    sign: i64,
) -> Result<StandardForm<T>> {
    let mut form = lp.standard_form::<T>();
    let pin_row = form.rows;
    form.rows += 1;
    for (j, c) in lp.objective.iter().enumerate() {
        if !num_traits::Zero::is_zero(c) {
            form.columns[j].push((pin_row, T::from_q(c)));
        }
    }
    form.rhs.push(T::from_q(optimum));
    form.cost = vec![T::zero(); lp.num_columns()];
    let scale = Q::from_integer(sign.into());
    for (j, coef) in functional {
        let slot = form
            .cost
            .get_mut(*j)
            .ok_or_else(|| Error::invalid(format!("functional refers to missing column {j}")))?;
        *slot = slot.add(&T::from_q(&(coef * &scale)));
    }
    Ok(form)
}

fn extreme<T: LpScalar>(
    lp: &LinearProgram,
    optimum: &Q,
    functional: &[(usize, Q)],
    sign: i64,
    options: &SolveOptions,
) -> Result<T> {
    let form = pinned_form::<T>(lp, optimum, functional, sign)?;
    let (outcome, status) = solve_form(&form, options)?;
    match status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => {
            return Err(Error::Internal(
                "optimal face is empty; the baseline value is not the optimum".into(),
            ))
        }
        LpStatus::ResourceLimit => {
            return Err(Error::ResourceLimit {
                what: "optimal face probe".into(),
                required: outcome.pivots as u128,
                cap: options.max_pivots as u128,
            })
        }
    }
    let value = outcome
        .x
        .iter()
        .zip(&form.cost)
        .fold(T::zero(), |acc, (x, c)| acc.add(&x.mul(c)));
    Ok(if sign < 0 { value.neg() } else { value })
}

/// Minimizes and maximizes `functional` over all optimal solutions by pinning
/// the objective to the baseline optimum with an equality row.
pub fn optimal_face_probe(
    lp: &LinearProgram,
    baseline: &LpSolution,
    functional: &[(usize, Q)],
    options: &SolveOptions,
) -> Result<FaceInterval> {
    let optimum = match &baseline.value {
        Some(MassValue::Exact(v)) if baseline.is_optimal() => v.clone(),
        Some(MassValue::Approx(v)) if baseline.is_optimal() => {
            from_f64(*v).ok_or_else(|| Error::invalid("baseline optimum is not finite"))?
        }
        _ => return Err(Error::invalid("baseline solution is not optimal")),
    };
    Ok(match options.arith {
        Arith::Rational => FaceInterval {
            min: MassValue::Exact(extreme::<Q>(lp, &optimum, functional, 1, options)?),
            max: MassValue::Exact(extreme::<Q>(lp, &optimum, functional, -1, options)?),
        },
        Arith::Float => FaceInterval {
            min: MassValue::Approx(extreme::<f64>(lp, &optimum, functional, 1, options)?),
            max: MassValue::Approx(extreme::<f64>(lp, &optimum, functional, -1, options)?),
        },
    })
}
