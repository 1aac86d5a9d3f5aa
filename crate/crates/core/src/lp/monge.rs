//! Exhaustive search over Monge (non-splitting) plans with uniform marginals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use crate::costs::{CostFunction, CostValue};
use crate::error::{Error, Result};
use crate::grid::{checked_pow, index_tuples, DiscretePath, EndpointMap, SpatialGrid, TimeGrid};
use crate::rational::Q;

/// Default cap on the number of candidate Monge plans.
pub const DEFAULT_MONGE_CAP: u128 = 50_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct MongeOptimum {
    /// `(1/|Ω|) Σ_x c(path from x)`.
    pub value: Q,
    /// One path per starting grid point, in start order.
    pub paths: Vec<DiscretePath>,
    pub candidates: u128,
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                go(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Enumerates every plan that sends start point `x` along a single path,
/// with each intermediate time slice a permutation of the grid and the final
/// slice given by `endpoint`, and returns the cheapest one (first in
/// lexicographic order of the permutation sequence on ties).
pub fn monge_bruteforce(
    grid: &SpatialGrid,
    timegrid: &TimeGrid,
    cost: &CostFunction,
    endpoint: &EndpointMap,
    cap: u128,
) -> Result<MongeOptimum> {
    endpoint.check_grid(grid)?;
    let k = grid.len();
    let steps = timegrid.steps();
    let perms = permutations(k);
    let candidates = checked_pow(perms.len(), steps - 1);
    if candidates > cap {
        return Err(Error::ResourceLimit {
            what: "Monge brute force".into(),
            required: candidates,
            cap,
        });
    }
    let table_size = checked_pow(k, steps + 1);
    if table_size > cap {
        return Err(Error::ResourceLimit {
            what: "Monge path-cost table".into(),
            required: table_size,
            cap,
        });
    }

    // Path costs scaled to integers by a common denominator, indexed by base-k path code.
    let mut exact = Vec::with_capacity(table_size as usize);
    for path in index_tuples(k, steps + 1) {
        exact.push(match cost.evaluate(grid, &path)? {
            CostValue::Finite(v) => Some(v),
            CostValue::Infinite => None,
        });
    }
    let denom = exact
        .iter()
        .flatten()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let scaled: Vec<Option<i128>> = exact
        .iter()
        .map(|v| {
            v.as_ref().map(|v| {
                (v.numer() * (&denom / v.denom()))
                    .to_i128()
                    .ok_or_else(|| Error::Internal("scaled path cost overflows i128".into()))
            })
            .transpose()
        })
        .collect::<Result<_>>()?;

    let mut layers = vec![0usize; steps.saturating_sub(1)];
    let mut best: Option<(i128, Vec<usize>)> = None;
    for choice in index_tuples(perms.len(), steps - 1) {
        layers.copy_from_slice(&choice);
        let mut total: i128 = 0;
        let mut feasible = true;
        for x in 0..k {
            let mut code = x;
            for &layer in &layers {
                code = code * k + perms[layer][x];
            }
            code = code * k + endpoint.apply(x);
            match scaled[code] {
                Some(c) => total += c,
                None => {
                    feasible = false;
                    break;
                }
            }
        }
        if feasible && best.as_ref().is_none_or(|(b, _)| total < *b) {
            best = Some((total, layers.clone()));
        }
    }
    let (total, layers) =
        best.ok_or_else(|| Error::invalid("every Monge plan has infinite cost"))?;
    let paths = (0..k)
        .map(|x| {
            let mut p = vec![x];
            p.extend(layers.iter().map(|&l| perms[l][x]));
            p.push(endpoint.apply(x));
            DiscretePath(p)
        })
        .collect();
    Ok(MongeOptimum {
        value: Q::new(BigInt::from(total), denom * BigInt::from(k)),
        paths,
        candidates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qi;

    #[test]
    fn three_point_monge_optimum() {
        let g = SpatialGrid::three_point();
        let flip = EndpointMap::flip(&g).unwrap();
        for steps in 3..=6 {
            let tg = TimeGrid::unit(steps).unwrap();
            let cost = CostFunction::Action { timegrid: tg.clone() };
            let best = monge_bruteforce(&g, &tg, &cost, &flip, DEFAULT_MONGE_CAP).unwrap();
            assert_eq!(best.value, qi(2), "N={steps}");
            assert_eq!(best.candidates, 6u128.pow(steps as u32 - 1));
        }
    }

    #[test]
    fn two_point_identity() {
        let g = SpatialGrid::uniform_symmetric(2).unwrap();
        let tg = TimeGrid::unit(1).unwrap();
        let cost = CostFunction::Action { timegrid: tg.clone() };
        let best = monge_bruteforce(&g, &tg, &cost, &EndpointMap::identity(2), 10).unwrap();
        assert_eq!(best.value, qi(0));
        assert_eq!(best.paths, vec![DiscretePath(vec![0, 0]), DiscretePath(vec![1, 1])]);
    }

    #[test]
    fn cap_is_enforced() {
        let g = SpatialGrid::three_point();
        let tg = TimeGrid::unit(6).unwrap();
        let cost = CostFunction::Action { timegrid: tg.clone() };
        let flip = EndpointMap::flip(&g).unwrap();
        assert!(matches!(
            monge_bruteforce(&g, &tg, &cost, &flip, 1000),
            Err(Error::ResourceLimit { required: 7776, .. })
        ));
    }
}
