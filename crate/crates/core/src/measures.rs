//! Sparse transport plans on path space.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::costs::{CostFunction, CostValue};
use crate::error::{Error, Result};
use crate::grid::{DiscretePath, EndpointMap, SpatialGrid, TimeGrid};
use crate::rational::{format_q, from_f64, parse_q, qi, to_f64, Q};

/// Atoms lighter than this are dropped from float-mode plans.
pub const FLOAT_PRUNE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Arith {
    #[default]
    Rational,
    Float,
}

impl fmt::Display for Arith {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Arith::Rational => "rational",
            Arith::Float => "float",
        })
    }
}

/// A mass or cost: exact rational, or binary float in float-mode plans.
#[derive(Debug, Clone, PartialEq)]
pub enum MassValue {
    Exact(Q),
    Approx(f64),
}

impl MassValue {
    pub fn zero(arith: Arith) -> Self {
        match arith {
            Arith::Rational => MassValue::Exact(Q::zero()),
            Arith::Float => MassValue::Approx(0.0),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            MassValue::Exact(v) => to_f64(v),
            MassValue::Approx(v) => *v,
        }
    }

    pub fn exact(&self) -> Option<&Q> {
        match self {
            MassValue::Exact(v) => Some(v),
            MassValue::Approx(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            MassValue::Exact(v) => v.is_zero(),
            MassValue::Approx(v) => *v == 0.0,
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            MassValue::Exact(v) => v.is_negative(),
            MassValue::Approx(v) => *v < 0.0,
        }
    }

    pub fn to_arith(&self, arith: Arith) -> MassValue {
        match (arith, self) {
            (Arith::Rational, MassValue::Approx(v)) => {
                MassValue::Exact(from_f64(*v).unwrap_or_else(Q::zero))
            }
            (Arith::Float, MassValue::Exact(v)) => MassValue::Approx(to_f64(v)),
            _ => self.clone(),
        }
    }

    fn add(&self, other: &MassValue) -> MassValue {
        match (self, other) {
            (MassValue::Exact(a), MassValue::Exact(b)) => MassValue::Exact(a + b),
            _ => MassValue::Approx(self.to_f64() + other.to_f64()),
        }
    }

    fn scale(&self, factor: &Q) -> MassValue {
        match self {
            MassValue::Exact(a) => MassValue::Exact(a * factor),
            MassValue::Approx(a) => MassValue::Approx(a * to_f64(factor)),
        }
    }

    pub(crate) fn sum<'a>(arith: Arith, values: impl IntoIterator<Item = &'a MassValue>) -> Self {
        values
            .into_iter()
            .fold(MassValue::zero(arith), |acc, v| acc.add(v))
    }
}

impl fmt::Display for MassValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MassValue::Exact(v) => f.write_str(&format_q(v)),
            MassValue::Approx(v) => f.write_str(&format_float(*v)),
        }
    }
}

/// Twelve significant digits, trailing zeros trimmed.
pub fn format_float(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0".into();
    }
    let s = format!("{v:.11e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let fixed = format!("{v:.decimals$}");
        if fixed.contains('.') {
            fixed.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            fixed
        }
    } else {
        let m = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{m}e{exp}")
    }
}

/// Per-grid-point masses of one time slice.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalVector(pub Vec<MassValue>);

impl MarginalVector {
    pub fn entries(&self) -> &[MassValue] {
        &self.0
    }

    pub fn total(&self, arith: Arith) -> MassValue {
        MassValue::sum(arith, &self.0)
    }

    /// Exact entries, if the plan was rational.
    pub fn exact(&self) -> Option<Vec<Q>> {
        self.0.iter().map(|m| m.exact().cloned()).collect()
    }
}

/// Result of a Monge-form test at one time index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MongeCheck {
    pub monge: bool,
    /// `maps[k][x]`: grid index at time `k` of the unique path through grid point
    /// `x` at the tested time, `None` where `x` carries no mass. Present iff `monge`.
    pub maps: Option<Vec<Vec<Option<usize>>>>,
}

/// A probability measure on paths, stored as a sparse atom map.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    grid: SpatialGrid,
    timegrid: TimeGrid,
    arith: Arith,
    atoms: BTreeMap<DiscretePath, MassValue>,
}

impl TransportPlan {
    /// Builds a plan, merging repeated paths and dropping zero atoms.
    ///
    /// Float-mode plans are pruned below [`FLOAT_PRUNE`] and renormalized to unit mass.
    pub fn new(
        grid: SpatialGrid,
        timegrid: TimeGrid,
        arith: Arith,
        atoms: impl IntoIterator<Item = (DiscretePath, MassValue)>,
    ) -> Result<Self> {
        let mut merged: BTreeMap<DiscretePath, MassValue> = BTreeMap::new();
        for (path, mass) in atoms {
            path.validate(&grid, timegrid.len())?;
            let mass = mass.to_arith(arith);
            if mass.is_negative() {
                return Err(Error::InconsistentPlan(format!("negative mass on path {path}")));
            }
            let entry = merged.entry(path).or_insert_with(|| MassValue::zero(arith));
            *entry = entry.add(&mass);
        }
        match arith {
            Arith::Rational => merged.retain(|_, m| !m.is_zero()),
            Arith::Float => merged.retain(|_, m| m.to_f64() >= FLOAT_PRUNE),
        }
        let total = MassValue::sum(arith, merged.values());
        match (&total, arith) {
            (MassValue::Exact(t), _) => {
                if *t != qi(1) {
                    return Err(Error::InconsistentPlan(format!(
                        "total mass is {}, expected 1",
                        format_q(t)
                    )));
                }
            }
            (MassValue::Approx(t), _) => {
                if (t - 1.0).abs() > 1e-9 {
                    return Err(Error::InconsistentPlan(format!(
                        "total mass is {t}, expected 1"
                    )));
                }
                for m in merged.values_mut() {
                    *m = MassValue::Approx(m.to_f64() / t);
                }
            }
        }
        Ok(TransportPlan {
            grid,
            timegrid,
            arith,
            atoms: merged,
        })
    }

    /// Exact plan from rational masses.
    pub fn from_rational(
        grid: SpatialGrid,
        timegrid: TimeGrid,
        atoms: impl IntoIterator<Item = (DiscretePath, Q)>,
    ) -> Result<Self> {
        TransportPlan::new(
            grid,
            timegrid,
            Arith::Rational,
            atoms.into_iter().map(|(p, m)| (p, MassValue::Exact(m))),
        )
    }

    /// Convex combination `Σ w_k γ_k` of plans on the same grids.
    pub fn mixture(parts: &[(Q, &TransportPlan)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::invalid("empty mixture"))?
            .1;
        let arith = if parts.iter().all(|(_, p)| p.arith == Arith::Rational) {
            Arith::Rational
        } else {
            Arith::Float
        };
        let mut atoms = Vec::new();
        for (weight, plan) in parts {
            if plan.grid != first.grid || plan.timegrid != first.timegrid {
                return Err(Error::invalid("mixture components live on different grids"));
            }
            atoms.extend(
                plan.atoms
                    .iter()
                    .map(|(path, m)| (path.clone(), m.scale(weight))),
            );
        }
        TransportPlan::new(first.grid.clone(), first.timegrid.clone(), arith, atoms)
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn timegrid(&self) -> &TimeGrid {
        &self.timegrid
    }

    pub fn arith(&self) -> Arith {
        self.arith
    }

    pub fn atoms(&self) -> &BTreeMap<DiscretePath, MassValue> {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn mass_of(&self, path: &DiscretePath) -> MassValue {
        self.atoms
            .get(path)
            .cloned()
            .unwrap_or_else(|| MassValue::zero(self.arith))
    }

    pub fn total_mass(&self) -> MassValue {
        MassValue::sum(self.arith, self.atoms.values())
    }

    fn check_time(&self, i: usize) -> Result<()> {
        if i >= self.timegrid.len() {
            return Err(Error::invalid(format!(
                "time index {i} out of range 0..={}",
                self.timegrid.steps()
            )));
        }
        Ok(())
    }

    pub fn marginal(&self, i: usize) -> Result<MarginalVector> {
        self.check_time(i)?;
        let mut out = vec![MassValue::zero(self.arith); self.grid.len()];
        for (path, mass) in &self.atoms {
            let slot = &mut out[path.0[i]];
            *slot = slot.add(mass);
        }
        Ok(MarginalVector(out))
    }

    /// Whether two distinct charged paths share a grid point at time `i`.
    pub fn is_mass_splitting(&self, i: usize) -> Result<bool> {
        self.check_time(i)?;
        let mut seen = vec![false; self.grid.len()];
        for path in self.atoms.keys() {
            if std::mem::replace(&mut seen[path.0[i]], true) {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Splitting flag for every time index.
    pub fn splitting_profile(&self) -> Vec<bool> {
        (0..self.timegrid.len())
            .map(|i| self.is_mass_splitting(i).expect("index in range"))
            .collect()
    }

    pub fn is_everywhere_mass_splitting(&self) -> bool {
        self.splitting_profile().into_iter().all(|s| s)
    }

    pub fn is_monge(&self, i: usize) -> Result<MongeCheck> {
        self.check_time(i)?;
        let times = self.timegrid.len();
        let mut maps: Vec<Vec<Option<usize>>> = vec![vec![None; self.grid.len()]; times];
        for path in self.atoms.keys() {
            let x = path.0[i];
            if maps[i][x].is_some() {
                // A second path through (x, i): distinct paths never agree everywhere.
                return Ok(MongeCheck {
                    monge: false,
                    maps: None,
                });
            }
            for (k, &y) in path.0.iter().enumerate() {
                maps[k][x] = Some(y);
            }
        }
        Ok(MongeCheck {
            monge: true,
            maps: Some(maps),
        })
    }

    /// Drops the final coordinate of every atom, checking `ω_N = g*(ω_0)`.
    pub fn reduce(&self, endpoint: &EndpointMap) -> Result<TransportPlan> {
        endpoint.check_grid(&self.grid)?;
        let short = self.timegrid.truncated().ok_or_else(|| {
            Error::invalid("reduction needs at least two time steps")
        })?;
        let last = self.timegrid.steps();
        let mut atoms = Vec::with_capacity(self.atoms.len());
        for (path, mass) in &self.atoms {
            if path.0[last] != endpoint.apply(path.0[0]) {
                return Err(Error::InconsistentPlan(format!(
                    "path {path} violates the endpoint condition"
                )));
            }
            atoms.push((DiscretePath(path.0[..last].to_vec()), mass.clone()));
        }
        TransportPlan::new(self.grid.clone(), short, self.arith, atoms)
    }

    /// Appends `g*(ω_0)` to every atom; `full_timegrid` adds the final time point.
    pub fn extend(&self, endpoint: &EndpointMap, full_timegrid: &TimeGrid) -> Result<TransportPlan> {
        endpoint.check_grid(&self.grid)?;
        if !full_timegrid.extends(&self.timegrid) {
            return Err(Error::invalid(
                "the full time grid must extend the plan's time grid by one point",
            ));
        }
        let atoms = self.atoms.iter().map(|(path, mass)| {
            let mut full = path.0.clone();
            full.push(endpoint.apply(path.0[0]));
            (DiscretePath(full), mass.clone())
        });
        TransportPlan::new(self.grid.clone(), full_timegrid.clone(), self.arith, atoms)
    }

    /// `Σ_ω c(ω) γ(ω)`, exact in rational mode.
    pub fn cost(&self, cost: &CostFunction) -> Result<MassValue> {
        let mut total = MassValue::zero(self.arith);
        for (path, mass) in &self.atoms {
            match cost.evaluate(&self.grid, &path.0)? {
                CostValue::Finite(c) => total = total.add(&mass.scale(&c)),
                CostValue::Infinite => {
                    return Err(Error::invalid(format!(
                        "cost is infinite on charged path {path}"
                    )))
                }
            }
        }
        Ok(total)
    }

    pub fn to_json(&self) -> PlanJson {
        PlanJson {
            grid: self.grid.clone(),
            times: self.timegrid.clone(),
            arith: self.arith,
            atoms: self
                .atoms
                .iter()
                .map(|(path, mass)| AtomJson {
                    path: path.0.clone(),
                    mass: match mass {
                        MassValue::Exact(v) => serde_json::Value::String(format_q(v)),
                        MassValue::Approx(v) => serde_json::Value::from(*v),
                    },
                })
                .collect(),
        }
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("plan serializes");
        s.push('\n');
        s
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: PlanJson = serde_json::from_str(text).map_err(|e| {
            Error::Parse(format!("line {} column {}: {e}", e.line(), e.column()))
        })?;
        TransportPlan::try_from(raw)
    }
}

/// On-disk plan layout; atoms are written in lexicographic path order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanJson {
    pub grid: SpatialGrid,
    pub times: TimeGrid,
    pub arith: Arith,
    pub atoms: Vec<AtomJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AtomJson {
    pub path: Vec<usize>,
    pub mass: serde_json::Value,
}

impl TryFrom<PlanJson> for TransportPlan {
    type Error = Error;

    fn try_from(raw: PlanJson) -> Result<Self> {
        let atoms = raw
            .atoms
            .into_iter()
            .map(|atom| {
                let mass = match (&atom.mass, raw.arith) {
                    (serde_json::Value::String(s), _) => MassValue::Exact(parse_q(s)?),
                    (serde_json::Value::Number(n), Arith::Float) => {
                        MassValue::Approx(n.as_f64().unwrap_or(f64::NAN))
                    }
                    (serde_json::Value::Number(n), Arith::Rational) => {
                        let int = n.as_i64().ok_or_else(|| {
                            Error::Parse(format!("rational plan mass {n} must be a \"p/q\" string"))
                        })?;
                        MassValue::Exact(qi(int))
                    }
                    (other, _) => return Err(Error::Parse(format!("bad mass {other}"))),
                };
                Ok((DiscretePath(atom.path), mass))
            })
            .collect::<Result<Vec<_>>>()?;
        TransportPlan::new(raw.grid, raw.times, raw.arith, atoms)
    }
}

/// Largest absolute deviation of the plan's marginals from `1/|Ω|`.
pub fn marginal_residual(plan: &TransportPlan) -> f64 {
    let target = 1.0 / plan.grid().len() as f64;
    (0..plan.timegrid().len())
        .flat_map(|i| plan.marginal(i).expect("in range").0)
        .map(|m| (m.to_f64() - target).abs())
        .fold(0.0, f64::max)
}

/// Exact check that every marginal equals `1/|Ω|` per point.
pub fn has_uniform_marginals(plan: &TransportPlan) -> bool {
    let target = Q::new(1.into(), plan.grid().len().into());
    (0..plan.timegrid().len()).all(|i| {
        plan.marginal(i)
            .expect("in range")
            .0
            .iter()
            .all(|m| m.exact() == Some(&target))
    })
}

impl MassValue {
    /// Integer multiple of `unit`, if exact.
    pub fn multiple_of(&self, unit: &Q) -> Option<i64> {
        let ratio = self.exact()? / unit;
        ratio.is_integer().then(|| ratio.to_integer().to_i64()).flatten()
    }
}
