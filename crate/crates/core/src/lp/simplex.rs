//! Revised primal simplex over a generic scalar.
//!
//! Two phases with artificial variables; the basis inverse is kept densely
//! (the problems here have at most a few dozen rows but thousands of
//! columns). Rows left redundant after phase one keep their artificial
//! variable basic at level zero; such a row has zero entries in every
//! original column of `B⁻¹A`, so it never takes part in a ratio test.

use std::fmt::Debug;
use std::time::{Duration, Instant};

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::rational::{to_f64, Q};

/// Arithmetic needed by the solver. Comparisons against zero carry the
/// scalar's own tolerance (none for rationals).
pub trait LpScalar: Clone + Debug + PartialOrd {
    fn zero() -> Self;
    fn from_q(value: &Q) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn div(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_pos(&self) -> bool;
    fn is_neg(&self) -> bool;
    fn is_zero(&self) -> bool {
        !self.is_pos() && !self.is_neg()
    }
    fn is_one(&self) -> bool;
    fn abs_f64(&self) -> f64;
    /// `(numerator, denominator)` with a positive denominator, when the value
    /// is an exact rational small enough for `i128`.
    fn ratio_parts(&self) -> Option<(i128, i128)> {
        None
    }
    /// Periodic basis reinversion pays off only for inexact scalars.
    const REINVERT_EVERY: Option<usize>;
}

impl LpScalar for Q {
    fn zero() -> Self {
        <Q as Zero>::zero()
    }
    fn from_q(value: &Q) -> Self {
        value.clone()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_pos(&self) -> bool {
        self.is_positive()
    }
    fn is_neg(&self) -> bool {
        self.is_negative()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_one(&self) -> bool {
        One::is_one(self)
    }
    fn abs_f64(&self) -> f64 {
        to_f64(self).abs()
    }
    fn ratio_parts(&self) -> Option<(i128, i128)> {
        Some((self.numer().to_i128()?, self.denom().to_i128()?))
    }
    const REINVERT_EVERY: Option<usize> = None;
}

/// Tolerance for float-mode sign tests.
pub const FLOAT_TOL: f64 = 1e-9;

impl LpScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_q(value: &Q) -> Self {
        to_f64(value)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_pos(&self) -> bool {
        *self > FLOAT_TOL
    }
    fn is_neg(&self) -> bool {
        *self < -FLOAT_TOL
    }
    fn is_one(&self) -> bool {
        *self == 1.0
    }
    fn abs_f64(&self) -> f64 {
        self.abs()
    }
    const REINVERT_EVERY: Option<usize> = Some(50);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PricingRule {
    /// Lowest-index improving column enters; lowest-index basic variable leaves on ties.
    Bland,
    /// Most negative reduced cost, falling back to Bland after a run of degenerate pivots.
    Dantzig,
}

#[derive(Debug, Clone)]
pub(crate) struct StandardForm<T> {
    pub rows: usize,
    /// Sparse columns as `(row, coefficient)` pairs.
    pub columns: Vec<Vec<(usize, T)>>,
    pub rhs: Vec<T>,
    pub cost: Vec<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Termination {
    Optimal,
    Infeasible,
    Unbounded,
    PivotLimit,
    TimeLimit,
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome<T> {
    pub termination: Termination,
    pub x: Vec<T>,
    pub basis: Vec<usize>,
    pub pivots: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct Limits {
    pub pricing: PricingRule,
    pub max_pivots: usize,
    pub time_limit: Option<Duration>,
}

const DEGENERATE_RUN: usize = 50;

/// Integer image of the pricing data: column `j` and its cost scaled by the
/// positive common denominator of the column, so that the sign of a reduced
/// cost is the sign of an `i128` expression once the duals are scaled too.
struct IntPricing {
    columns: Vec<Vec<(usize, i128)>>,
    cost: Vec<i128>,
}

impl IntPricing {
    fn new<T: LpScalar>(columns: &[Vec<(usize, T)>], cost: &[T]) -> Option<Self> {
        let mut int_columns = Vec::with_capacity(columns.len());
        let mut int_cost = Vec::with_capacity(columns.len());
        for (col, c) in columns.iter().zip(cost) {
            let parts: Vec<(usize, (i128, i128))> = col
                .iter()
                .map(|(r, a)| Some((*r, a.ratio_parts()?)))
                .collect::<Option<_>>()?;
            let c = c.ratio_parts()?;
            let scale = parts
                .iter()
                .try_fold(c.1, |acc, (_, (_, d))| lcm_checked(acc, *d))?;
            int_columns.push(
                parts
                    .iter()
                    .map(|(r, (n, d))| Some((*r, n.checked_mul(scale / d)?)))
                    .collect::<Option<_>>()?,
            );
            int_cost.push(c.0.checked_mul(scale / c.1)?);
        }
        Some(IntPricing {
            columns: int_columns,
            cost: int_cost,
        })
    }

    /// Duals over a common denominator `(Y, D)` with `y_i = Y_i / D`.
    fn scale_duals<T: LpScalar>(y: &[T]) -> Option<(Vec<i128>, i128)> {
        let parts: Vec<(i128, i128)> = y.iter().map(T::ratio_parts).collect::<Option<_>>()?;
        let denom = parts.iter().try_fold(1i128, |acc, (_, d)| lcm_checked(acc, *d))?;
        let scaled = parts
            .iter()
            .map(|(n, d)| n.checked_mul(denom / d))
            .collect::<Option<_>>()?;
        Some((scaled, denom))
    }

    /// Sign of `cost_j - y · column_j`, or `None` on overflow.
    fn sign(&self, j: usize, duals: &(Vec<i128>, i128)) -> Option<std::cmp::Ordering> {
        let (y, denom) = duals;
        let mut acc = self.cost[j].checked_mul(*denom)?;
        for (r, a) in &self.columns[j] {
            acc = acc.checked_sub(a.checked_mul(y[*r])?)?;
        }
        Some(acc.cmp(&0))
    }
}

fn lcm_checked(a: i128, b: i128) -> Option<i128> {
    let g = a.gcd(&b);
    (a / g).checked_mul(b)
}

struct Tableau<T: LpScalar> {
    n: usize,
    m: usize,
    rhs: Vec<T>,
    binv: Vec<Vec<T>>,
    xb: Vec<T>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    pivots: usize,
    since_reinvert: usize,
    /// Sign-adjusted original columns.
    signed_columns: Vec<Vec<(usize, T)>>,
}

impl<T: LpScalar> Tableau<T> {
    fn new(form: &StandardForm<T>) -> Self {
        let m = form.rows;
        let n = form.columns.len();
        let flip: Vec<bool> = form.rhs.iter().map(|b| b.is_neg()).collect();
        let rhs: Vec<T> = form
            .rhs
            .iter()
            .zip(&flip)
            .map(|(b, &f)| if f { b.neg() } else { b.clone() })
            .collect();
        let binv = (0..m)
            .map(|r| {
                (0..m)
                    .map(|c| if r == c { T::from_q(&Q::one()) } else { T::zero() })
                    .collect()
            })
            .collect();
        let mut is_basic = vec![false; n + m];
        for slot in is_basic.iter_mut().skip(n) {
            *slot = true;
        }
        let signed_columns = form
            .columns
            .iter()
            .map(|col| {
                col.iter()
                    .map(|(r, a)| (*r, if flip[*r] { a.neg() } else { a.clone() }))
                    .collect()
            })
            .collect();
        Tableau {
            n,
            m,
            xb: rhs.clone(),
            rhs,
            binv,
            basis: (n..n + m).collect(),
            is_basic,
            pivots: 0,
            since_reinvert: 0,
            signed_columns,
        }
    }

    /// Column `j` of the sign-adjusted constraint matrix `[A | I]`.
    fn column(&self, j: usize) -> Vec<(usize, T)> {
        if j >= self.n {
            return vec![(j - self.n, T::from_q(&Q::one()))];
        }
        self.signed_columns[j].clone()
    }

    fn ftran(&self, j: usize) -> Vec<T> {
        let col = self.column(j);
        (0..self.m)
            .map(|r| {
                col.iter().fold(T::zero(), |acc, (i, a)| {
                    let b = &self.binv[r][*i];
                    if b.is_zero() {
                        acc
                    } else if a.is_one() {
                        acc.add(b)
                    } else {
                        acc.add(&b.mul(a))
                    }
                })
            })
            .collect()
    }

    fn duals(&self, cost: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.m];
        for (r, &bv) in self.basis.iter().enumerate() {
            let cb = &cost[bv];
            if cb.is_zero() {
                continue;
            }
            for (i, slot) in y.iter_mut().enumerate() {
                let b = &self.binv[r][i];
                if !b.is_zero() {
                    *slot = slot.add(&cb.mul(b));
                }
            }
        }
        y
    }

    fn reduced_cost(&self, j: usize, cost: &[T], y: &[T]) -> T {
        self.signed_columns[j].iter().fold(cost[j].clone(), |acc, (i, a)| {
            if a.is_one() {
                acc.sub(&y[*i])
            } else {
                acc.sub(&y[*i].mul(a))
            }
        })
    }

    fn pivot(&mut self, r: usize, j: usize, u: &[T]) {
        let piv = u[r].clone();
        for v in self.binv[r].iter_mut() {
            if !v.is_zero() {
                *v = v.div(&piv);
            }
        }
        self.xb[r] = self.xb[r].div(&piv);
        let pivot_row = self.binv[r].clone();
        let pivot_x = self.xb[r].clone();
        for (i, ui) in u.iter().enumerate() {
            if i == r || ui.is_zero() {
                continue;
            }
            for (v, p) in self.binv[i].iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v = v.sub(&ui.mul(p));
                }
            }
            self.xb[i] = self.xb[i].sub(&ui.mul(&pivot_x));
        }
        let old = self.basis[r];
        self.is_basic[old] = false;
        self.is_basic[j] = true;
        self.basis[r] = j;
        self.pivots += 1;
        self.since_reinvert += 1;
        if let Some(every) = T::REINVERT_EVERY {
            if self.since_reinvert >= every {
                self.reinvert();
            }
        }
    }

    /// Rebuilds `B⁻¹` and `x_B` from scratch by Gauss-Jordan elimination.
    fn reinvert(&mut self) {
        let m = self.m;
        let mut b = vec![vec![T::zero(); m]; m];
        for (c, &bv) in self.basis.iter().enumerate() {
            for (r, a) in self.column(bv) {
                b[r][c] = a;
            }
        }
        let mut inv: Vec<Vec<T>> = (0..m)
            .map(|r| {
                (0..m)
                    .map(|c| if r == c { T::from_q(&Q::one()) } else { T::zero() })
                    .collect()
            })
            .collect();
        for col in 0..m {
            let Some(p) = (col..m).max_by(|&a, &c| {
                b[a][col]
                    .abs_f64()
                    .partial_cmp(&b[c][col].abs_f64())
                    .unwrap_or(std::cmp::Ordering::Equal)
            }) else {
                return;
            };
            if b[p][col].abs_f64() == 0.0 {
                // Singular in floating point; keep the product-form inverse.
                return;
            }
            b.swap(p, col);
            inv.swap(p, col);
            let piv = b[col][col].clone();
            for k in 0..m {
                b[col][k] = b[col][k].div(&piv);
                inv[col][k] = inv[col][k].div(&piv);
            }
            for r in 0..m {
                if r == col {
                    continue;
                }
                let f = b[r][col].clone();
                if f.abs_f64() == 0.0 {
                    continue;
                }
                for k in 0..m {
                    b[r][k] = b[r][k].sub(&f.mul(&b[col][k]));
                    inv[r][k] = inv[r][k].sub(&f.mul(&inv[col][k]));
                }
            }
        }
        // inv is B⁻¹ with rows indexed by basis position.
        self.binv = inv;
        self.xb = (0..m)
            .map(|r| {
                (0..m).fold(T::zero(), |acc, i| acc.add(&self.binv[r][i].mul(&self.rhs[i])))
            })
            .collect();
        self.since_reinvert = 0;
    }

    fn objective(&self, cost: &[T]) -> T {
        self.basis
            .iter()
            .zip(&self.xb)
            .fold(T::zero(), |acc, (&bv, x)| acc.add(&cost[bv].mul(x)))
    }

    /// Runs simplex iterations for `cost` over entering candidates `0..allowed`.
    fn run(&mut self, cost: &[T], allowed: usize, limits: &Limits, start: Instant) -> Termination {
        let mut degenerate_run = 0usize;
        let int_pricing = IntPricing::new(&self.signed_columns[..allowed], &cost[..allowed]);
        loop {
            if self.pivots >= limits.max_pivots {
                return Termination::PivotLimit;
            }
            if let Some(limit) = limits.time_limit {
                if start.elapsed() > limit {
                    return Termination::TimeLimit;
                }
            }
            let y = self.duals(cost);
            let use_bland = match limits.pricing {
                PricingRule::Bland => true,
                PricingRule::Dantzig => degenerate_run >= DEGENERATE_RUN,
            };
            let int_duals = if use_bland {
                int_pricing.as_ref().and_then(|_| IntPricing::scale_duals(&y))
            } else {
                None
            };
            let mut entering: Option<(usize, T)> = None;
            for j in 0..allowed {
                if self.is_basic[j] {
                    continue;
                }
                if let (Some(ip), Some(duals)) = (&int_pricing, &int_duals) {
                    match ip.sign(j, duals) {
                        Some(std::cmp::Ordering::Less) => {}
                        Some(_) => continue,
                        None => {}
                    }
                }
                let d = self.reduced_cost(j, cost, &y);
                if !d.is_neg() {
                    continue;
                }
                if use_bland {
                    entering = Some((j, d));
                    break;
                }
                match &entering {
                    Some((_, best)) if *best <= d => {}
                    _ => entering = Some((j, d)),
                }
            }
            let Some((j, _)) = entering else {
                return Termination::Optimal;
            };
            let u = self.ftran(j);
            let mut leave: Option<(usize, T)> = None;
            for (r, ur) in u.iter().enumerate() {
                if !ur.is_pos() {
                    continue;
                }
                let ratio = self.xb[r].div(ur);
                match &leave {
                    None => leave = Some((r, ratio)),
                    Some((lr, best)) => {
                        let better = ratio < *best
                            || (!ratio.sub(best).is_pos()
                                && !ratio.sub(best).is_neg()
                                && self.basis[r] < self.basis[*lr]);
                        if better {
                            leave = Some((r, ratio));
                        }
                    }
                }
            }
            let Some((r, step)) = leave else {
                return Termination::Unbounded;
            };
            if step.is_pos() {
                degenerate_run = 0;
            } else {
                degenerate_run += 1;
            }
            self.pivot(r, j, &u);
        }
    }

    /// Pivots basic artificials at level zero out of the basis where possible.
    fn drive_out_artificials(&mut self) {
        for r in 0..self.m {
            if self.basis[r] < self.n {
                continue;
            }
            let row = &self.binv[r];
            let candidate = (0..self.n).find(|&j| {
                !self.is_basic[j]
                    && !self.signed_columns[j]
                        .iter()
                        .fold(T::zero(), |acc, (i, a)| acc.add(&row[*i].mul(a)))
                        .is_zero()
            });
            if let Some(j) = candidate {
                let u = self.ftran(j);
                self.pivot(r, j, &u);
            }
        }
    }
}

pub(crate) fn solve<T: LpScalar>(form: &StandardForm<T>, limits: &Limits) -> Outcome<T> {
    let start = Instant::now();
    let mut t = Tableau::new(form);
    let (n, m) = (t.n, t.m);

    let mut phase1 = vec![T::zero(); n + m];
    for c in phase1.iter_mut().skip(n) {
        *c = T::from_q(&Q::one());
    }
    let finish = |t: &Tableau<T>, termination| {
        let mut x = vec![T::zero(); n];
        for (r, &bv) in t.basis.iter().enumerate() {
            if bv < n {
                x[bv] = t.xb[r].clone();
            }
        }
        Outcome {
            termination,
            x,
            basis: t.basis.iter().copied().filter(|&b| b < n).collect(),
            pivots: t.pivots,
        }
    };

    match t.run(&phase1, n, limits, start) {
        Termination::Optimal => {}
        other => return finish(&t, other),
    }
    if t.objective(&phase1).is_pos() {
        return finish(&t, Termination::Infeasible);
    }
    t.drive_out_artificials();

    let mut phase2 = form.cost.clone();
    phase2.extend(std::iter::repeat_n(T::zero(), m));
    let termination = t.run(&phase2, n, limits, start);
    finish(&t, termination)
}
