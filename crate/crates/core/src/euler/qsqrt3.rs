//! Exact arithmetic in the real quadratic field `ℚ(√3)`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{format_q, serde_q, to_f64, Q};

/// The number `rat + sqrt3 · √3`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QSqrt3 {
    #[serde(with = "serde_q")]
    pub rat: Q,
    #[serde(with = "serde_q")]
    pub sqrt3: Q,
}

impl QSqrt3 {
    pub fn new(rat: Q, sqrt3: Q) -> Self {
        QSqrt3 { rat, sqrt3 }
    }

    pub fn rational(rat: Q) -> Self {
        QSqrt3::new(rat, Q::zero())
    }

    pub fn zero() -> Self {
        QSqrt3::rational(Q::zero())
    }

    /// `√3` itself.
    pub fn sqrt3_unit() -> Self {
        QSqrt3::new(Q::zero(), Q::from_integer(1.into()))
    }

    /// `c / √3` for rational `c`, i.e. `(c/3)·√3`.
    pub fn over_sqrt3(c: Q) -> Self {
        QSqrt3::new(Q::zero(), c / Q::from_integer(3.into()))
    }

    pub fn is_zero(&self) -> bool {
        self.rat.is_zero() && self.sqrt3.is_zero()
    }

    /// The rational value, if the `√3` part vanishes.
    pub fn as_rational(&self) -> Option<&Q> {
        self.sqrt3.is_zero().then_some(&self.rat)
    }

    pub fn scale(&self, c: &Q) -> Self {
        QSqrt3::new(&self.rat * c, &self.sqrt3 * c)
    }

    /// Division by `√3`: `(a + b√3)/√3 = b + (a/3)√3`.
    pub fn div_sqrt3(&self) -> Self {
        QSqrt3::new(self.sqrt3.clone(), &self.rat / Q::from_integer(3.into()))
    }

    /// Exact sign, deciding `a + b√3 ⋛ 0` by comparing `a²` with `3b²` when signs differ.
    pub fn signum(&self) -> Ordering {
        let a = self.rat.cmp(&Q::zero());
        let b = self.sqrt3.cmp(&Q::zero());
        match (a, b) {
            (Ordering::Equal, s) | (s, Ordering::Equal) => s,
            (sa, sb) if sa == sb => sa,
            (sa, _) => {
                let a2 = &self.rat * &self.rat;
                let b2 = &self.sqrt3 * &self.sqrt3 * Q::from_integer(3.into());
                match a2.cmp(&b2) {
                    Ordering::Greater => sa,
                    Ordering::Less => sa.reverse(),
                    Ordering::Equal => Ordering::Equal,
                }
            }
        }
    }

    pub fn abs(&self) -> Self {
        if self.signum() == Ordering::Less {
            -self.clone()
        } else {
            self.clone()
        }
    }

    pub fn to_f64(&self) -> f64 {
        to_f64(&self.rat) + to_f64(&self.sqrt3) * 3f64.sqrt()
    }
}

impl From<Q> for QSqrt3 {
    fn from(value: Q) -> Self {
        QSqrt3::rational(value)
    }
}

impl PartialOrd for QSqrt3 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QSqrt3 {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum()
    }
}

impl Add<&QSqrt3> for &QSqrt3 {
    type Output = QSqrt3;
    fn add(self, rhs: &QSqrt3) -> QSqrt3 {
        QSqrt3::new(&self.rat + &rhs.rat, &self.sqrt3 + &rhs.sqrt3)
    }
}

impl Add for QSqrt3 {
    type Output = QSqrt3;
    fn add(self, rhs: QSqrt3) -> QSqrt3 {
        &self + &rhs
    }
}

impl Sub<&QSqrt3> for &QSqrt3 {
    type Output = QSqrt3;
    fn sub(self, rhs: &QSqrt3) -> QSqrt3 {
        QSqrt3::new(&self.rat - &rhs.rat, &self.sqrt3 - &rhs.sqrt3)
    }
}

impl Sub for QSqrt3 {
    type Output = QSqrt3;
    fn sub(self, rhs: QSqrt3) -> QSqrt3 {
        &self - &rhs
    }
}

impl Mul<&QSqrt3> for &QSqrt3 {
    type Output = QSqrt3;
    fn mul(self, rhs: &QSqrt3) -> QSqrt3 {
        let three = Q::from_integer(3.into());
        QSqrt3::new(
            &self.rat * &rhs.rat + &self.sqrt3 * &rhs.sqrt3 * three,
            &self.rat * &rhs.sqrt3 + &self.sqrt3 * &rhs.rat,
        )
    }
}

impl Mul for QSqrt3 {
    type Output = QSqrt3;
    fn mul(self, rhs: QSqrt3) -> QSqrt3 {
        &self * &rhs
    }
}

impl Neg for QSqrt3 {
    type Output = QSqrt3;
    fn neg(self) -> QSqrt3 {
        QSqrt3::new(-self.rat, -self.sqrt3)
    }
}

impl fmt::Display for QSqrt3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.rat.is_zero(), self.sqrt3.is_zero()) {
            (_, true) => write!(f, "{}", format_q(&self.rat)),
            (true, false) => write!(f, "{}√3", format_q(&self.sqrt3)),
            (false, false) => {
                let sign = if self.sqrt3.is_negative() { '-' } else { '+' };
                write!(
                    f,
                    "{} {sign} {}√3",
                    format_q(&self.rat),
                    format_q(&self.sqrt3.abs())
                )
            }
        }
    }
}
