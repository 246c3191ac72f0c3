//! Winding-number arithmetic in `π₁(T¹O) ≅ ℤ/(m+n)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::profile::{gcd, OrbifoldSignature};

/// Class of a lifted closed curve, `0 ≤ value < m+n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct HomotopyClass {
    pub value: u32,
    pub order: u32,
}

impl HomotopyClass {
    pub fn is_contractible(self) -> bool {
        self.value == 0
    }

    /// Class of the `j`-fold iterate.
    pub fn iterate(self, j: u32) -> Self {
        let value = (u64::from(self.value) * u64::from(j) % u64::from(self.order)) as u32;
        Self { value, ..self }
    }
}

impl std::ops::Add for HomotopyClass {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        debug_assert_eq!(self.order, rhs.order);
        Self { value: (self.value + rhs.value) % self.order, order: self.order }
    }
}

pub fn class_of_winding(w: i64, sig: OrbifoldSignature) -> HomotopyClass {
    let order = sig.order();
    HomotopyClass { value: w.rem_euclid(i64::from(order)) as u32, order }
}

/// Rounds a numerically computed winding to an integer if it lies within
/// `tol` of one.
pub fn integral_winding(w: f64, tol: f64) -> Option<i64> {
    let k = w.round();
    ((w - k).abs() <= tol).then_some(k as i64)
}

/// Whether `c` lies in the unique subgroup of order `k`.
pub fn in_subgroup_of_order(c: HomotopyClass, k: u32) -> Result<bool> {
    if k == 0 || !c.order.is_multiple_of(k) {
        return Err(Error::NotADivisor { k, order: c.order });
    }
    Ok(c.value.is_multiple_of(c.order / k))
}

/// Divisors of `n` in increasing order.
pub fn divisors(n: u32) -> Vec<u32> {
    (1..=n).filter(|d| n.is_multiple_of(*d)).collect()
}

/// Iterations after which a simple curve not enclosing the cone points
/// becomes contractible.
pub fn min_contractible_iterate_nonenclosing(sig: OrbifoldSignature) -> u32 {
    sig.order() / gcd(sig.m(), sig.n())
}
