//! Integer-order Bessel functions of the first kind.
//!
//! Values come from Miller's backward recurrence
//! `J_{k-1}(x) = (2k/x) J_k(x) - J_{k+1}(x)`, started well above both the
//! requested order and `|x|` and normalized with `J_0 + 2 Σ J_{2k} = 1`.
//! Negative orders and arguments are folded onto `n, x ≥ 0` symbolically.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest supported `|x|`.
pub const MAX_ARGUMENT: f64 = 1e6;

/// Below this argument the power series converges in a handful of terms and
/// the recurrence coefficients `2k/x` would overflow.
const SERIES_CUTOFF: f64 = 1e-3;

/// `J_n(x)` for orders `min_order..=max_order` at one argument.
#[derive(Debug, Clone, PartialEq)]
pub struct BesselRow<T> {
    argument: T,
    min_order: i64,
    values: Vec<T>,
}

impl<T: Real> BesselRow<T> {
    pub fn argument(&self) -> T {
        self.argument
    }

    pub fn min_order(&self) -> i64 {
        self.min_order
    }

    pub fn max_order(&self) -> i64 {
        self.min_order + self.values.len() as i64 - 1
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn get(&self, order: i64) -> Option<T> {
        let offset = order.checked_sub(self.min_order)?;
        usize::try_from(offset).ok().and_then(|i| self.values.get(i).copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, T)> + '_ {
        (self.min_order..).zip(self.values.iter().copied())
    }
}

fn check_argument<T: Real>(x: T) -> Result<()> {
    if x.is_finite() && x.abs() <= T::lit(MAX_ARGUMENT) {
        Ok(())
    } else {
        Err(Error::Domain(x.to_f64().unwrap_or(f64::NAN)))
    }
}

fn parity_sign<T: Real>(n: u64) -> T {
    if n.is_multiple_of(2) {
        T::one()
    } else {
        -T::one()
    }
}

/// `J_order(x)`.
pub fn bessel_j<T: Real>(order: i64, x: T) -> Result<T> {
    check_argument(x)?;
    let n = order.unsigned_abs();
    let value = nonnegative_orders(n, n, x.abs())[0];
    // J_{-n}(x) = (-1)^n J_n(x) and J_n(-x) = (-1)^n J_n(x)
    let flips = (order < 0) != (x < T::zero());
    Ok(if flips { parity_sign::<T>(n) * value } else { value })
}

/// `J_n(x)` for every `n` in `min_order..=max_order`, from one recurrence.
pub fn bessel_row<T: Real>(min_order: i64, max_order: i64, x: T) -> Result<BesselRow<T>> {
    if min_order > max_order {
        return Err(Error::invalid("order range", format!("{min_order} > {max_order}")));
    }
    check_argument(x)?;
    let top = min_order.unsigned_abs().max(max_order.unsigned_abs());
    let bottom = if min_order <= 0 && max_order >= 0 {
        0
    } else {
        min_order.unsigned_abs().min(max_order.unsigned_abs())
    };
    let positive = nonnegative_orders(bottom, top, x.abs());
    let negative_x = x < T::zero();
    let values = (min_order..=max_order)
        .map(|order| {
            let n = order.unsigned_abs();
            let v = positive[(n - bottom) as usize];
            if (order < 0) != negative_x {
                parity_sign::<T>(n) * v
            } else {
                v
            }
        })
        .collect();
    Ok(BesselRow { argument: x, min_order, values })
}

/// `J_n(x)` for `n = lo..=hi` and `x ≥ 0`.
fn nonnegative_orders<T: Real>(lo: u64, hi: u64, x: T) -> Vec<T> {
    debug_assert!(lo <= hi && x >= T::zero());
    if x == T::zero() {
        return (lo..=hi).map(|n| if n == 0 { T::one() } else { T::zero() }).collect();
    }
    if x < T::lit(SERIES_CUTOFF) {
        return (lo..=hi).map(|n| power_series(n, x)).collect();
    }
    miller(lo, hi, x)
}

/// Ascending series `Σ_k (-1)^k (x/2)^{2k+n} / (k! (k+n)!)`, for small `x`.
fn power_series<T: Real>(n: u64, x: T) -> T {
    let half = x / T::lit(2.0);
    let mut lead = T::one();
    for k in 1..=n {
        lead = lead * half / T::from_u64(k).unwrap();
        if lead == T::zero() {
            return T::zero();
        }
    }
    let q = -half * half;
    let mut term = lead;
    let mut sum = lead;
    for k in 1..64u64 {
        term = term * q / (T::from_u64(k).unwrap() * T::from_u64(k + n).unwrap());
        sum = sum + term;
        if term.abs() <= T::epsilon() * sum.abs() {
            break;
        }
    }
    sum
}

fn miller<T: Real>(lo: u64, hi: u64, x: T) -> Vec<T> {
    let reach = (hi as f64).max(x.to_f64().unwrap().ceil());
    let guard = (160.0 * reach.max(1.0)).sqrt().ceil();
    let mut start = (reach + 20.0 + guard) as u64;
    start += start % 2;

    // Rescale before the unnormalized values can overflow.
    let ceiling = T::max_value().sqrt();
    let shrink = T::one() / ceiling;

    let mut window = vec![T::zero(); (hi - lo + 1) as usize];
    let mut upper = T::zero(); // J_{k+1}
    let mut current = T::min_positive_value().sqrt(); // J_k, arbitrary seed
    let mut norm = T::zero();
    let two = T::lit(2.0);
    let mut k = start;
    loop {
        if k >= lo && k <= hi {
            window[(k - lo) as usize] = current;
        }
        if k == 0 {
            norm = norm + current;
            break;
        }
        if k.is_multiple_of(2) {
            norm = norm + two * current;
        }
        let lower = two * T::from_u64(k).unwrap() / x * current - upper;
        upper = current;
        current = lower;
        k -= 1;
        if current.abs() > ceiling {
            current = current * shrink;
            upper = upper * shrink;
            norm = norm * shrink;
            for v in window.iter_mut() {
                *v = *v * shrink;
            }
        }
    }
    for v in window.iter_mut() {
        *v = *v / norm;
    }
    window
}
