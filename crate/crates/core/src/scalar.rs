use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar the simulation is generic over (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn from_index(j: i64) -> Self {
        Self::from_i64(j).expect("index representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `sin(u)/u`, with the removable singularity at 0 filled by its series.
pub fn sinc<T: Real>(u: T) -> T {
    if u.abs() < T::lit(1e-4) {
        let u2 = u * u;
        T::one() - u2 / T::lit(6.0) + u2 * u2 / T::lit(120.0)
    } else {
        u.sin() / u
    }
}

/// Reduce an angle to `[0, 2π)`.
pub fn wrap_angle<T: Real>(phi: T) -> T {
    let tau = T::TAU();
    let r = phi % tau;
    let r = if r < T::zero() { r + tau } else { r };
    // r + tau can round up to exactly tau for tiny negative inputs
    if r >= tau {
        T::zero()
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinc_is_continuous_across_series_switch() {
        let below = sinc(0.999_999e-4_f64);
        let above = sinc(1.000_001e-4_f64);
        assert!((below - above).abs() < 1e-12);
        assert_eq!(sinc(0.0_f64), 1.0);
        assert!((sinc(1e-5_f64) - (1e-5_f64).sin() / 1e-5).abs() < 1e-15);
    }

    #[test]
    fn wrap_angle_range() {
        let tau = std::f64::consts::TAU;
        assert_eq!(wrap_angle(0.0_f64), 0.0);
        assert!((wrap_angle(-1.0_f64) - (tau - 1.0)).abs() < 1e-15);
        assert!((wrap_angle(7.0_f64) - (7.0 - tau)).abs() < 1e-15);
        assert_eq!(wrap_angle(tau), 0.0);
        assert!(wrap_angle(-1e-300_f64) < tau);
    }
}
