//! Fixed-step classical Runge–Kutta integration of the coupled-mode
//! equations `da_j/dz = -i jβ a_j - iC (a_{j+1} + a_{j-1})` on the truncated
//! array, with `a_{±(M+1)} = 0`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::lattice::{FieldState, LatticeModel};
use crate::scalar::Real;

/// Steps between checks for non-finite amplitudes.
const FINITE_CHECK_INTERVAL: usize = 256;

/// `0.001 / max(C, βM)`.
pub fn default_step<T: Real>(model: &LatticeModel<T>) -> T {
    let ramp_rate = model.ramp() * T::from_index(model.half_width() as i64);
    T::lit(1e-3) / model.coupling().max(ramp_rate)
}

/// Largest accepted step, `0.1 / C`.
pub fn max_step<T: Real>(model: &LatticeModel<T>) -> T {
    T::lit(0.1) / model.coupling()
}

/// Coupled-mode right-hand side `-i (β_j a_j + C (a_{j+1} + a_{j-1}))`,
/// written into `out`.
fn slope<T: Real>(onsite: &[T], coupling: T, field: &[Complex<T>], out: &mut [Complex<T>]) {
    let n = field.len();
    let rotate = |w: Complex<T>| Complex::new(w.im, -w.re);
    if n == 1 {
        out[0] = rotate(field[0] * onsite[0]);
        return;
    }
    out[0] = rotate(field[0] * onsite[0] + field[1] * coupling);
    out[n - 1] = rotate(field[n - 1] * onsite[n - 1] + field[n - 2] * coupling);
    for ((slot, w), &beta) in out[1..n - 1].iter_mut().zip(field.windows(3)).zip(&onsite[1..n - 1]) {
        *slot = rotate(w[1] * beta + (w[0] + w[2]) * coupling);
    }
}

/// `out = base + dir * scale`
fn axpy<T: Real>(out: &mut [Complex<T>], base: &[Complex<T>], dir: &[Complex<T>], scale: T) {
    for ((o, b), d) in out.iter_mut().zip(base).zip(dir) {
        *o = b + d * scale;
    }
}

/// Integrate from `state0.z()` to `z_target` in exactly `steps` equal steps.
pub fn propagate_rk4<T: Real>(
    model: &LatticeModel<T>,
    state0: &FieldState<T>,
    z_target: T,
    steps: usize,
) -> Result<FieldState<T>> {
    if steps == 0 {
        return Err(Error::invalid("steps", "must be at least 1"));
    }
    if state0.half_width() != model.half_width() {
        return Err(Error::invalid("state", "half-width differs from the model"));
    }
    if !z_target.is_finite() || z_target < state0.z() {
        return Err(Error::NegativeDistance((z_target - state0.z()).to_f64().unwrap_or(f64::NAN)));
    }
    let span = z_target - state0.z();
    if span == T::zero() {
        return Ok(state0.clone());
    }
    let h = span / T::from_usize(steps).unwrap();
    let limit = max_step(model);
    if h > limit {
        return Err(Error::StepTooLarge { step: h.to_f64().unwrap(), limit: limit.to_f64().unwrap() });
    }

    let coupling = model.coupling();
    let onsite: Vec<T> = model.sites().map(|j| T::from_index(j) * model.ramp()).collect();
    let n = state0.amplitudes().len();
    let zero = Complex::new(T::zero(), T::zero());
    let mut a = state0.amplitudes().to_vec();
    let mut tmp = vec![zero; n];
    let mut k1 = vec![zero; n];
    let mut k2 = vec![zero; n];
    let mut k3 = vec![zero; n];
    let mut k4 = vec![zero; n];
    let half = h / T::lit(2.0);
    let sixth = h / T::lit(6.0);
    let two = T::lit(2.0);

    for step in 0..steps {
        slope(&onsite, coupling, &a, &mut k1);
        axpy(&mut tmp, &a, &k1, half);
        slope(&onsite, coupling, &tmp, &mut k2);
        axpy(&mut tmp, &a, &k2, half);
        slope(&onsite, coupling, &tmp, &mut k3);
        axpy(&mut tmp, &a, &k3, h);
        slope(&onsite, coupling, &tmp, &mut k4);
        for ((((v, d1), d2), d3), d4) in a.iter_mut().zip(&k1).zip(&k2).zip(&k3).zip(&k4) {
            *v = *v + (d1 + (d2 + d3) * two + d4) * sixth;
        }
        if ((step + 1) % FINITE_CHECK_INTERVAL == 0 || step + 1 == steps)
            && a.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
                let z = state0.z() + h * T::from_usize(step + 1).unwrap();
                return Err(Error::NumericalFailure { z: z.to_f64().unwrap_or(f64::NAN) });
            }
    }
    Ok(FieldState::from_parts(z_target, a))
}

/// Integrate with the largest step not exceeding `max_step_size`.
pub fn propagate_rk4_with_step<T: Real>(
    model: &LatticeModel<T>,
    state0: &FieldState<T>,
    z_target: T,
    max_step_size: T,
) -> Result<FieldState<T>> {
    if max_step_size.is_nan() || max_step_size <= T::zero() {
        return Err(Error::invalid("rk4 step", "must be positive"));
    }
    let span = z_target - state0.z();
    let steps = (span / max_step_size).ceil().to_usize().unwrap_or(0).max(1);
    propagate_rk4(model, state0, z_target, steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_model, initial_state, InputSpec};
    use std::f64::consts::PI;

    #[test]
    fn zero_length_is_identity() {
        let model = build_model(10, 1.0_f64, 0.73).unwrap();
        let s = initial_state(&model, &InputSpec::from_degrees(1.0, 37.0).unwrap()).unwrap();
        assert_eq!(propagate_rk4(&model, &s, 0.0, 10).unwrap(), s);
    }

    #[test]
    fn bloch_revival() {
        let beta = 0.73;
        let model = build_model(40, 1.0_f64, beta).unwrap();
        let s = initial_state(&model, &InputSpec::single_site()).unwrap();
        let out = propagate_rk4_with_step(&model, &s, 2.0 * PI / beta, default_step(&model)).unwrap();
        assert!((out.amplitude(0).unwrap().norm_sqr() - 1.0).abs() < 1e-6);
        assert!((out.total_power() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_large_steps_and_backwards_runs() {
        let model = build_model(10, 1.0_f64, 0.73).unwrap();
        let s = initial_state(&model, &InputSpec::single_site()).unwrap();
        assert!(matches!(propagate_rk4(&model, &s, 1.0, 5), Err(Error::StepTooLarge { .. })));
        assert!(propagate_rk4(&model, &s, 1.0, 0).is_err());
        let later = propagate_rk4(&model, &s, 1.0, 100).unwrap();
        assert!(matches!(propagate_rk4(&model, &later, 0.5, 100), Err(Error::NegativeDistance(_))));
    }

    #[test]
    fn detects_blow_up() {
        // far outside the stability region of RK4
        let model = build_model(40, 1.0_f64, 2.0).unwrap();
        let s = initial_state(&model, &InputSpec::single_site()).unwrap();
        let res = propagate_rk4(&model, &s, 1000.0, 10_000);
        assert!(matches!(res, Err(Error::NumericalFailure { .. })), "{res:?}");
    }

    #[test]
    fn default_step_rule() {
        let model = build_model(40, 1.0_f64, 0.73).unwrap();
        assert!((default_step(&model) - 1e-3 / 29.2).abs() < 1e-15);
        let model = build_model(40, 1.0_f64, 0.01).unwrap();
        assert!((default_step(&model) - 1e-3).abs() < 1e-15);
    }
}
