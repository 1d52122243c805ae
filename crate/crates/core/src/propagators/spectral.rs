//! Fourier-space solution of the ramped lattice.
//!
//! With `ã(k) = (2π)^{-1/2} Σ_j a_j e^{-ikj}` the coupled-mode equations
//! become the first-order PDE
//!
//! ```text
//! ∂_z ã = -2iC cos(k) ã + β ∂_k ã
//! ```
//!
//! whose characteristics `k + βz = const` give the exact solution
//!
//! ```text
//! ã(k, z) = ã(k + βz, 0) · exp(-(2iC/β) [sin(k + βz) - sin k]).
//! ```
//!
//! The initial spectrum is evaluated off-grid directly from the finitely
//! supported input, so the only discretisation is the final k-grid quadrature.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::lattice::{initial_state, FieldState, InputSpec, LatticeModel};
use crate::scalar::{sinc, Real};

/// Complex spectrum sampled on `k_m = -π + 2πm/K`, `m = 0..K`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField<T> {
    z: T,
    values: Vec<Complex<T>>,
}

impl<T: Real> SpectralField<T> {
    pub fn new(z: T, values: Vec<Complex<T>>) -> Result<Self> {
        if values.is_empty() || values.len().is_multiple_of(2) {
            return Err(Error::GridMismatch(format!("grid needs an odd number of points, got {}", values.len())));
        }
        Ok(SpectralField { z, values })
    }

    pub fn z(&self) -> T {
        self.z
    }

    pub fn points(&self) -> usize {
        self.values.len()
    }

    pub fn spacing(&self) -> T {
        T::TAU() / T::from_usize(self.points()).unwrap()
    }

    pub fn k(&self, m: usize) -> T {
        grid_point(m, self.points())
    }

    pub fn k_grid(&self) -> Vec<T> {
        (0..self.points()).map(|m| self.k(m)).collect()
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    /// `(2π/K) Σ |ã(k_m)|²`, equal to `Σ |a_j|²` for an unaliased grid.
    pub fn power(&self) -> T {
        self.spacing() * self.values.iter().fold(T::zero(), |acc, v| acc + v.norm_sqr())
    }
}

fn grid_point<T: Real>(m: usize, points: usize) -> T {
    -T::PI() + T::TAU() * T::from_usize(m).unwrap() / T::from_usize(points).unwrap()
}

/// `K = 2M + 1`.
pub fn default_points<T: Real>(model: &LatticeModel<T>) -> usize {
    model.site_count()
}

fn check_points(points: usize, half_width: usize) -> Result<()> {
    let required = 2 * half_width + 1;
    if points < required || points.is_multiple_of(2) {
        Err(Error::Aliasing { points, half_width, required })
    } else {
        Ok(())
    }
}

/// Spectrum of a site-space field at an arbitrary wavenumber.
pub fn spectrum_at<T: Real>(state: &FieldState<T>, k: T) -> Complex<T> {
    let norm = T::one() / T::TAU().sqrt();
    state
        .iter()
        .filter(|(_, a)| a.norm_sqr() > T::zero())
        .fold(Complex::new(T::zero(), T::zero()), |acc, (j, a)| {
            acc + a * Complex::from_polar(norm, -k * T::from_index(j))
        })
}

/// Sample the spectrum of `state` on a `points`-point grid.
pub fn forward_transform<T: Real>(state: &FieldState<T>, points: usize) -> Result<SpectralField<T>> {
    check_points(points, state.half_width())?;
    let values = (0..points).map(|m| spectrum_at(state, grid_point(m, points))).collect();
    Ok(SpectralField { z: state.z(), values })
}

/// Recover guides `-M..=M` from grid samples by the periodic quadrature
/// `a_j = (2π)^{-1/2} (2π/K) Σ_m ã(k_m) e^{i k_m j}`.
pub fn inverse_transform<T: Real>(spectral: &SpectralField<T>, half_width: usize) -> Result<FieldState<T>> {
    check_points(spectral.points(), half_width).map_err(|e| Error::GridMismatch(e.to_string()))?;
    let weight = spectral.spacing() / T::TAU().sqrt();
    let m = half_width as i64;
    let amplitudes = (-m..=m).map(|j| site_coefficient(spectral, j, weight)).collect();
    Ok(FieldState::from_parts(spectral.z(), amplitudes))
}

fn site_coefficient<T: Real>(spectral: &SpectralField<T>, j: i64, weight: T) -> Complex<T> {
    let jj = T::from_index(j);
    spectral
        .values
        .iter()
        .enumerate()
        .fold(Complex::new(T::zero(), T::zero()), |acc, (m, v)| {
            acc + v * Complex::from_polar(weight, spectral.k(m) * jj)
        })
}

/// Exact characteristics solution on the grid, starting from `state0` and
/// advancing by `dz` (which may be negative: the solution is reversible).
fn advance_spectrum<T: Real>(model: &LatticeModel<T>, state0: &FieldState<T>, dz: T, points: usize) -> SpectralField<T> {
    let two = T::lit(2.0);
    let shift = model.ramp() * dz;
    // (2C/β)[sin(k + βz) - sin k] = 2Cz sinc(βz/2) cos(k + βz/2)
    let strength = two * model.coupling() * dz * sinc(shift / two);
    let values = (0..points)
        .map(|m| {
            let k = grid_point::<T>(m, points);
            let launched = spectrum_at(state0, k + shift);
            launched * Complex::from_polar(T::one(), -strength * (k + shift / two).cos())
        })
        .collect();
    SpectralField { z: state0.z() + dz, values }
}

/// Spectrum of the propagated two-site input at distance `z`.
pub fn spectral_solution<T: Real>(
    model: &LatticeModel<T>,
    input: &InputSpec<T>,
    z: T,
    points: usize,
) -> Result<SpectralField<T>> {
    check_points(points, model.half_width())?;
    if !(z.is_finite() && z >= T::zero()) {
        return Err(Error::NegativeDistance(z.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(advance_spectrum(model, &initial_state(model, input)?, z, points))
}

/// Propagate an arbitrary state by `dz ≥ 0` in k-space and transform back.
pub fn evolve_spectral<T: Real>(
    model: &LatticeModel<T>,
    state0: &FieldState<T>,
    dz: T,
    points: usize,
) -> Result<FieldState<T>> {
    check_points(points, model.half_width())?;
    if state0.half_width() != model.half_width() {
        return Err(Error::invalid("state", "half-width differs from the model"));
    }
    if !(dz.is_finite() && dz >= T::zero()) {
        return Err(Error::NegativeDistance(dz.to_f64().unwrap_or(f64::NAN)));
    }
    inverse_transform(&advance_spectrum(model, state0, dz, points), model.half_width())
}

/// Two-site input propagated to `z` through k-space.
pub fn propagate_spectral<T: Real>(
    model: &LatticeModel<T>,
    input: &InputSpec<T>,
    z: T,
    points: usize,
) -> Result<FieldState<T>> {
    inverse_transform(&spectral_solution(model, input, z, points)?, model.half_width())
}

/// Largest residual over the grid of `∂_z ã + 2iC cos(k) ã - β ∂_k ã` for
/// the characteristics solution, with `∂_z` by centred difference of width
/// `2 dz` and `∂_k` by trigonometric interpolation of the grid samples.
pub fn spectral_residual<T: Real>(
    model: &LatticeModel<T>,
    input: &InputSpec<T>,
    z: T,
    dz: T,
    points: usize,
) -> Result<T> {
    if !(dz > T::zero() && dz.is_finite()) {
        return Err(Error::invalid("dz", "must be positive"));
    }
    check_points(points, model.half_width())?;
    let start = initial_state(model, input)?;
    let ahead = advance_spectrum(model, &start, z + dz, points);
    let behind = advance_spectrum(model, &start, z - dz, points);
    let here = advance_spectrum(model, &start, z, points);
    let dk = spectral_derivative(&here);

    let two = T::lit(2.0);
    let i = Complex::new(T::zero(), T::one());
    let coupling = model.coupling();
    let worst = (0..points).fold(T::zero(), |worst, m| {
        let dz_term = (ahead.values[m] - behind.values[m]) / (two * dz);
        let hop = i * here.values[m] * (two * coupling * here.k(m).cos());
        let residual = dz_term + hop - dk[m] * model.ramp();
        worst.max(residual.norm())
    });
    Ok(worst)
}

/// `∂_k ã` at the grid points from the trigonometric interpolant through
/// the samples (all `K` Fourier modes, `|j| ≤ (K-1)/2`).
fn spectral_derivative<T: Real>(spectral: &SpectralField<T>) -> Vec<Complex<T>> {
    let points = spectral.points();
    let reach = (points / 2) as i64;
    let weight = spectral.spacing() / T::TAU().sqrt();
    let norm = T::one() / T::TAU().sqrt();
    let coefficients: Vec<(T, Complex<T>)> = (-reach..=reach)
        .map(|j| (T::from_index(j), site_coefficient(spectral, j, weight)))
        .collect();
    (0..points)
        .map(|m| {
            let k = spectral.k(m);
            coefficients.iter().fold(Complex::new(T::zero(), T::zero()), |acc, &(j, c)| {
                // d/dk e^{-ikj} = -ij e^{-ikj}
                acc + c * Complex::new(T::zero(), -j) * Complex::from_polar(norm, -k * j)
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_model;
    use crate::propagators::green::propagate_green;
    use std::f64::consts::PI;

    #[test]
    fn delta_has_flat_spectrum() {
        let model = build_model(6, 1.0_f64, 0.73).unwrap();
        let s = initial_state(&model, &InputSpec::single_site()).unwrap();
        let spec = forward_transform(&s, 13).unwrap();
        let flat = 1.0 / (2.0 * PI).sqrt();
        for v in spec.values() {
            assert!((v - Complex::new(flat, 0.0)).norm() < 1e-15);
        }
        let back = inverse_transform(&SpectralField::new(0.0, vec![Complex::new(flat, 0.0); 13]).unwrap(), 6).unwrap();
        assert!(back.max_abs_diff(&s) < 1e-14);
    }

    #[test]
    fn zero_spectrum() {
        let zero = SpectralField::new(0.0, vec![Complex::new(0.0, 0.0); 9]).unwrap();
        assert_eq!(inverse_transform(&zero, 4).unwrap().total_power(), 0.0);
    }

    #[test]
    fn parseval_for_ratchet_input() {
        let model = build_model(40, 1.0_f64, 0.73).unwrap();
        let s = initial_state(&model, &InputSpec::from_degrees(1.0, 37.0).unwrap()).unwrap();
        let spec = forward_transform(&s, 81).unwrap();
        assert!((spec.power() - 2.0).abs() < 1e-9);
        assert!(inverse_transform(&spec, 40).unwrap().max_abs_diff(&s) < 1e-12);
    }

    #[test]
    fn grid_errors() {
        let model = build_model(10, 1.0_f64, 0.73).unwrap();
        let s = initial_state(&model, &InputSpec::single_site()).unwrap();
        assert!(matches!(forward_transform(&s, 19), Err(Error::Aliasing { required: 21, .. })));
        assert!(matches!(forward_transform(&s, 22), Err(Error::Aliasing { .. })));
        let spec = forward_transform(&s, 21).unwrap();
        assert!(matches!(inverse_transform(&spec, 11), Err(Error::GridMismatch(_))));
        assert!(SpectralField::new(0.0, vec![Complex::new(0.0, 0.0); 4]).is_err());
        assert!(propagate_spectral(&model, &InputSpec::single_site(), 1.0, 15).is_err());
    }

    #[test]
    fn grid_layout() {
        let spec = SpectralField::new(0.0, vec![Complex::new(0.0, 0.0); 5]).unwrap();
        let k = spec.k_grid();
        assert!((k[0] + PI).abs() < 1e-15);
        assert!((k[1] - k[0] - 2.0 * PI / 5.0).abs() < 1e-15);
        assert!(k[4] < PI);
    }

    #[test]
    fn matches_green_at_half_period() {
        let beta = 0.73;
        let model = build_model(40, 1.0_f64, beta).unwrap();
        let input = InputSpec::from_degrees(1.0, 37.0).unwrap();
        let z = PI / beta;
        let a = propagate_spectral(&model, &input, z, 81).unwrap();
        let b = propagate_green(&model, &input, z).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-6);
    }

    #[test]
    fn uncoupled_limit_only_accumulates_ramp_phase() {
        let (beta, z) = (0.73, 2.4);
        let model = build_model(8, 1e-200_f64, beta).unwrap();
        let input = InputSpec::from_degrees(0.6, 217.0).unwrap();
        let start = initial_state(&model, &input).unwrap();
        let out = propagate_spectral(&model, &input, z, 17).unwrap();
        for ((j, a), (_, a0)) in out.iter().zip(start.iter()) {
            let want = a0 * Complex::from_polar(1.0, -(j as f64) * beta * z);
            assert!((a - want).norm() < 1e-13, "site {j}");
        }
    }

    #[test]
    fn flat_array_gives_discrete_diffraction() {
        let model = build_model(30, 1.0_f64, 0.0).unwrap();
        let z = 3.0_f64;
        let out = propagate_spectral(&model, &InputSpec::single_site(), z, 61).unwrap();
        for (j, a) in out.iter() {
            let want = crate::bessel::bessel_j(j, 2.0 * z).unwrap().abs();
            assert!((a.norm() - want).abs() < 1e-12, "site {j}");
        }
        let spec = spectral_solution(&model, &InputSpec::single_site(), z, 61).unwrap();
        for (m, v) in spec.values().iter().enumerate() {
            let want = Complex::from_polar(1.0 / (2.0 * PI).sqrt(), -2.0 * z * spec.k(m).cos());
            assert!((v - want).norm() < 1e-14);
        }
    }

    #[test]
    fn residual_is_second_order_in_dz() {
        let beta = 0.73;
        let model = build_model(64, 1.0_f64, beta).unwrap();
        let input = InputSpec::from_degrees(1.0, 37.0).unwrap();
        let z = PI / beta;
        let coarse = spectral_residual(&model, &input, z, 1e-3, 129).unwrap();
        let fine = spectral_residual(&model, &input, z, 5e-4, 129).unwrap();
        assert!(coarse <= 1e-4, "residual {coarse}");
        let ratio = coarse / fine;
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn residual_vanishes_for_pure_advection_of_flat_spectrum() {
        let model = build_model(20, 1e-200_f64, 0.73).unwrap();
        let r = spectral_residual(&model, &InputSpec::single_site(), 1.3, 1e-3, 41).unwrap();
        assert!(r < 1e-10, "residual {r}");
    }
}
