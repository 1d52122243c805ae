//! Waveguide-array model, the linear propagation-constant ramp, and the
//! two-site ratchet excitation.
//!
//! Sites are addressed by their physical index `j ∈ -M..=M` with `j = 0` the
//! central guide. Storage is offset by `M`, which never leaks out of this
//! module.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{wrap_angle, Real};

/// Smallest half-width ever chosen by [`default_half_width`].
pub const MIN_DEFAULT_HALF_WIDTH: usize = 40;

/// Extra sites kept beyond the largest Bessel argument `4C/β`.
pub const TRUNCATION_MARGIN: usize = 10;

/// Half-width needed so that intensities beyond the edge are negligible, or
/// `None` for a flat array, where spreading is unbounded in z.
pub fn required_half_width<T: Real>(coupling: T, ramp: T) -> Option<usize> {
    if ramp > T::zero() {
        let reach = (T::lit(4.0) * coupling / ramp).ceil().to_usize()?;
        Some(reach.saturating_add(TRUNCATION_MARGIN))
    } else {
        None
    }
}

pub fn default_half_width<T: Real>(coupling: T, ramp: T) -> usize {
    required_half_width(coupling, ramp).map_or(MIN_DEFAULT_HALF_WIDTH, |m| m.max(MIN_DEFAULT_HALF_WIDTH))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeModel<T> {
    half_width: usize,
    coupling: T,
    ramp: T,
    truncation_adequate: bool,
}

/// Validate and build a model. Undersized arrays are accepted but flagged
/// through [`LatticeModel::truncation_adequate`].
pub fn build_model<T: Real>(half_width: usize, coupling: T, ramp: T) -> Result<LatticeModel<T>> {
    if half_width < 1 {
        return Err(Error::invalid("half_width", "must be at least 1"));
    }
    if !coupling.is_finite() || coupling <= T::zero() {
        return Err(Error::invalid("coupling", format!("must be positive and finite, got {coupling}")));
    }
    if !ramp.is_finite() || ramp < T::zero() {
        return Err(Error::invalid("ramp", format!("must be non-negative and finite, got {ramp}")));
    }
    let truncation_adequate = required_half_width(coupling, ramp).is_none_or(|m| half_width >= m);
    Ok(LatticeModel { half_width, coupling, ramp, truncation_adequate })
}

impl<T: Real> LatticeModel<T> {
    /// Model with the default truncation `max(40, ceil(4C/β) + 10)`.
    pub fn with_default_width(coupling: T, ramp: T) -> Result<Self> {
        build_model(default_half_width(coupling, ramp), coupling, ramp)
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn coupling(&self) -> T {
        self.coupling
    }

    pub fn ramp(&self) -> T {
        self.ramp
    }

    pub fn truncation_adequate(&self) -> bool {
        self.truncation_adequate
    }

    pub fn site_count(&self) -> usize {
        2 * self.half_width + 1
    }

    pub fn sites(&self) -> impl DoubleEndedIterator<Item = i64> + Clone {
        let m = self.half_width as i64;
        -m..=m
    }

    pub fn contains(&self, j: i64) -> bool {
        j.unsigned_abs() <= self.half_width as u64
    }

    pub(crate) fn check_site(&self, j: i64) -> Result<()> {
        if self.contains(j) {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index: j, half_width: self.half_width })
        }
    }

    /// `β(j) = jβ`.
    pub fn propagation_constant(&self, j: i64) -> Result<T> {
        self.check_site(j)?;
        Ok(T::from_index(j) * self.ramp)
    }

    /// Largest local rate in the coupled-mode equations, `max(2C, βM)`.
    pub fn fastest_rate(&self) -> T {
        let ramp_rate = self.ramp * T::from_index(self.half_width as i64);
        (T::lit(2.0) * self.coupling).max(ramp_rate)
    }
}

/// Free-function form of [`LatticeModel::propagation_constant`].
pub fn propagation_constant<T: Real>(model: &LatticeModel<T>, j: i64) -> Result<T> {
    model.propagation_constant(j)
}

/// Relative amplitude `α ≥ 0` and phase `φ` of the second excited guide.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputSpec<T> {
    alpha: T,
    phi: T,
}

impl<T: Real> InputSpec<T> {
    pub fn new(alpha: T, phi: T) -> Result<Self> {
        if !alpha.is_finite() || alpha < T::zero() {
            return Err(Error::invalid("alpha", format!("must be non-negative and finite, got {alpha}")));
        }
        if !phi.is_finite() {
            return Err(Error::invalid("phi", format!("must be finite, got {phi}")));
        }
        Ok(InputSpec { alpha, phi: wrap_angle(phi) })
    }

    pub fn from_degrees(alpha: T, phi_deg: T) -> Result<Self> {
        Self::new(alpha, phi_deg.to_radians())
    }

    /// Single-guide excitation; the dynamics are plain Bloch oscillations.
    pub fn single_site() -> Self {
        InputSpec { alpha: T::zero(), phi: T::zero() }
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    /// Phase in `[0, 2π)`.
    pub fn phi(&self) -> T {
        self.phi
    }

    /// `α e^{iφ}`, the amplitude launched into guide `j = 1`.
    pub fn second_amplitude(&self) -> Complex<T> {
        Complex::from_polar(self.alpha, self.phi)
    }

    /// `1 + α²`, conserved by every propagator.
    pub fn power(&self) -> T {
        T::one() + self.alpha * self.alpha
    }
}

/// Complex guide amplitudes at propagation distance `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState<T> {
    z: T,
    amplitudes: Vec<Complex<T>>,
}

impl<T: Real> FieldState<T> {
    /// Wrap amplitudes ordered `j = -M..=M`. The length must be odd and all
    /// entries finite.
    pub fn new(z: T, amplitudes: Vec<Complex<T>>) -> Result<Self> {
        if amplitudes.len().is_multiple_of(2) {
            return Err(Error::invalid("amplitudes", format!("length must be odd, got {}", amplitudes.len())));
        }
        if !z.is_finite() || z < T::zero() {
            return Err(Error::NegativeDistance(z.to_f64().unwrap_or(f64::NAN)));
        }
        if amplitudes.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::NumericalFailure { z: z.to_f64().unwrap_or(f64::NAN) });
        }
        Ok(FieldState { z, amplitudes })
    }

    pub fn zeros(half_width: usize, z: T) -> Self {
        FieldState { z, amplitudes: vec![Complex::new(T::zero(), T::zero()); 2 * half_width + 1] }
    }

    pub(crate) fn from_parts(z: T, amplitudes: Vec<Complex<T>>) -> Self {
        debug_assert!(amplitudes.len() % 2 == 1);
        FieldState { z, amplitudes }
    }

    pub fn z(&self) -> T {
        self.z
    }

    pub fn half_width(&self) -> usize {
        self.amplitudes.len() / 2
    }

    pub fn sites(&self) -> impl DoubleEndedIterator<Item = i64> + Clone {
        let m = self.half_width() as i64;
        -m..=m
    }

    /// Amplitudes ordered `j = -M..=M`.
    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex<T>> {
        self.amplitudes
    }

    pub fn amplitude(&self, j: i64) -> Option<Complex<T>> {
        let m = self.half_width() as i64;
        if j.abs() > m {
            return None;
        }
        Some(self.amplitudes[(j + m) as usize])
    }

    /// `(j, a_j)` pairs in ascending `j`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex<T>)> + '_ {
        self.sites().zip(self.amplitudes.iter().copied())
    }

    pub fn total_power(&self) -> T {
        self.amplitudes.iter().fold(T::zero(), |acc, a| acc + a.norm_sqr())
    }

    /// Intensity on the two outermost guides. Anything appreciable here
    /// means the truncation is too tight for the propagation distance.
    pub fn edge_leakage(&self) -> T {
        let first = self.amplitudes[0].norm_sqr();
        if self.amplitudes.len() == 1 {
            first
        } else {
            first + self.amplitudes[self.amplitudes.len() - 1].norm_sqr()
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.amplitudes.len(), other.amplitudes.len(), "states on different arrays");
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .fold(T::zero(), |acc, (a, b)| acc.max((a - b).norm()))
    }
}

/// Launch `a_0 = 1`, `a_1 = α e^{iφ}` at `z = 0`.
pub fn initial_state<T: Real>(model: &LatticeModel<T>, input: &InputSpec<T>) -> Result<FieldState<T>> {
    let m = model.half_width();
    if m < 1 {
        return Err(Error::Capacity { half_width: m });
    }
    let mut state = FieldState::zeros(m, T::zero());
    state.amplitudes[m] = Complex::new(T::one(), T::zero());
    state.amplitudes[m + 1] = input.second_amplitude();
    Ok(state)
}

pub fn total_power<T: Real>(state: &FieldState<T>) -> T {
    state.total_power()
}
