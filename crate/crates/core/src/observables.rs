//! Guide intensities and the intensity-weighted site moments `⟨j⟩`, `⟨j²⟩`.
//!
//! Moments are unnormalized (`Σ I_j = 1 + α²`), so both equal `α²` at the
//! input. Closed forms use `X = (4C/β) sin(βz/2)` and `u = βz/2`:
//!
//! ```text
//! I_j    = J_{-j}(X)² + α² J_{1-j}(X)² - 2α J_{-j}(X) J_{1-j}(X) sin(u - φ)
//! ⟨j⟩    = α² + α X sin(u - φ)
//! ⟨j²⟩   = ⟨j⟩ + (1 + α²) X² / 2
//! ```

use crate::bessel::bessel_j;
use crate::error::{Error, Result};
use crate::lattice::{FieldState, InputSpec, LatticeModel};
use crate::propagators::green::bessel_argument;
use crate::propagators::{propagate_series, MethodTag, PropagationMethod};
use crate::scalar::Real;

pub fn intensity_profile<T: Real>(state: &FieldState<T>) -> Vec<T> {
    state.amplitudes().iter().map(|a| a.norm_sqr()).collect()
}

/// Sign in front of φ in the interference term `sin(βz/2 ∓ φ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossTerm {
    /// `sin(βz/2 - φ)`
    MinusPhi,
    /// `sin(βz/2 + φ)`
    PlusPhi,
}

impl CrossTerm {
    pub fn label(self) -> &'static str {
        match self {
            CrossTerm::MinusPhi => "sin(beta*z/2 - phi)",
            CrossTerm::PlusPhi => "sin(beta*z/2 + phi)",
        }
    }
}

/// Closed-form intensity of guide `j` for the two-site input.
pub fn intensity_closed_form<T: Real>(model: &LatticeModel<T>, input: &InputSpec<T>, j: i64, z: T) -> Result<T> {
    intensity_closed_form_with(model, input, j, z, CrossTerm::MinusPhi)
}

pub fn intensity_closed_form_with<T: Real>(
    model: &LatticeModel<T>,
    input: &InputSpec<T>,
    j: i64,
    z: T,
    cross: CrossTerm,
) -> Result<T> {
    model.check_site(j)?;
    check_distance(z)?;
    let x = bessel_argument(model, z);
    let center = bessel_j(-j, x)?;
    let right = bessel_j(1 - j, x)?;
    let alpha = input.alpha();
    let u = model.ramp() * z / T::lit(2.0);
    let phase = match cross {
        CrossTerm::MinusPhi => u - input.phi(),
        CrossTerm::PlusPhi => u + input.phi(),
    };
    Ok(center * center + alpha * alpha * right * right - T::lit(2.0) * alpha * center * right * phase.sin())
}

fn check_distance<T: Real>(z: T) -> Result<()> {
    if z.is_finite() && z >= T::zero() {
        Ok(())
    } else {
        Err(Error::NegativeDistance(z.to_f64().unwrap_or(f64::NAN)))
    }
}

/// `Σ_j j I_j`.
pub fn mean_site<T: Real>(state: &FieldState<T>) -> T {
    state.iter().fold(T::zero(), |acc, (j, a)| acc + T::from_index(j) * a.norm_sqr())
}

/// `Σ_j j² I_j`.
pub fn mean_site_sq<T: Real>(state: &FieldState<T>) -> T {
    state.iter().fold(T::zero(), |acc, (j, a)| {
        let jj = T::from_index(j);
        acc + jj * jj * a.norm_sqr()
    })
}

/// Both moments, optionally divided by the total power.
pub fn moments<T: Real>(state: &FieldState<T>, normalized: bool) -> (T, T) {
    let (first, second) = (mean_site(state), mean_site_sq(state));
    if normalized {
        let power = state.total_power();
        (first / power, second / power)
    } else {
        (first, second)
    }
}

pub fn mean_site_closed_form<T: Real>(model: &LatticeModel<T>, input: &InputSpec<T>, z: T) -> Result<T> {
    check_distance(z)?;
    let alpha = input.alpha();
    let x = bessel_argument(model, z);
    let u = model.ramp() * z / T::lit(2.0);
    Ok(alpha * alpha + alpha * x * (u - input.phi()).sin())
}

pub fn mean_site_sq_closed_form<T: Real>(model: &LatticeModel<T>, input: &InputSpec<T>, z: T) -> Result<T> {
    let first = mean_site_closed_form(model, input, z)?;
    let x = bessel_argument(model, z);
    Ok(first + input.power() * x * x / T::lit(2.0))
}

/// `d⟨j⟩/dz` at `z = 0`: `-2αC sin φ`.
pub fn small_z_slope<T: Real>(model: &LatticeModel<T>, input: &InputSpec<T>) -> T {
    -T::lit(2.0) * input.alpha() * model.coupling() * input.phi().sin()
}

/// `2π/β`; every observable repeats with this period.
pub fn bloch_period<T: Real>(model: &LatticeModel<T>) -> Result<T> {
    if model.ramp() > T::zero() {
        Ok(T::TAU() / model.ramp())
    } else {
        Err(Error::NoFinitePeriod)
    }
}

/// `n` evenly spaced points from 0 to `z_max` inclusive.
pub fn uniform_grid<T: Real>(z_max: T, n: usize) -> Vec<T> {
    match n {
        0 => Vec::new(),
        1 => vec![T::zero()],
        _ => {
            let last = T::from_usize(n - 1).unwrap();
            (0..n).map(|i| z_max * T::from_usize(i).unwrap() / last).collect()
        }
    }
}

/// Per-z intensities and moments of one propagation run.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSeries<T> {
    pub z_grid: Vec<T>,
    /// `intensity[m][i]` is guide `i - M` at `z_grid[m]`.
    pub intensity: Vec<Vec<T>>,
    pub power: Vec<T>,
    pub mean_site: Vec<T>,
    pub mean_site_sq: Vec<T>,
    /// Largest edge intensity seen along the run.
    pub max_edge_leakage: T,
    pub model: LatticeModel<T>,
    pub input: InputSpec<T>,
    pub method: MethodTag,
}

impl<T: Real> ObservableSeries<T> {
    pub fn compute(
        model: &LatticeModel<T>,
        input: &InputSpec<T>,
        z_grid: &[T],
        method: &PropagationMethod<T>,
    ) -> Result<Self> {
        let states = propagate_series(model, input, z_grid, method)?;
        Ok(Self::from_states(model, input, method.tag(), &states))
    }

    pub fn from_states(model: &LatticeModel<T>, input: &InputSpec<T>, method: MethodTag, states: &[FieldState<T>]) -> Self {
        let intensity: Vec<Vec<T>> = states.iter().map(intensity_profile).collect();
        let power = intensity.iter().map(|row| row.iter().fold(T::zero(), |a, &b| a + b)).collect();
        ObservableSeries {
            z_grid: states.iter().map(FieldState::z).collect(),
            power,
            mean_site: states.iter().map(mean_site).collect(),
            mean_site_sq: states.iter().map(mean_site_sq).collect(),
            max_edge_leakage: states.iter().map(FieldState::edge_leakage).fold(T::zero(), T::max),
            intensity,
            model: *model,
            input: *input,
            method,
        }
    }

    pub fn len(&self) -> usize {
        self.z_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z_grid.is_empty()
    }

    pub fn half_width(&self) -> usize {
        self.model.half_width()
    }

    /// Intensity of guide `j` at grid index `m`.
    pub fn intensity_at(&self, m: usize, j: i64) -> Option<T> {
        let offset = j + self.half_width() as i64;
        self.intensity.get(m)?.get(usize::try_from(offset).ok()?).copied()
    }

    /// Moments divided by the power at each z.
    pub fn normalized_moments(&self) -> (Vec<T>, Vec<T>) {
        let first = self.mean_site.iter().zip(&self.power).map(|(&m, &p)| m / p).collect();
        let second = self.mean_site_sq.iter().zip(&self.power).map(|(&m, &p)| m / p).collect();
        (first, second)
    }
}
