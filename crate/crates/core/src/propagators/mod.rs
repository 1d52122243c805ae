//! Three independent ways to carry a field from `z = 0` to `z`.

pub mod green;
pub mod rk4;
pub mod spectral;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::lattice::{initial_state, FieldState, InputSpec, LatticeModel};
use crate::scalar::Real;

pub use green::{green_coefficient, propagate_green, GREEN_PHASE_SIGN};
pub use rk4::propagate_rk4;
pub use spectral::{forward_transform, inverse_transform, propagate_spectral, spectral_residual, SpectralField};

/// Edge intensity above which a propagated state is reported as truncated.
pub const LEAKAGE_FLAG_THRESHOLD: f64 = 1e-8;

pub fn leakage_flagged<T: Real>(state: &FieldState<T>) -> bool {
    state.edge_leakage() > T::lit(LEAKAGE_FLAG_THRESHOLD)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MethodTag {
    Green,
    Rk4,
    Spectral,
}

impl MethodTag {
    pub const ALL: [MethodTag; 3] = [MethodTag::Green, MethodTag::Rk4, MethodTag::Spectral];

    pub fn as_str(self) -> &'static str {
        match self {
            MethodTag::Green => "green",
            MethodTag::Rk4 => "rk4",
            MethodTag::Spectral => "spectral",
        }
    }
}

impl fmt::Display for MethodTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MethodTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "green" => Ok(MethodTag::Green),
            "rk4" => Ok(MethodTag::Rk4),
            "spectral" => Ok(MethodTag::Spectral),
            other => Err(Error::invalid("method", format!("expected green, rk4 or spectral, got {other:?}"))),
        }
    }
}

/// A propagator together with its numerical controls. `None` selects the
/// model-dependent default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PropagationMethod<T> {
    Green,
    Rk4 { step: Option<T> },
    Spectral { points: Option<usize> },
}

impl<T: Real> PropagationMethod<T> {
    pub fn tag(&self) -> MethodTag {
        match self {
            PropagationMethod::Green => MethodTag::Green,
            PropagationMethod::Rk4 { .. } => MethodTag::Rk4,
            PropagationMethod::Spectral { .. } => MethodTag::Spectral,
        }
    }

    pub fn with_defaults(tag: MethodTag) -> Self {
        match tag {
            MethodTag::Green => PropagationMethod::Green,
            MethodTag::Rk4 => PropagationMethod::Rk4 { step: None },
            MethodTag::Spectral => PropagationMethod::Spectral { points: None },
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            PropagationMethod::Rk4 { step: Some(h) } if !(h > T::zero() && h.is_finite()) => {
                Err(Error::invalid("rk4 step", format!("must be positive, got {h}")))
            }
            PropagationMethod::Spectral { points: Some(0) } => Err(Error::invalid("spectral points", "must be positive")),
            _ => Ok(()),
        }
    }
}

/// Propagate the two-site input to a single distance.
pub fn propagate<T: Real>(
    model: &LatticeModel<T>,
    input: &InputSpec<T>,
    z: T,
    method: &PropagationMethod<T>,
) -> Result<FieldState<T>> {
    Ok(propagate_series(model, input, &[z], method)?.pop().expect("one state per z"))
}

/// Propagate the two-site input to every distance in a non-decreasing grid.
/// RK4 integrates through the grid once; the other methods are exact in z
/// and evaluate each point independently.
pub fn propagate_series<T: Real>(
    model: &LatticeModel<T>,
    input: &InputSpec<T>,
    z_grid: &[T],
    method: &PropagationMethod<T>,
) -> Result<Vec<FieldState<T>>> {
    method.validate()?;
    if let Some(&bad) = z_grid.iter().find(|z| !(z.is_finite() && **z >= T::zero())) {
        return Err(Error::NegativeDistance(bad.to_f64().unwrap_or(f64::NAN)));
    }
    if z_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("z grid", "must be non-decreasing"));
    }
    match *method {
        PropagationMethod::Green => z_grid.iter().map(|&z| propagate_green(model, input, z)).collect(),
        PropagationMethod::Spectral { points } => {
            let points = points.unwrap_or_else(|| spectral::default_points(model));
            z_grid.iter().map(|&z| propagate_spectral(model, input, z, points)).collect()
        }
        PropagationMethod::Rk4 { step } => {
            let step = step.unwrap_or_else(|| rk4::default_step(model));
            let mut state = initial_state(model, input)?;
            let mut out = Vec::with_capacity(z_grid.len());
            for &z in z_grid {
                state = rk4::propagate_rk4_with_step(model, &state, z, step)?;
                out.push(state.clone());
            }
            Ok(out)
        }
    }
}
