//! Simulation of coherent light in an evanescently coupled waveguide array
//! whose propagation constants grow linearly across the array.
//!
//! A two-site excitation `a_0 = 1`, `a_1 = α e^{iφ}` produces directed motion
//! of the intensity centroid whose sign is set by the relative phase φ: an
//! optical quantum ratchet. With α = 0 the dynamics reduce to ordinary Bloch
//! oscillations with period `2π/β`.
//!
//! The field can be propagated three independent ways:
//!
//! * [`propagators::green`]: closed-form Bessel-function propagator,
//! * [`propagators::rk4`]: direct integration of the coupled-mode equations,
//! * [`propagators::spectral`]: exact characteristics solution in k-space.
//!
//! All numerics are generic over the scalar type through [`Real`]; the
//! aliases below fix it to `f64`.

pub mod bessel;
pub mod error;
pub mod lattice;
pub mod observables;
pub mod propagators;
pub mod scalar;

pub use error::{Error, Result};
pub use lattice::{build_model, initial_state, total_power, FieldState, InputSpec, LatticeModel};
pub use observables::ObservableSeries;
pub use propagators::{MethodTag, PropagationMethod, SpectralField};
pub use scalar::Real;

pub use num_complex::Complex;

pub type Model = LatticeModel<f64>;
pub type Input = InputSpec<f64>;
pub type Field = FieldState<f64>;
pub type Spectrum = SpectralField<f64>;
pub type Series = ObservableSeries<f64>;
pub type Row = bessel::BesselRow<f64>;
pub type C64 = Complex<f64>;
