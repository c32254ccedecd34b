//! Pseudo-spectral incompressible Navier-Stokes on the 2π-periodic torus,
//! together with a measurement harness for maximum-norm decay constants,
//! solution bounds, existence windows, and the parabolic scaling symmetry.
//!
//! The building blocks are plain Fourier-multiplier operators (heat
//! semigroup, Riesz transforms, Leray projection), an integrating-factor RK4
//! time integrator for the projected momentum equation and its abstract
//! quadratic-forcing generalization, and a Picard iteration on the mild
//! (Duhamel) form that serves as an independent oracle for the integrator.
//!
//! See the `examples/` directory for one runnable program per capability and
//! the `torus-ns` binary for config-driven experiment runs.

pub mod config;
pub mod error;
pub mod estimates;
pub mod field;
pub mod grid;
pub mod gspec;
pub mod heat;
pub mod initial;
pub mod leray;
pub mod picard;
pub mod quadrature;
pub mod report;
pub mod runner;
pub mod snapshot;
pub mod solver;
pub mod spectral;
pub mod transform;

pub use error::{Error, Result};
pub use field::{RealField, RealVectorField, SpectralField, VectorField};
pub use grid::{MultiIndex, TorusGrid};
