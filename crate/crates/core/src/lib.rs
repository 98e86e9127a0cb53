//! Dissipative time reversal for the photoacoustic inverse source problem in
//! a square cavity with reflecting (Neumann) walls.
//!
//! The forward map sends an initial state `(u₀, u₁)` to the pressure trace on
//! the observed part Γ of the wall. The reconstruction runs the wave equation
//! backwards with an absorbing-type boundary condition driven by the data,
//! then refines that estimate with a Neumann series.
//!
//! * [`grid`], [`boundary`]: geometry, fields, Γ/λ and traces
//! * [`norms`]: energy, seminorm, norm, boundary-mean projectors
//! * [`spectral`]: exact cosine-series solver used to synthesize data
//! * [`fdtd`]: leapfrog forward solver and the dissipative reverse solver
//! * [`recon`]: one-shot estimate, Neumann iteration, contraction estimate
//! * [`phantom`]: smooth test phantom and measurement noise
//! * [`io`]: field/trace files and run configuration

pub mod boundary;
pub mod error;
pub mod fdtd;
pub mod grid;
pub mod io;
pub mod norms;
pub mod phantom;
pub mod recon;
pub mod spectral;
pub mod synthetic;

pub use boundary::{BoundarySpec, BoundaryTrace, GammaPreset, LambdaProfile};
pub use error::{Error, Result};
pub use grid::{Grid2D, ScalarField, Side, StatePair};
pub use norms::Subspace;
