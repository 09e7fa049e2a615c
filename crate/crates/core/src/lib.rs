//! Open-system dynamics of short spin chains whose spins each couple to
//! their own harmonic bath.
//!
//! Two routes are provided: adiabatic trajectories in the mixed
//! Wigner-Heisenberg representation (sampled from the thermal Wigner
//! density, propagated with velocity Verlet and averaged in the natural
//! basis), and the closed-form Born-Markov solution of the two-spin master
//! equation together with a matrix-exponential oracle for it.

pub mod adiabatic;
pub mod analytic;
pub mod bath;
pub mod error;
pub mod estimator;
pub mod model;

pub use adiabatic::{AdiabaticFrame, FrameTracking, OpenChain, TimeGrid};
pub use bath::{BathModes, CouplingForm, PhasePoint, ThermalBaths};
pub use error::{Error, Result};
pub use model::{SpinChain, SpinChainParams};

pub use nalgebra::{Complex, DMatrix, DVector};
