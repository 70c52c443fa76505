//! Equilibrium measures for rotationally symmetric Riesz gases.
//!
//! A Riesz gas is a system of particles in R^d repelling through the kernel
//! |x - y|^{-s} inside an external confining potential. This crate constructs
//! radially symmetric equilibrium densities and the external potentials that
//! generate them, verifies the Euler-Lagrange variational conditions by
//! independent routes (series, reduced quadrature, Monte Carlo), analyses the
//! harmonically confined Coulomb gas pushed against a half-space wall, and
//! cross-checks everything at small N with a particle energy minimizer.

pub mod el_verify;
pub mod error;
pub mod halfspace;
pub mod potentials;
pub mod quad;
pub mod rng;
pub mod sequences;
pub(crate) mod series;
pub mod simulate;
pub mod specfun;

pub use el_verify::{ElReport, EnergyReport, Method};
pub use halfspace::HalfspaceProblem;
pub use error::{Error, Result};
pub use potentials::{PotentialKind, PotentialSpec};
pub use sequences::{CoefficientSequence, Provenance, RadialDensity, RieszParams};
pub use simulate::{ParticleConfiguration, Schedule};
pub use specfun::SeriesControl;
