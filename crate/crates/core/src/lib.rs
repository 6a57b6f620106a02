//! Numerical toolkit for the infinite harmonic chain
//! `q_k'' = omega^2 (q_{k+1} - 2 q_k + q_{k-1})` with zero initial
//! velocities: trajectories by three independent routes, membership
//! tests for the admissible class of initial data, the asymptotic
//! constants, and bound sweeps for the oscillatory integrals that
//! control uniform boundedness.

pub mod acceptance;
pub mod bessel;
pub mod dynamics;
pub mod error;
pub mod lattice;
pub mod oscillatory;
pub mod output;
pub mod quadrature;
pub mod special;
pub mod spectral;
pub mod sweep;

pub use error::{Error, Result};
