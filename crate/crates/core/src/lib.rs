//! Desk-scale numerical laboratory for the spectral shift function.
//!
//! * [`spectral`]: dense Hermitian linear algebra shared by everything else.
//! * [`ssf`]: the spectral shift function by eigenvalue counting, by a change
//!   of variables, and by the boundary phase of the perturbation determinant.
//! * [`doi`]: double-operator-integral kernels and the bounds they need.
//! * [`dirac`]: a periodic-lattice free Dirac operator and weighted resolvent
//!   Schatten estimates.
//! * [`scattering`]: a 1-D lattice scattering model where `det S` can be
//!   compared with the spectral shift function.
//! * [`runner`]: config-driven verification suites and reports.

pub mod dirac;
pub mod doi;
pub mod random;
pub mod runner;
pub mod scattering;
pub mod spectral;
pub mod ssf;
