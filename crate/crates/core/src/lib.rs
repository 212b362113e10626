#![no_std]
//! Three-dimensional scattering of the fundamental symmetric Lamb wave by a cavity in an
//! infinite elastic plate, solved with hexahedral finite elements inside a cylinder and an
//! exact modal Dirichlet-to-Neumann map on its lateral surface.

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod math;
pub mod modes;
pub mod postprocess;
pub mod solver;
pub mod dense;
pub mod dispersion;
pub mod dtn;
pub mod fem;
pub mod incident;
pub mod mesh;
pub mod specfun;

/// Complex double used throughout.
pub type C64 = num_complex::Complex<f64>;
