//! Periodic homogenization of two-phase isotropic linear elasticity on the
//! unit 2-torus.
//!
//! The crate computes the homogenized stiffness tensor of a periodic
//! two-phase composite by Fourier–Galerkin minimization of the cell energy,
//! estimates the coercivity constants of the heterogeneous elastic form
//! (periodic Rayleigh quotient and Bloch-wave samples), and analyses
//! (loss of) strong ellipticity of the result. The regime of interest is
//! the one where the matrix phase is strictly strongly elliptic but not
//! very strongly elliptic (negative 2D bulk modulus), where standard
//! reference-medium FFT schemes are unusable and laminates are known to
//! lose strong ellipticity while matrix/inclusion mixtures do not.
//!
//! Modules:
//! - [`tensor`]: fourth-order tensor algebra in the orthonormal Mandel basis,
//!   rank-one (strong ellipticity) minimization, isotropic projection;
//! - [`micro`]: rasterized periodic microstructures, generators, PGM I/O,
//!   admissibility checks (phase conditions and matrix connectivity);
//! - [`solver`]: the spectral cell-problem solver and homogenized tensor
//!   assembly;
//! - [`coercivity`]: generalized eigensolves for the periodic and
//!   quasi-periodic Rayleigh quotients, plus the comparison-tensor
//!   certificate for non-negative whole-space coercivity;
//! - [`density`]: null-Lagrangian shift of the energy density and its
//!   decomposition into quadratic forms with a computable coercivity
//!   constant;
//! - [`laminate`]: closed-form rank-one lamination, the solver's exact
//!   ground truth and the canonical loss-of-ellipticity example.

pub mod coercivity;
pub mod density;
pub mod laminate;
pub mod micro;
pub mod solver;
pub mod tensor;

mod fft;
mod linalg;
