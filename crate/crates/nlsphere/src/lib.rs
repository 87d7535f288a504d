//! Nonlocal vector calculus on the unit two-sphere.
//!
//! The crate is `no_std` with `alloc`. It provides
//!
//! * points, frames and quadrature on 𝕊² ([`geometry`], [`quadrature`]),
//! * normalized associated Legendre functions, scalar and vector spherical
//!   harmonics and their transforms ([`harmonics`]),
//! * the weakly singular kernel family ρ_δ, γ′_δ, γ_δ, μ_δ together with the
//!   Legendre-coefficient functional λ_ℓ and the eigenvalue tables
//!   ([`kernels`]),
//! * coefficient-space local and weighted nonlocal operators ([`operators`]),
//! * a brute-force cap-quadrature oracle for the defining integrals
//!   ([`oracle`]),
//! * spherical-cap integrals and the nonlocal Stokes residual ([`stokes`]).
//!
//! ```
//! use nlsphere::kernels::{eigen_tables, KernelParams};
//!
//! let params = KernelParams::new(0.5, 0.1).unwrap();
//! let tables = eigen_tables(&params, 8).unwrap();
//! assert!((tables.lambda[0] - 1.0).abs() < 1e-10);
//! assert!(tables.lambda[4] < 1.0);
//! ```
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
pub mod geometry;
pub mod harmonics;
pub mod kernels;
pub mod operators;
pub mod oracle;
pub mod quadrature;
pub mod special;
pub mod stokes;

pub use error::{Error, Result};
pub use num_complex::Complex64;
