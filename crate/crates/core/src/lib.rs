//! Verified computational toolkit for the arithmetic, lattice-geometric and
//! representation-theoretic quantities attached to congruence subgroups of
//! Bianchi groups and of `SO(d,1)(Z)`: subgroup indices, cusp counts,
//! fixed-point counts, Epstein zeta constants, cusp-uniformity diagnostics
//! and spectral-gap checks, each cross-validated against independent
//! brute-force oracles.

pub mod congruence;
pub mod error;
pub mod heatterms;
pub mod lattice_zeta;
pub mod numeric;
pub mod projline;
pub mod quadfield;
pub mod so_lattice;
pub mod weights;

pub use error::{Error, Result};
pub use quadfield::{FieldDescriptor, FracIdeal, Ideal, QuadInt};
