//! Numerical topological invariants of gapped quantum systems, commutative
//! and noncommutative.
//!
//! The crate computes integer and ℤ₂-valued indices from three complementary
//! viewpoints and cross-checks them against each other:
//!
//! * **Bloch-band invariants** ([`bloch`]): Chern numbers, 3d winding
//!   numbers, and the time-reversal ℤ₂ invariant from Pfaffians of sewing
//!   matrices over the Brillouin torus.
//! * **Noncommutative index pairings** ([`nctorus`], [`ccpairing`],
//!   [`localindex`]): projections and unitaries over the noncommutative
//!   torus paired with Fredholm modules and spectral triples, including
//!   residue-trace (local) index formulas.
//! * **Skew-real operator families** ([`kqcycle`], [`nckm`]): quaternionic
//!   real structures, spectral flow mod 2, and Pfaffian orientation sections
//!   giving a ℤ₂ sign without any translation symmetry.
//!
//! All numerical routines validate their structural preconditions (hermiticity,
//! skewness, unitarity, gap conditions) and report residuals and resolution
//! diagnostics through [`error::Error`].

pub mod bloch;
pub mod ccpairing;
pub mod error;
pub mod kqcycle;
pub mod linalg;
pub mod nctorus;
pub mod wire;

pub use error::{Error, Result};
