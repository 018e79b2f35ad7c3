//! Finite-truncation numerics for q-deformed Araki-Woods von Neumann algebras.
//!
//! The crate builds the one-particle space of an almost periodic orthogonal
//! representation of the reals (fixed lines plus rotation blocks), the
//! truncated q-Fock space over it, the left/right creation and annihilation
//! operators, the Tomita-Takesaki data of the vacuum state, and the
//! generator-masa diagnostics (conditional expectations, `T_{x,y}` matrices,
//! Hilbert-Schmidt partial sums).
//!
//! Everything is finite-dimensional. Operators are dense matrices on the word
//! basis of the truncated Fock space, and every operator records the largest
//! input degree on which truncation does not change its action.

pub mod error;
pub mod fock;
pub mod hilbert;
pub mod mixing;
pub mod modular;
pub mod ops;
pub mod spectral;

pub use error::{Error, Result};
pub use fock::{
    c_q_constant, q_bracket, q_factorial, q_gram, q_gram_bruteforce, FockBasis, FockSpace,
    FockVector, GramCache, Word,
};
pub use hilbert::{build_space, EigenBasisVector, Power, RepresentationSpec, SpaceContext};
pub use ops::FockOperator;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Default tolerance for membership predicates (real vectors, `H_R'` tests).
pub const DEFAULT_MEMBERSHIP_TOL: f64 = 1e-10;
