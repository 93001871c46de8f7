//! Constrained Hamiltonian analysis and symplectic reduction for
//! finite-mass reference frames in a translation-invariant particle model.
//!
//! The library mechanizes one pipeline end to end, in exact rational
//! arithmetic wherever the mathematics is exact:
//!
//! - [`constraint`]: Dirac's consistency algorithm, first/second-class
//!   classification, Dirac brackets and gauge transformations;
//! - [`model`]: the three-particle model in cyclic relative coordinates,
//!   its singular Legendre transform and the second-class pair it leaves;
//! - [`frames`]: Darboux charts of the constraint surface (the relative
//!   position and relative momentum frames), transformations between them,
//!   and the heavy-mass limit study;
//! - [`abelian`]: conversion of the second-class pair into commuting
//!   constraints on an extended space, the intermediate gauge-fixed spaces
//!   and the dressing map connecting them;
//! - [`quantize`]: trivialization maps, two-stage symmetry reduction,
//!   frame changes through the perspective-neutral structure, and recovery
//!   of generators from symplectic maps;
//! - [`gaussian`]: Gaussian states as the desk-scale quantum stand-in;
//! - [`scenario`] / [`verify`]: the scenario runner and the full
//!   verification suite behind the `framekit` binary.
//!
//! The [`guide`] module mirrors the mdbook in `book/`; its code blocks are
//! doctests, so the book snippets stay green.

// Indexed loops over matrix entries are the house style in the dense
// linear-algebra code; iterator rewrites obscure the (row, column) math.
#![allow(clippy::needless_range_loop)]
#![allow(clippy::manual_is_multiple_of)]

pub mod abelian;
pub mod constraint;
pub mod error;
pub mod floatmat;
pub mod frames;
pub mod gaussian;
pub mod guide;
pub mod matrix;
pub mod model;
pub mod observable;
pub mod phase_space;
pub mod quantize;
pub mod report;
pub mod sampling;
pub mod scalar;
pub mod scenario;
pub mod symplectic;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Scalar;
