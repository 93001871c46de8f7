//! The narrative guide, shared with the mdbook under `book/`.
//!
//! Each chapter is included verbatim as the documentation of a module
//! below, which turns every Rust code block of the book into a doctest:
//! `cargo test --doc` keeps the book and the library in sync.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/constrained-systems.md")]
pub mod constrained_systems {}

#[doc = include_str!("../../../book/src/dirac-brackets.md")]
pub mod dirac_brackets {}

#[doc = include_str!("../../../book/src/darboux-frames.md")]
pub mod darboux_frames {}

#[doc = include_str!("../../../book/src/abelian-conversion.md")]
pub mod abelian_conversion {}

#[doc = include_str!("../../../book/src/quantum-reduction.md")]
pub mod quantum_reduction {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
