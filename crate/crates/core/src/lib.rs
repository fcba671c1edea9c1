//! Generalised probabilistic theories as convex cones, and certified
//! counterfeiting bounds for Wiesner-style money schemes built on them.
//!
//! The crate is layered bottom-up:
//!
//! * [`cone`] — closed convex cones with membership, interior, dual and
//!   projection oracles.
//! * [`solver`] — cone programs `sup {⟨C,X⟩ : b − φ(X) ∈ K1*, X ∈ K2}` with
//!   their duals, certificates and Slater checks.
//! * [`gpt`] — systems, composites, process cones and causality predicates.
//! * [`money`] — bank strategies and the security quantities built on them.
//! * [`theories`] — classical, quantum, gbit and polygon theories.
//! * [`cli`] — file formats and the command-line front end.

pub mod cli;
pub mod cone;
pub mod error;
pub mod gpt;
pub mod linalg;
pub mod money;
pub mod schema;
pub mod solver;
pub mod theories;

pub use cone::Cone;
pub use error::{Error, Result};
pub use linalg::{LinearOperator, RealVector};
