//! Orbit deciders, term-set enumeration and orbit-formula emission for
//! finitely presented groups.
//!
//! The library works over *backends*: concrete realizations of a finitely
//! presented group with a decidable word problem (free, free abelian,
//! infinite dihedral, finite via coset enumeration, or a confluent rewriting
//! system). On top of a backend it provides
//!
//! - deciders and semi-deciders for membership of a tuple in the
//!   automorphism orbit of the distinguished generating tuple,
//! - resumable enumerators for the term tuples expressing a tuple from a
//!   relator-satisfying tuple, and for their complement,
//! - construction of the universal orbit formula as a lazily extended
//!   conjunction, emission of the two-part sentence built from it, and a
//!   budgeted evaluator,
//! - self-map probes checking preservation of positive existential
//!   conditions.
//!
//! Every search is budgeted and deterministic: identical inputs and budgets
//! produce identical answers and certificates, and a positive answer at one
//! budget stays positive at any larger budget.

pub mod acceptance;
pub mod backend;
pub mod budget;
pub mod cli;
pub mod error;
pub mod etypes;
pub mod intmat;
pub mod morphism;
pub mod orbit;
pub mod presentation;
pub mod scott;
pub mod terms;
pub mod tsets;
pub mod words;

pub use backend::Backend;
pub use budget::{Budget, SemiOutcome};
pub use error::{Error, Result};
pub use intmat::IntMatrix;
pub use morphism::Endomorphism;
pub use presentation::{GeneratorSymbol, Presentation};
pub use terms::{TermEnumerator, TermTuple};
pub use words::Word;

/// Version tag carried by all JSON outputs.
pub const SCHEMA_VERSION: &str = "1";
