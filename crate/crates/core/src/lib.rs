//! Proof kernel for the display calculus D'.EAK.
//!
//! The crate is layered: [`syntax`] and [`parser`] define and read terms,
//! [`calculus`] holds rule schemas and rule application, [`proofs`] checks
//! derivations and tracks occurrences, [`cutelim`] lints a calculus and
//! removes cuts, [`semantics`] is a finite-model oracle, and [`corpus`]
//! ships worked derivations.

pub mod calculus;
pub mod corpus;
pub mod cutelim;
pub mod parser;
pub mod proofs;
pub mod semantics;
pub mod syntax;

pub use calculus::{builtin_deak_legacy, builtin_deak_prime, Assignment, Calculus, RuleSchema};
pub use parser::{
    parse_formula, parse_model, parse_proof_file, parse_proofs, parse_sequent, parse_structure, render, Declarations,
    ParseError, Render,
};
pub use proofs::{check, CheckReport, ProofTree};
pub use semantics::KripkeModel;
pub use syntax::{ActionLabel, ActionStructure, Agent, Formula, Path, Polarity, Sequent, Step, Structure, SyntaxError};
