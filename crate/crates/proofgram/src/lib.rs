//! Knowledge bases as grammar-compressed proof terms.
//!
//! A proof of a theorem is a tree whose inner nodes apply named inference
//! rules (presuppositions) and whose leaves are axioms or parameters standing
//! for hypotheses.  A collection of such proofs is a tree grammar: every
//! theorem contributes one production, and referencing a theorem inside
//! another proof is a nonterminal occurrence.  This crate provides
//!
//! * hash-consed term stores for proof terms and formula terms ([`bank`]),
//! * first-order unification, matching and clause subsumption ([`unify`]),
//! * the condensed-detachment MGT engine deriving the most general theorem
//!   proven by a term, a grammar or a knowledge base ([`cddc`]),
//! * a Metamath database parser, proof verifier and KB extractor
//!   ([`metamath`]),
//! * grammar compression: minimal DAGs, TreeRePair, pruning, nonlinear
//!   compression and reductions ([`compress`]),
//! * KB statistics and KB-to-KB formula comparison ([`stats`]),
//! * proof-dependency networks with scale-free fitting ([`pdnet`]),
//! * a line-oriented textual KB format ([`pgt`]).

pub mod bank;
pub mod cddc;
pub mod compress;
pub mod error;
pub mod formula;
pub mod grammar;
pub mod metamath;
pub mod pdnet;
pub mod pgt;
pub mod stats;
pub mod term;
pub mod unify;

pub use bank::{Bank, FTerm, PTerm, Sym};
pub use error::{Error, ErrorKind, Result};
pub use formula::Clause;
pub use grammar::{Base, Grammar, Kb, Production};
