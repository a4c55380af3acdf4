//! Tools for finding the most conflicting pair of candidates in an ordinal
//! election: exact pair-conflict scores and polarization metrics, the voting
//! rules built on them, axiom decision procedures with randomized
//! counterexample search, synthetic profile generators, and PrefLib-style
//! data ingestion.
//!
//! All scores and metrics are computed in exact integer/rational arithmetic;
//! floating point only appears at serialization boundaries and in samplers.
//!
//! The `parallel` feature (on by default) runs all-pairs assessment, axiom
//! audits, and batch experiments on a rayon pool. Disabling it swaps in
//! sequential fallbacks with identical results.

pub mod axioms;
pub mod experiments;
pub mod fixtures;
pub mod generators;
pub mod metrics;
pub mod preflib;
pub mod profile;
pub mod rules;

pub use metrics::{ConflictMode, PairAssessment, Rational};
pub use profile::{Ballot, CandidateId, Pair, Profile};
pub use rules::{RuleId, RuleOutcome, Score};
