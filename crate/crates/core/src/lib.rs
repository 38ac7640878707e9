//! Quiver mutation, mutation-class exploration and mutation-acyclicity
//! decisions for small skew-symmetric exchange matrices.

pub mod canonical;
pub mod dataset;
pub mod error;
pub mod matrix;
pub mod proof;
pub mod rank3;
pub mod search;
pub mod seeds;

pub use canonical::{are_isomorphic, canonical_form, CanonicalKey};
pub use dataset::LabeledDataset;
pub use error::{QuiverError, Result};
pub use matrix::{Encoding, ExchangeMatrix};
pub use proof::{audit_ledger, decide, prove_rank4_weight2, ProofConfig, ProofLedger, Witness};
pub use rank3::{classify_rank3_cycle, markov_constant, Rank3Triple, Verdict};
pub use search::{explore_class, ExplorationResult, Explorer, SearchLimits};
