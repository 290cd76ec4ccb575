//! Estimating the number of linear extensions of a finite poset.
//!
//! The estimators walk one root-to-leaf path of the tree of maximal-element
//! choices, picking each branch with probability proportional to an
//! importance weight, and return the product of inverse branch
//! probabilities. That product is an unbiased estimate of the number of
//! leaves, i.e. of linear extensions.
//!
//! - [`poset`]: dense closure representation, covers, components, random posets
//! - [`oracle`]: exact counting and enumeration for small posets
//! - [`sis`]: the sampling estimators, bounds and batch statistics
//! - [`variance`]: exact relative-variance evaluation for small posets
//! - [`experiment`]: reproducible random-poset experiments with CSV output
//! - [`cli`]: the command implementations behind the `linext` binary

pub mod bitset;
pub mod cli;
pub mod error;
pub mod experiment;
pub mod format;
pub mod oracle;
pub mod poset;
pub mod rng;
pub mod sis;
pub mod variance;

pub use error::{Error, Result};
pub use oracle::{ExactCount, Extension};
pub use poset::{ComponentPartition, CoverDag, Poset};
pub use sis::{BatchStats, ImportanceSpec, LogEstimate, SampledForest};
