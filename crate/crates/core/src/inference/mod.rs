//! Rule services over a knowledge-base snapshot.
//!
//! Every operation here is read-only: inferred facts are returned to the
//! caller and never written back as claims. Output is sorted by canonical id
//! so identical inputs give identical fact lists.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ids::ClaimId;

pub mod challenges;
pub mod consistency;
pub mod impact;
pub mod perspectives;
pub mod profile;

pub use challenges::{propagate_challenges, PropagationConfig};
pub use consistency::detect_inconsistent_positions;
pub use impact::{compute_impact, ImpactReport, ImpactWeights};
pub use perspectives::{detect_perspectives, PerspectiveConfig, SharedConcepts};
pub use profile::{detect_schools_of_thought, evaluate_profile, Alert, InterestProfile};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InferenceError {
    #[error("unknown id `{0}`")]
    UnknownId(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "kebab-case")]
pub enum Fact {
    /// `author` is among the authors of a claim supporting `assertion` and of
    /// another claim refuting it.
    InconsistentPosition { author: String, assertion: String },
    /// `element` builds on a challenged element; `via` runs from `element` to
    /// the challenged one.
    MayBeChallenged { element: String, via: Vec<String> },
    /// Documents support `first` while challenging `second`, and others do
    /// the reverse.
    SchoolOfThought { first: String, second: String },
    Perspective {
        authors: Vec<String>,
        concepts: SharedConcepts,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct InferredFact {
    #[serde(flatten)]
    pub fact: Fact,
    pub provenance: Vec<ClaimId>,
}
