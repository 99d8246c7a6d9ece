//! A knowledge base of typed scholarly claims.
//!
//! Authors submit summaries of what their documents contribute and how those
//! contributions relate to prior work. The [`kb`] stores them as concepts,
//! articles and author-attributed [`kb::Claim`]s validated against a
//! [`schema::SchemaRegistry`]; [`inference`] derives tentative facts
//! (inconsistent positions, challenge propagation, impact, perspectives);
//! [`query`] answers structural questions and extracts concept maps; [`store`]
//! persists accepted submissions in a replayable event log.

pub mod dsl;
pub mod ids;
pub mod inference;
pub mod ingest;
pub mod kb;
pub mod query;
pub mod schema;
pub mod store;

pub use ids::{canonicalize_id, ClaimId};
pub use kb::{Assertion, Claim, Justification, KnowledgeBase};
pub use schema::SchemaRegistry;
