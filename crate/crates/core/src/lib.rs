//! Ontology-based semantic text search.
//!
//! Documents and queries are annotated with the ontological features of the
//! named entities and lexicon words they mention, queries are expanded with
//! latent concepts through relation-constrained spreading activation, and
//! retrieval runs over a generalized vector space model whose terms are
//! entity triple patterns, word features, and keywords. An evaluation module
//! measures retrieval quality with standard TREC-style metrics and a paired
//! randomization significance test.
//!
//! The crate is organized along the pipeline:
//!
//! - [`ontology`]: the entity, lexicon, and fact stores plus the
//!   relation-phrase dictionary, loaded from line-oriented files.
//! - [`lexicon`]: stop words, lemmas, and tokenization.
//! - [`wsd`]: personalized PageRank sense disambiguation with the
//!   most-specific-common-hypernym fallback for tied senses.
//! - [`annotation`]: document and query processing into generalized terms.
//! - [`rcsa`]: latent-concept discovery and the unconstrained baseline.
//! - [`vsm`]: the inverted index with TF-IDF weights and cosine ranking.
//! - [`eval`]: average precision, MAP, interpolated P-R/F-R curves, and the
//!   randomization test.
//! - [`pipeline`]: an [`Engine`](pipeline::Engine) wiring it all together
//!   for one model configuration.

pub mod annotation;
pub mod config;
pub mod corpus;
pub mod eval;
pub mod lexicon;
mod matcher;
pub mod ontology;
pub mod pipeline;
pub mod rcsa;
pub mod term;
pub mod vsm;
pub mod wsd;

pub use annotation::{AnnotatedDocument, QueryRepresentation};
pub use config::{Expansion, LatentRendering, ModelConfig, PRESET_NAMES};
pub use corpus::RawDocument;
pub use lexicon::Lexicon;
pub use ontology::{ConceptKind, ConceptRef, OntologyPaths, OntologyStore};
pub use pipeline::Engine;
pub use term::GeneralizedTerm;
pub use vsm::{InvertedIndex, ScoredDoc};
