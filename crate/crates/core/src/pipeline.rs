//! End-to-end wiring: corpus annotation, index construction, and query
//! representation with the configured expansion strategy.

use serde_json::json;

use crate::annotation::{tokenize_and_filter, AnnotatedDocument, Annotator, QueryRepresentation};
use crate::config::{Expansion, LatentRendering, ModelConfig};
use crate::corpus::RawDocument;
use crate::lexicon::{tokenize_raw, Lexicon};
use crate::ontology::{ConceptRef, OntologyStore};
use crate::rcsa::{self, ConceptMention, LatentConcept, QueryTriple};
use crate::term::GeneralizedTerm;
use crate::vsm::{InvertedIndex, ScoredDoc, VsmError};
use crate::wsd::{build_sense_graph, SenseGraph};

/// A loaded store, its sense graph, the lexicon, and one model
/// configuration.
pub struct Engine {
    pub store: OntologyStore,
    pub graph: SenseGraph,
    pub lexicon: Lexicon,
    pub config: ModelConfig,
}

/// What query expansion produced, with enough detail to explain it.
#[derive(Debug, Clone, Default)]
pub struct ExpansionOutcome {
    pub initial_concepts: Vec<ConceptMention>,
    pub triples: Vec<QueryTriple>,
    pub latents: Vec<LatentConcept>,
    /// One JSON line per latent concept.
    pub trace: Vec<String>,
}

impl Engine {
    pub fn new(store: OntologyStore, lexicon: Lexicon, config: ModelConfig) -> Self {
        let graph = build_sense_graph(&store);
        Self {
            store,
            graph,
            lexicon,
            config,
        }
    }

    pub fn annotator(&self) -> Annotator<'_> {
        Annotator {
            store: &self.store,
            graph: &self.graph,
            lexicon: &self.lexicon,
            config: &self.config,
        }
    }

    pub fn annotate_corpus(&self, docs: &[RawDocument]) -> Vec<AnnotatedDocument> {
        let annotator = self.annotator();
        docs.iter()
            .map(|d| annotator.annotate_document(&d.id, &d.text))
            .collect()
    }

    pub fn build_index(&self, docs: &[RawDocument]) -> Result<InvertedIndex, VsmError> {
        InvertedIndex::build(&self.annotate_corpus(docs))
    }

    /// Full query representation: base terms from annotation plus latent
    /// terms from the configured expansion.
    pub fn represent_query(&self, query_id: &str, text: &str) -> QueryRepresentation {
        let mut query = self.annotator().represent_query(query_id, text);
        match self.config.expansion {
            Expansion::None => {}
            Expansion::Rcsa => {
                let outcome = self.rcsa_expansion(text);
                for latent in &outcome.latents {
                    let provenance = latent.provenance.trace_json(&latent.concept);
                    for term in self.render_latent(&latent.concept) {
                        if !query.latent_terms.iter().any(|(t, _)| *t == term) {
                            query.latent_terms.push((term, provenance.clone()));
                        }
                    }
                }
            }
            Expansion::Csa => {
                let concepts: Vec<ConceptRef> = self
                    .initial_concepts(text)
                    .into_iter()
                    .map(|m| m.concept)
                    .collect();
                for (concept, fact) in rcsa::csa_neighbor_concepts(&concepts, &self.store, 1) {
                    let provenance = json!({
                        "concept": concept.to_string(),
                        "branch": "csa",
                        "edge_fact": fact.to_string(),
                    })
                    .to_string();
                    for term in self.render_latent(&concept) {
                        if !query.latent_terms.iter().any(|(t, _)| *t == term) {
                            query.latent_terms.push((term, provenance.clone()));
                        }
                    }
                }
            }
        }
        query
    }

    /// Runs the relation-constrained expansion and keeps every intermediate
    /// product for tracing.
    pub fn rcsa_expansion(&self, text: &str) -> ExpansionOutcome {
        let tokens = tokenize_raw(text);
        let mentions = rcsa::recognize_relation_phrases(&tokens, &self.store);
        let concepts = rcsa::recognize_initial_concepts(&tokens, &self.store, &self.lexicon);
        let triples = rcsa::form_triples(&concepts, &mentions, &self.store);
        let mut latents: Vec<LatentConcept> = Vec::new();
        for triple in &triples {
            for latent in rcsa::derive_latent_concepts(triple, &self.store) {
                let is_initial = concepts.iter().any(|c| c.concept == latent.concept);
                let seen = latents.iter().any(|l| l.concept == latent.concept);
                if !is_initial && !seen {
                    latents.push(latent);
                }
            }
        }
        let trace = latents
            .iter()
            .map(|l| l.provenance.trace_json(&l.concept))
            .collect();
        ExpansionOutcome {
            initial_concepts: concepts,
            triples,
            latents,
            trace,
        }
    }

    pub fn initial_concepts(&self, text: &str) -> Vec<ConceptMention> {
        let tokens = tokenize_raw(text);
        rcsa::recognize_initial_concepts(&tokens, &self.store, &self.lexicon)
    }

    /// Renders one latent concept per the model's latent rendering: entity
    /// patterns and word forms, or plain keywords over the same surface.
    fn render_latent(&self, concept: &ConceptRef) -> Vec<GeneralizedTerm> {
        let rendered = rcsa::render_concept(concept, &self.store);
        match self.config.latent_rendering {
            LatentRendering::NeWw => rendered,
            LatentRendering::Keyword => {
                let mut out = Vec::new();
                for term in rendered {
                    let surface = match &term {
                        GeneralizedTerm::NeTriple {
                            name: Some(name), ..
                        } => name.clone(),
                        GeneralizedTerm::WwForm { form } => form.clone(),
                        other => other.serialized(),
                    };
                    for stem in tokenize_and_filter(&surface, &self.lexicon) {
                        let term = GeneralizedTerm::keyword(stem);
                        if !out.contains(&term) {
                            out.push(term);
                        }
                    }
                }
                out
            }
        }
    }

    /// Represents the query and ranks the top `k` documents.
    pub fn search(
        &self,
        index: &InvertedIndex,
        query_id: &str,
        text: &str,
        k: usize,
    ) -> Result<(QueryRepresentation, Vec<ScoredDoc>), VsmError> {
        let query = self.represent_query(query_id, text);
        let hits = index.search(&query, k, self.config.latent_term_weight)?;
        Ok((query, hits))
    }
}
