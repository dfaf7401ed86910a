//! Latent-concept discovery for queries: relation-phrase recognition, triple
//! formation, and relation-constrained spreading activation, plus the
//! unconstrained one-hop baseline.
//!
//! Spreading is limited to direct links, and the fact-store relation used for
//! spreading must appear in the query itself. Every derived concept carries a
//! replayable justification: one ontology edge and one supporting fact.

use serde_json::json;

use crate::annotation::Span;
use crate::lexicon::Lexicon;
use crate::ontology::{ConceptKind, ConceptRef, Fact, OntologyStore};
use crate::term::GeneralizedTerm;

/// Containment relation used when spreading from a located entity.
pub const PART_OF_RELATION: &str = "isPartOf";
/// Class that marks an entity as a location.
pub const LOCATION_CLASS: &str = "Location";
/// Maximum token gap between a verb phrase and a following spatial phrase
/// for the two to fuse into one relation mention.
pub const VERB_SPATIAL_WINDOW: usize = 4;

/// A relation phrase found in the raw token stream. When a verb phrase
/// directly precedes a spatial phrase ("born in the north of"), the fused
/// mention carries the spatial relation and records the verb's relation in
/// `verb_relation`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationMention {
    pub span: Span,
    pub relation: String,
    pub is_spatial: bool,
    pub verb_relation: Option<String>,
}

/// A concept found in the query, with the tokens it covers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptMention {
    pub span: Span,
    pub concept: ConceptRef,
}

/// What kind of concept sits in the typed `C2` slot of a query triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum C2Kind {
    /// An identified entity whose class descends from `Location`.
    LocatedEntity,
    /// An entity class.
    NeClass,
    /// A synset.
    Ww,
}

/// One relation of the query in `C1 R C2` form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryTriple {
    pub c1: ConceptRef,
    pub relation: String,
    pub c2: ConceptRef,
    pub c2_kind: C2Kind,
    /// Spatial relation, when the mention was or contained a spatial phrase.
    pub r_spatial: Option<String>,
    /// Verb relation fused with a spatial phrase.
    pub r_fact: Option<String>,
}

/// Which derivation rule produced a latent concept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Spatial fact into `C2` plus the verb's fact from `C1`.
    LocatedSpatial,
    /// Part-of edge into `C2` plus the query relation's fact from `C1`.
    LocatedPartOf,
    /// Instance of the query class plus the query relation's fact from `C1`.
    ClassInstance,
    /// Hyponym of the query synset plus the query relation's fact from `C1`.
    Hyponym,
}

impl Branch {
    pub fn label(self) -> &'static str {
        match self {
            Branch::LocatedSpatial => "located_spatial",
            Branch::LocatedPartOf => "located_part_of",
            Branch::ClassInstance => "class_instance",
            Branch::Hyponym => "hyponym",
        }
    }
}

/// The ontology edge half of a latent concept's justification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EdgeJustification {
    /// A fact of the store (spatial or part-of edge).
    Fact(Fact),
    /// `entity`'s class equals or descends from `query_class`.
    ClassMembership {
        entity: String,
        class: String,
        query_class: String,
    },
    /// `query_synset` is a strict hypernym of `synset`.
    HypernymPath {
        synset: String,
        query_synset: String,
    },
}

impl EdgeJustification {
    fn describe(&self) -> String {
        match self {
            EdgeJustification::Fact(fact) => fact.to_string(),
            EdgeJustification::ClassMembership {
                entity,
                class,
                query_class,
            } => {
                format!("class(ent:{entity}) = {class} <= {query_class}")
            }
            EdgeJustification::HypernymPath {
                synset,
                query_synset,
            } => {
                format!("ww:{synset} is_hyponym_of ww:{query_synset}")
            }
        }
    }
}

/// Why a latent concept was added: the branch that fired, the ontology edge,
/// and the supporting fact, all replayable against the store.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub branch: Branch,
    pub edge: EdgeJustification,
    pub support: Fact,
}

impl Provenance {
    /// One-line JSON trace record for a derived concept.
    pub fn trace_json(&self, concept: &ConceptRef) -> String {
        json!({
            "concept": concept.to_string(),
            "branch": self.branch.label(),
            "edge_fact": self.edge.describe(),
            "support_fact": self.support.to_string(),
        })
        .to_string()
    }
}

/// A concept absent from the query text but justified by a query relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatentConcept {
    pub concept: ConceptRef,
    pub provenance: Provenance,
}

/// Scans the unfiltered token stream for relation phrases (stop words like
/// "in" carry relations, so this runs before stop-word removal), then fuses
/// each verb phrase with a spatial phrase that follows within
/// [`VERB_SPATIAL_WINDOW`] tokens.
pub fn recognize_relation_phrases(
    tokens: &[String],
    store: &OntologyStore,
) -> Vec<RelationMention> {
    let matcher = store.relation_matcher();
    let mut raw = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        if let Some((len, (relation, is_spatial))) = matcher.longest_match_at(tokens, i) {
            raw.push(RelationMention {
                span: Span::new(i, i + len),
                relation: relation.clone(),
                is_spatial: *is_spatial,
                verb_relation: None,
            });
            i += len;
        } else {
            i += 1;
        }
    }
    let mut out = Vec::new();
    let mut iter = raw.into_iter().peekable();
    while let Some(mention) = iter.next() {
        let fuse = match iter.peek() {
            Some(next) => {
                !mention.is_spatial
                    && next.is_spatial
                    && next.span.start - mention.span.end <= VERB_SPATIAL_WINDOW
            }
            None => false,
        };
        if fuse {
            let spatial = iter.next().unwrap();
            out.push(RelationMention {
                span: Span::new(mention.span.start, spatial.span.end),
                relation: spatial.relation,
                is_spatial: true,
                verb_relation: Some(mention.relation),
            });
        } else {
            out.push(mention);
        }
    }
    out
}

/// Finds the query's initial concepts by mapping token spans to entity
/// names, class labels, and word forms, in span order. Entity and class
/// matches take precedence over word-form matches on overlapping spans;
/// ambiguous entity names and multi-sense forms contribute no concept.
pub fn recognize_initial_concepts(
    tokens: &[String],
    store: &OntologyStore,
    lexicon: &Lexicon,
) -> Vec<ConceptMention> {
    let lemmas: Vec<String> = tokens
        .iter()
        .map(|t| lexicon.lemma(t).to_string())
        .collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < lemmas.len() {
        if let Some((len, payload)) = store.concept_matcher().longest_match_at(&lemmas, i) {
            let concept = if payload.entity_ids.len() == 1 {
                Some(ConceptRef::entity(payload.entity_ids[0].clone()))
            } else if payload.entity_ids.is_empty() {
                payload.class_id.clone().map(ConceptRef::class)
            } else {
                None // ambiguous name, consume without a concept
            };
            if let Some(concept) = concept {
                out.push(ConceptMention {
                    span: Span::new(i, i + len),
                    concept,
                });
            }
            i += len;
            continue;
        }
        if let Some((len, payload)) = store.form_matcher().longest_match_at(&lemmas, i) {
            if payload.synset_ids.len() == 1 {
                out.push(ConceptMention {
                    span: Span::new(i, i + len),
                    concept: ConceptRef::synset(payload.synset_ids[0].clone()),
                });
            }
            i += len;
            continue;
        }
        i += 1;
    }
    out
}

/// Pairs each relation mention with its nearest concept on each side:
/// `C1` ends before the mention, `C2` starts after it. Mentions lacking
/// either side produce no triple. When the surface order is reversed — a
/// class concept on the left of the relation and an entity on the right
/// ("cities ... of Thailand") — the class is moved into the typed `C2` slot.
pub fn form_triples(
    concepts: &[ConceptMention],
    mentions: &[RelationMention],
    store: &OntologyStore,
) -> Vec<QueryTriple> {
    let mut out = Vec::new();
    for mention in mentions {
        let left = concepts
            .iter()
            .filter(|c| c.span.end <= mention.span.start)
            .max_by_key(|c| c.span.end);
        let right = concepts
            .iter()
            .filter(|c| c.span.start >= mention.span.end)
            .min_by_key(|c| c.span.start);
        let (Some(left), Some(right)) = (left, right) else {
            continue;
        };
        if let Some(triple) = classify(&left.concept, &right.concept, mention, store) {
            out.push(triple);
        }
    }
    out
}

fn classify(
    left: &ConceptRef,
    right: &ConceptRef,
    mention: &RelationMention,
    store: &OntologyStore,
) -> Option<QueryTriple> {
    let (c1, c2, c2_kind) = match right.kind {
        ConceptKind::Class => (left.clone(), right.clone(), C2Kind::NeClass),
        ConceptKind::Synset => (left.clone(), right.clone(), C2Kind::Ww),
        ConceptKind::Entity => {
            if left.kind == ConceptKind::Class {
                // Reversed direction: the entity is the fact subject and the
                // class takes the typed slot.
                (right.clone(), left.clone(), C2Kind::NeClass)
            } else if entity_is_located(right, store) {
                (left.clone(), right.clone(), C2Kind::LocatedEntity)
            } else {
                return None;
            }
        }
    };
    let (r_spatial, r_fact) = if mention.is_spatial {
        (
            Some(mention.relation.clone()),
            mention.verb_relation.clone(),
        )
    } else {
        (None, None)
    };
    Some(QueryTriple {
        c1,
        relation: mention.relation.clone(),
        c2,
        c2_kind,
        r_spatial,
        r_fact,
    })
}

fn entity_is_located(concept: &ConceptRef, store: &OntologyStore) -> bool {
    store
        .entity(&concept.id)
        .map(|e| store.class_descends_from(&e.class_id, LOCATION_CLASS))
        .unwrap_or(false)
}

/// Derives the latent concepts of one query triple. Exactly one branch fires,
/// chosen by the kind of `C2`:
///
/// - located entity with a fused verb+spatial relation: `C4 R_S C2` among the
///   spatial facts and `C1 R_F C4` in the fact store;
/// - located entity otherwise: `C4 isPartOf C2` and `C1 R C4`;
/// - entity class: `C4` an entity of the class (or a descendant) with
///   `C1 R C4`;
/// - synset: `C4` a strict hyponym of `C2` with `C1 R C4`.
///
/// Spreading never leaves the one-hop neighborhood, and the supporting fact's
/// relation is always one expressed in the query.
pub fn derive_latent_concepts(triple: &QueryTriple, store: &OntologyStore) -> Vec<LatentConcept> {
    let mut out: Vec<LatentConcept> = Vec::new();
    let mut push = |concept: ConceptRef, provenance: Provenance| {
        if concept != triple.c1 && concept != triple.c2 && !out.iter().any(|l| l.concept == concept)
        {
            out.push(LatentConcept {
                concept,
                provenance,
            });
        }
    };
    match triple.c2_kind {
        C2Kind::LocatedEntity => {
            let spatial_pair = triple.r_spatial.as_deref().zip(triple.r_fact.as_deref());
            let (edge_relation, support_relation, branch) = match spatial_pair {
                Some((r_s, r_f)) => (r_s, r_f, Branch::LocatedSpatial),
                None => (
                    PART_OF_RELATION,
                    triple.relation.as_str(),
                    Branch::LocatedPartOf,
                ),
            };
            let edges = store
                .facts_matching(None, Some(edge_relation), Some(&triple.c2))
                .expect("relation bound");
            for edge in edges {
                let candidate = edge.subject.clone();
                if candidate.kind != ConceptKind::Entity {
                    continue;
                }
                let supports = store
                    .facts_matching(Some(&triple.c1), Some(support_relation), Some(&candidate))
                    .expect("all bound");
                if let Some(support) = supports.first() {
                    push(
                        candidate,
                        Provenance {
                            branch,
                            edge: EdgeJustification::Fact(edge.clone()),
                            support: (*support).clone(),
                        },
                    );
                }
            }
        }
        C2Kind::NeClass => {
            let supports = store
                .facts_matching(Some(&triple.c1), Some(&triple.relation), None)
                .expect("subject bound");
            for support in supports {
                let candidate = support.object.clone();
                if candidate.kind != ConceptKind::Entity {
                    continue;
                }
                let Some(entity) = store.entity(&candidate.id) else {
                    continue;
                };
                if store.class_descends_from(&entity.class_id, &triple.c2.id) {
                    push(
                        candidate.clone(),
                        Provenance {
                            branch: Branch::ClassInstance,
                            edge: EdgeJustification::ClassMembership {
                                entity: entity.entity_id.clone(),
                                class: entity.class_id.clone(),
                                query_class: triple.c2.id.clone(),
                            },
                            support: support.clone(),
                        },
                    );
                }
            }
        }
        C2Kind::Ww => {
            let supports = store
                .facts_matching(Some(&triple.c1), Some(&triple.relation), None)
                .expect("subject bound");
            for support in supports {
                let candidate = support.object.clone();
                if candidate.kind != ConceptKind::Synset {
                    continue;
                }
                let Ok(closure) = store.hypernym_closure(&candidate.id) else {
                    continue;
                };
                if candidate.id != triple.c2.id && closure.contains_key(&triple.c2.id) {
                    push(
                        candidate.clone(),
                        Provenance {
                            branch: Branch::Hyponym,
                            edge: EdgeJustification::HypernymPath {
                                synset: candidate.id.clone(),
                                query_synset: triple.c2.id.clone(),
                            },
                            support: support.clone(),
                        },
                    );
                }
            }
        }
    }
    out
}

/// Renders a concept the way latent concepts enter the query: an entity by
/// its main name pattern, a synset by each of its forms, a class by its
/// class pattern.
pub fn render_concept(concept: &ConceptRef, store: &OntologyStore) -> Vec<GeneralizedTerm> {
    match concept.kind {
        ConceptKind::Entity => store
            .entity(&concept.id)
            .map(|e| {
                vec![GeneralizedTerm::ne_triple(
                    Some(&crate::ontology::normalize_phrase(&e.main_name)),
                    None,
                    None,
                )]
            })
            .unwrap_or_default(),
        ConceptKind::Synset => store
            .synset(&concept.id)
            .map(|s| s.forms.iter().map(GeneralizedTerm::ww_form).collect())
            .unwrap_or_default(),
        ConceptKind::Class => vec![GeneralizedTerm::ne_triple(None, Some(&concept.id), None)],
    }
}

/// Renders derived latent concepts as query terms, deduplicated and
/// order-stable.
pub fn render_latent_concepts(
    latents: &[LatentConcept],
    store: &OntologyStore,
) -> Vec<GeneralizedTerm> {
    let mut out = Vec::new();
    for latent in latents {
        for term in render_concept(&latent.concept, store) {
            if !out.contains(&term) {
                out.push(term);
            }
        }
    }
    out
}

/// One-hop neighbors of the initial concepts in the fact store, in either
/// direction and regardless of relation, each with the first fact that
/// connected it. Initial concepts themselves are excluded.
pub fn csa_neighbor_concepts(
    initial: &[ConceptRef],
    store: &OntologyStore,
    hop_limit: usize,
) -> Vec<(ConceptRef, Fact)> {
    let mut found: Vec<(ConceptRef, Fact)> = Vec::new();
    let mut frontier: Vec<ConceptRef> = initial.to_vec();
    for _ in 0..hop_limit {
        let mut next = Vec::new();
        for fact in store.facts() {
            for (from, to) in [(&fact.subject, &fact.object), (&fact.object, &fact.subject)] {
                if frontier.contains(from)
                    && !initial.contains(to)
                    && !found.iter().any(|(c, _)| c == to)
                {
                    found.push((to.clone(), fact.clone()));
                    next.push(to.clone());
                }
            }
        }
        frontier = next;
    }
    found
}

/// The unconstrained baseline: broadcast all direct fact links from the
/// query's concepts and render every neighbor, deliberately ignoring which
/// relations the query expresses.
pub fn csa_expand(
    initial: &[ConceptRef],
    store: &OntologyStore,
    hop_limit: usize,
) -> Vec<GeneralizedTerm> {
    let mut out = Vec::new();
    for (concept, _) in csa_neighbor_concepts(initial, store, hop_limit) {
        for term in render_concept(&concept, store) {
            if !out.contains(&term) {
                out.push(term);
            }
        }
    }
    out
}
