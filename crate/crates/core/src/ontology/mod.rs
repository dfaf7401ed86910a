//! The three fixture-backed ontologies behind the search engine: the named
//! entity ontology (class hierarchy plus entity records), the lexicon
//! (synsets with a hypernym DAG), and the fact store (subject-relation-object
//! triples), together with the relation-phrase dictionary.
//!
//! Everything is immutable after [`OntologyStore::load`]; all read operations
//! are safe to call concurrently.

mod load;

pub use load::OntologyPaths;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::lexicon::tokenize_raw;
use crate::matcher::PhraseMatcher;

/// Which of the three stores a [`ConceptRef`] id lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConceptKind {
    Entity,
    Synset,
    Class,
}

impl ConceptKind {
    fn prefix(self) -> &'static str {
        match self {
            ConceptKind::Entity => "ent",
            ConceptKind::Synset => "ww",
            ConceptKind::Class => "cls",
        }
    }
}

/// Tagged reference to an entity, a synset, or a class; the universal node
/// identity across the three ontologies. Rendered as `ent:x`, `ww:x`, `cls:x`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConceptRef {
    pub kind: ConceptKind,
    pub id: String,
}

impl ConceptRef {
    pub fn entity(id: impl Into<String>) -> Self {
        Self {
            kind: ConceptKind::Entity,
            id: id.into(),
        }
    }

    pub fn synset(id: impl Into<String>) -> Self {
        Self {
            kind: ConceptKind::Synset,
            id: id.into(),
        }
    }

    pub fn class(id: impl Into<String>) -> Self {
        Self {
            kind: ConceptKind::Class,
            id: id.into(),
        }
    }

    /// Parses the `ent:`/`ww:`/`cls:` prefixed form.
    pub fn parse(s: &str) -> Option<Self> {
        let (prefix, id) = s.split_once(':')?;
        if id.is_empty() {
            return None;
        }
        let kind = match prefix {
            "ent" => ConceptKind::Entity,
            "ww" => ConceptKind::Synset,
            "cls" => ConceptKind::Class,
            _ => return None,
        };
        Some(Self {
            kind,
            id: id.to_string(),
        })
    }
}

impl fmt::Display for ConceptRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind.prefix(), self.id)
    }
}

/// Node of the entity class DAG. `parent_ids` point toward more general
/// classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassNode {
    pub class_id: String,
    pub label: String,
    pub parent_ids: BTreeSet<String>,
}

/// A named entity: main name, aliases, and its class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityRecord {
    pub entity_id: String,
    pub main_name: String,
    pub aliases: BTreeSet<String>,
    pub class_id: String,
}

/// Non-hypernym lexicon edge types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeType {
    Hyponym,
    Holonym,
    Meronym,
    Similarity,
}

impl EdgeType {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "hyponym" => Some(Self::Hyponym),
            "holonym" => Some(Self::Holonym),
            "meronym" => Some(Self::Meronym),
            "similarity" => Some(Self::Similarity),
            _ => None,
        }
    }
}

/// A sense: a set of synonymous word forms plus its taxonomy edges. Hyponym
/// edges are exact inverses of hypernym edges once the store is loaded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Synset {
    pub synset_id: String,
    pub forms: BTreeSet<String>,
    pub hypernym_ids: BTreeSet<String>,
    pub other_edges: BTreeSet<(EdgeType, String)>,
}

/// One assertion of the fact store.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fact {
    pub subject: ConceptRef,
    pub relation: String,
    pub object: ConceptRef,
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {} {})", self.subject, self.relation, self.object)
    }
}

/// One row of the relation-phrase dictionary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationPhraseEntry {
    pub phrase: String,
    pub relation: String,
    pub is_spatial: bool,
}

/// Result of a longest-match lookup in the phrase dictionary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationPhraseMatch {
    /// Number of tokens the matched phrase covers.
    pub token_len: usize,
    pub relation: String,
    pub is_spatial: bool,
}

/// Payload of the entity/class gazetteer for one normalized surface phrase.
#[derive(Debug, Clone, Default)]
pub(crate) struct NamePayload {
    /// Entity ids sharing this name or alias, sorted.
    pub entity_ids: Vec<String>,
    /// Class whose label equals this phrase, if any.
    pub class_id: Option<String>,
}

/// Payload of the word-form gazetteer for one normalized form.
#[derive(Debug, Clone)]
pub(crate) struct FormPayload {
    /// The form as stored in the lexicon (e.g. "bullet-resistant suit").
    pub display: String,
    /// Synsets carrying this form, sorted.
    pub synset_ids: Vec<String>,
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },
    #[error("{context}: unresolved reference `{id}`")]
    DanglingRef { context: String, id: String },
    #[error("cycle in {graph} hierarchy involving `{id}`")]
    Cycle { graph: &'static str, id: String },
    #[error(
        "synset `{synset}` declares a hyponym edge to `{target}` with no inverse hypernym edge"
    )]
    HyponymWithoutInverse { synset: String, target: String },
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("unknown synset `{0}`")]
    UnknownSynset(String),
    #[error("msc_hypernym requires a nonempty sense set")]
    EmptySenseSet,
    #[error("no common hypernym for senses {0:?}")]
    NoCommonHypernym(Vec<String>),
    #[error("facts_matching requires at least one bound position")]
    UnboundedFactQuery,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Normalizes a name, label, or form for matching: lowercase, split on
/// non-alphanumerics, joined by single spaces.
pub fn normalize_phrase(s: &str) -> String {
    tokenize_raw(s).join(" ")
}

/// All ontology data, loaded and validated. See [`OntologyStore::load`].
#[derive(Debug)]
pub struct OntologyStore {
    classes: BTreeMap<String, ClassNode>,
    entities: BTreeMap<String, EntityRecord>,
    synsets: BTreeMap<String, Synset>,
    facts: Vec<Fact>,
    phrases: Vec<RelationPhraseEntry>,
    // Derived lookup structures, built once at load time.
    name_index: HashMap<String, Vec<String>>,
    form_index: HashMap<String, Vec<String>>,
    concept_matcher: PhraseMatcher<NamePayload>,
    form_matcher: PhraseMatcher<FormPayload>,
    phrase_matcher: PhraseMatcher<(String, bool)>,
    root_depths: HashMap<String, usize>,
}

impl OntologyStore {
    pub fn class(&self, id: &str) -> Option<&ClassNode> {
        self.classes.get(id)
    }

    pub fn entity(&self, id: &str) -> Option<&EntityRecord> {
        self.entities.get(id)
    }

    pub fn synset(&self, id: &str) -> Option<&Synset> {
        self.synsets.get(id)
    }

    pub fn classes(&self) -> impl Iterator<Item = &ClassNode> {
        self.classes.values()
    }

    pub fn entities(&self) -> impl Iterator<Item = &EntityRecord> {
        self.entities.values()
    }

    pub fn synsets(&self) -> impl Iterator<Item = &Synset> {
        self.synsets.values()
    }

    pub fn facts(&self) -> &[Fact] {
        &self.facts
    }

    pub fn relation_phrases(&self) -> &[RelationPhraseEntry] {
        &self.phrases
    }

    /// Does `concept` resolve in the store named by its kind?
    pub fn resolves(&self, concept: &ConceptRef) -> bool {
        match concept.kind {
            ConceptKind::Entity => self.entities.contains_key(&concept.id),
            ConceptKind::Synset => self.synsets.contains_key(&concept.id),
            ConceptKind::Class => self.classes.contains_key(&concept.id),
        }
    }

    /// Every entity whose main name or alias equals `name` after lowercasing
    /// and whitespace normalization, sorted by entity id.
    pub fn entities_by_name(&self, name: &str) -> Vec<&EntityRecord> {
        self.name_index
            .get(&normalize_phrase(name))
            .map(|ids| ids.iter().map(|id| &self.entities[id]).collect())
            .unwrap_or_default()
    }

    /// All strict ancestors of `class_id` in breadth-first order, deduplicated.
    pub fn super_classes(&self, class_id: &str) -> Result<Vec<String>, StoreError> {
        let start = self
            .classes
            .get(class_id)
            .ok_or_else(|| StoreError::UnknownClass(class_id.to_string()))?;
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        let mut frontier: Vec<&String> = start.parent_ids.iter().collect();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for id in frontier {
                if seen.insert(id.clone()) {
                    out.push(id.clone());
                    next.extend(self.classes[id].parent_ids.iter());
                }
            }
            frontier = next;
        }
        Ok(out)
    }

    /// True when `class_id` equals `ancestor` or has it as a strict ancestor.
    pub fn class_descends_from(&self, class_id: &str, ancestor: &str) -> bool {
        class_id == ancestor
            || self
                .super_classes(class_id)
                .map(|sup| sup.iter().any(|c| c == ancestor))
                .unwrap_or(false)
    }

    /// All synsets whose forms contain the lowercased, whitespace-normalized
    /// `form`, ordered by synset id. Callers are expected to lemmatize first;
    /// stored forms are kept in lemma shape.
    pub fn synsets_for_form(&self, form: &str) -> Vec<&Synset> {
        self.form_index
            .get(&normalize_phrase(form))
            .map(|ids| ids.iter().map(|id| &self.synsets[id]).collect())
            .unwrap_or_default()
    }

    /// Reflexive-transitive hypernym closure of `synset_id`; the depth is the
    /// length of the shortest hypernym path from the argument (self at 0).
    pub fn hypernym_closure(&self, synset_id: &str) -> Result<BTreeMap<String, usize>, StoreError> {
        if !self.synsets.contains_key(synset_id) {
            return Err(StoreError::UnknownSynset(synset_id.to_string()));
        }
        let mut closure = BTreeMap::new();
        closure.insert(synset_id.to_string(), 0usize);
        let mut frontier = vec![synset_id.to_string()];
        let mut depth = 0usize;
        while !frontier.is_empty() {
            depth += 1;
            let mut next = Vec::new();
            for id in frontier {
                for hyper in &self.synsets[&id].hypernym_ids {
                    if !closure.contains_key(hyper) {
                        closure.insert(hyper.clone(), depth);
                        next.push(hyper.clone());
                    }
                }
            }
            frontier = next;
        }
        Ok(closure)
    }

    /// Depth of a synset measured from the taxonomy roots: the length of the
    /// longest hypernym path above it. Larger means more specific.
    pub fn root_depth(&self, synset_id: &str) -> Option<usize> {
        self.root_depths.get(synset_id).copied()
    }

    /// The most specific common hypernym of a sense set: the deepest member
    /// of the intersection of the reflexive hypernym closures. The closure is
    /// reflexive, so a singleton's answer is the sense itself, and an ancestor
    /// already in the set dominates. Equally deep candidates tie-break by
    /// smallest synset id.
    pub fn msc_hypernym<I, S>(&self, senses: I) -> Result<String, StoreError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let ids: Vec<String> = senses.into_iter().map(|s| s.as_ref().to_string()).collect();
        if ids.is_empty() {
            return Err(StoreError::EmptySenseSet);
        }
        let mut common: Option<BTreeSet<String>> = None;
        for id in &ids {
            let ancestors: BTreeSet<String> = self.hypernym_closure(id)?.into_keys().collect();
            common = Some(match common {
                None => ancestors,
                Some(acc) => acc.intersection(&ancestors).cloned().collect(),
            });
        }
        let common = common.unwrap();
        // BTreeSet iteration is ordered by id, so `>` on depth alone keeps
        // the smallest id among equally deep candidates.
        let mut best: Option<(usize, String)> = None;
        for id in common {
            let depth = self.root_depths[&id];
            if best.as_ref().is_none_or(|(d, _)| depth > *d) {
                best = Some((depth, id));
            }
        }
        best.map(|(_, id)| id)
            .ok_or(StoreError::NoCommonHypernym(ids))
    }

    /// All facts matching every bound position exactly, in store order.
    /// At least one position must be bound.
    pub fn facts_matching(
        &self,
        subject: Option<&ConceptRef>,
        relation: Option<&str>,
        object: Option<&ConceptRef>,
    ) -> Result<Vec<&Fact>, StoreError> {
        if subject.is_none() && relation.is_none() && object.is_none() {
            return Err(StoreError::UnboundedFactQuery);
        }
        Ok(self
            .facts
            .iter()
            .filter(|f| subject.is_none_or(|s| &f.subject == s))
            .filter(|f| relation.is_none_or(|r| f.relation == r))
            .filter(|f| object.is_none_or(|o| &f.object == o))
            .collect())
    }

    /// Longest relation phrase matching a prefix of `tokens`, if any.
    /// Matching is over raw lowercase tokens; dictionary phrases are surface
    /// phrases ("was born in"), not lemmas.
    pub fn map_relation_phrase(&self, tokens: &[String]) -> Option<RelationPhraseMatch> {
        self.phrase_matcher
            .longest_match_at(tokens, 0)
            .map(|(len, (relation, is_spatial))| RelationPhraseMatch {
                token_len: len,
                relation: relation.clone(),
                is_spatial: *is_spatial,
            })
    }

    pub(crate) fn concept_matcher(&self) -> &PhraseMatcher<NamePayload> {
        &self.concept_matcher
    }

    pub(crate) fn form_matcher(&self) -> &PhraseMatcher<FormPayload> {
        &self.form_matcher
    }

    pub(crate) fn relation_matcher(&self) -> &PhraseMatcher<(String, bool)> {
        &self.phrase_matcher
    }
}
