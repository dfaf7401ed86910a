//! Converts raw text into generalized-term multisets.
//!
//! Documents go through stop-word filtering, gazetteer entity recognition,
//! word sense disambiguation of the remaining lexicon words, and virtual-term
//! expansion of both entity and word features. Queries take the same path but
//! keep only the most specific representation of each concept, optionally
//! replacing a leading interrogative word by an entity class.

use std::collections::{BTreeMap, BTreeSet};

use crate::config::ModelConfig;
use crate::lexicon::{split_sentences, tokenize_raw, Lexicon};
use crate::ontology::{normalize_phrase, OntologyStore};
use crate::term::GeneralizedTerm;
use crate::wsd::{self, Outcome, SenseGraph};

/// Half-open token range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }
}

/// A recognized entity mention. A fully recognized entity carries all three
/// features; a name shared by several entities degrades to name-only; a class
/// label mention carries the class only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeAnnotation {
    pub span: Span,
    pub name: Option<String>,
    pub class_id: Option<String>,
    pub entity_id: Option<String>,
}

/// Resolution state of a lexicon word occurrence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WwResolution {
    Resolved(String),
    /// Top senses were tied; `msc` is their most specific common hypernym.
    Tied {
        msc: String,
    },
    /// No sense could be kept (tied senses without a common hypernym); the
    /// word is represented by its form alone.
    Unresolved,
}

/// A recognized lexicon-word mention.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WwAnnotation {
    pub span: Span,
    /// The form as stored in the lexicon (e.g. "bullet-resistant suit").
    pub form: String,
    pub resolution: WwResolution,
}

/// A document reduced to its weighted term multiset; original terms count
/// 1 per occurrence, virtually added terms count `virtual_term_weight`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedDocument {
    pub doc_id: String,
    pub terms: BTreeMap<GeneralizedTerm, f64>,
    pub source_length: usize,
}

/// A query as an ordered list of most-specific terms plus any latent terms
/// added by expansion, each with a provenance string.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryRepresentation {
    pub query_id: String,
    pub terms: Vec<GeneralizedTerm>,
    pub latent_terms: Vec<(GeneralizedTerm, String)>,
}

/// Lowercases, splits on non-alphanumerics, drops stop words, and lemmatizes
/// what remains.
pub fn tokenize_and_filter(text: &str, lexicon: &Lexicon) -> Vec<String> {
    tokenize_raw(text)
        .into_iter()
        .filter(|t| !lexicon.is_stopword(t))
        .map(|t| lexicon.lemma(&t).to_string())
        .collect()
}

/// Left-to-right longest-match scan over entity names, aliases, and class
/// labels. Matched spans never overlap; at one position an entity match wins
/// over a class-label match of the same phrase.
pub fn recognize_entities(tokens: &[String], store: &OntologyStore) -> Vec<NeAnnotation> {
    let matcher = store.concept_matcher();
    let mut out = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let Some((len, payload)) = matcher.longest_match_at(tokens, i) else {
            i += 1;
            continue;
        };
        let span = Span::new(i, i + len);
        let ann = if payload.entity_ids.len() == 1 {
            let entity = store
                .entity(&payload.entity_ids[0])
                .expect("gazetteer id resolves");
            NeAnnotation {
                span,
                name: Some(normalize_phrase(&entity.main_name)),
                class_id: Some(entity.class_id.clone()),
                entity_id: Some(entity.entity_id.clone()),
            }
        } else if payload.entity_ids.len() > 1 {
            // Ambiguous name: annotate the surface name only.
            NeAnnotation {
                span,
                name: Some(tokens[i..i + len].join(" ")),
                class_id: None,
                entity_id: None,
            }
        } else if let Some(class_id) = &payload.class_id {
            NeAnnotation {
                span,
                name: None,
                class_id: Some(class_id.clone()),
                entity_id: None,
            }
        } else {
            i += 1;
            continue;
        };
        out.push(ann);
        i += len;
    }
    out
}

/// The single most specific triple for an annotation: identifier, then
/// name/class, then whichever of name or class is present.
pub fn most_specific_ne_term(ann: &NeAnnotation) -> GeneralizedTerm {
    if let Some(id) = &ann.entity_id {
        return GeneralizedTerm::ne_triple(None, None, Some(&format!("ent:{id}")));
    }
    match (&ann.name, &ann.class_id) {
        (Some(name), Some(class)) => GeneralizedTerm::ne_triple(Some(name), Some(class), None),
        (Some(name), None) => GeneralizedTerm::ne_triple(Some(name), None, None),
        (None, Some(class)) => GeneralizedTerm::ne_triple(None, Some(class), None),
        (None, None) => unreachable!("annotation with no features"),
    }
}

/// The implied triple patterns of an entity mention, instantiated over every
/// alias and every (transitive) super class: `(n/*/*)`, `(*/c/*)`, `(n/c/*)`,
/// `(alias/*/*)`, `(*/super/*)`, `(n/super/*)`, `(alias/c/*)`,
/// `(alias/super/*)`, and `(*/*/id)`. Partial annotations emit only the
/// patterns whose inputs exist.
pub fn expand_ne_features(ann: &NeAnnotation, store: &OntologyStore) -> BTreeSet<GeneralizedTerm> {
    let mut out = BTreeSet::new();
    let supers: Vec<String> = ann
        .class_id
        .as_deref()
        .map(|c| store.super_classes(c).unwrap_or_default())
        .unwrap_or_default();

    if let Some(name) = &ann.name {
        out.insert(GeneralizedTerm::ne_triple(Some(name), None, None));
    }
    if let Some(class) = &ann.class_id {
        out.insert(GeneralizedTerm::ne_triple(None, Some(class), None));
        for sup in &supers {
            out.insert(GeneralizedTerm::ne_triple(None, Some(sup), None));
        }
        if let Some(name) = &ann.name {
            out.insert(GeneralizedTerm::ne_triple(Some(name), Some(class), None));
            for sup in &supers {
                out.insert(GeneralizedTerm::ne_triple(Some(name), Some(sup), None));
            }
        }
    }
    if let Some(id) = &ann.entity_id {
        if let Some(entity) = store.entity(id) {
            for alias in &entity.aliases {
                let alias = normalize_phrase(alias);
                out.insert(GeneralizedTerm::ne_triple(Some(&alias), None, None));
                if let Some(class) = &ann.class_id {
                    out.insert(GeneralizedTerm::ne_triple(Some(&alias), Some(class), None));
                    for sup in &supers {
                        out.insert(GeneralizedTerm::ne_triple(Some(&alias), Some(sup), None));
                    }
                }
            }
        }
        out.insert(GeneralizedTerm::ne_triple(
            None,
            None,
            Some(&format!("ent:{id}")),
        ));
    }
    out
}

/// The implied word features of a lexicon-word mention.
///
/// A resolved sense `s` contributes `s`, its forms, each direct hypernym with
/// its forms, and every form/hypernym pair. A tied mention with apparent form
/// `f` and common hypernym `m` contributes `f`, `f/m`, `m` with its forms,
/// and each direct hypernym of `m` with its forms and the `f`/hypernym pair.
/// An unresolved mention falls back to its form alone.
pub fn expand_ww_features(ann: &WwAnnotation, store: &OntologyStore) -> BTreeSet<GeneralizedTerm> {
    let mut out = BTreeSet::new();
    match &ann.resolution {
        WwResolution::Resolved(sense) => {
            out.insert(GeneralizedTerm::ww_sense(sense));
            let Some(synset) = store.synset(sense) else {
                return out;
            };
            for form in &synset.forms {
                out.insert(GeneralizedTerm::ww_form(form));
            }
            for hyper in &synset.hypernym_ids {
                out.insert(GeneralizedTerm::ww_sense(hyper));
                if let Some(hyper_synset) = store.synset(hyper) {
                    for form in &hyper_synset.forms {
                        out.insert(GeneralizedTerm::ww_form(form));
                    }
                }
                for form in &synset.forms {
                    out.insert(GeneralizedTerm::ww_pair(form, hyper));
                }
            }
        }
        WwResolution::Tied { msc } => {
            out.insert(GeneralizedTerm::ww_form(&ann.form));
            out.insert(GeneralizedTerm::ww_pair(&ann.form, msc));
            out.insert(GeneralizedTerm::ww_sense(msc));
            let Some(msc_synset) = store.synset(msc) else {
                return out;
            };
            for form in &msc_synset.forms {
                out.insert(GeneralizedTerm::ww_form(form));
            }
            for hyper in &msc_synset.hypernym_ids {
                out.insert(GeneralizedTerm::ww_sense(hyper));
                if let Some(hyper_synset) = store.synset(hyper) {
                    for form in &hyper_synset.forms {
                        out.insert(GeneralizedTerm::ww_form(form));
                    }
                }
                out.insert(GeneralizedTerm::ww_pair(&ann.form, hyper));
            }
        }
        WwResolution::Unresolved => {
            out.insert(GeneralizedTerm::ww_form(&ann.form));
        }
    }
    out
}

/// The terms a query would emit for this mention; everything else in the
/// expansion set is virtual.
fn ww_original_terms(ann: &WwAnnotation) -> BTreeSet<GeneralizedTerm> {
    match &ann.resolution {
        WwResolution::Resolved(sense) => [GeneralizedTerm::ww_sense(sense)].into(),
        WwResolution::Tied { msc } => [
            GeneralizedTerm::ww_form(&ann.form),
            GeneralizedTerm::ww_pair(&ann.form, msc),
        ]
        .into(),
        WwResolution::Unresolved => [GeneralizedTerm::ww_form(&ann.form)].into(),
    }
}

/// Maps an interrogative word to an entity class through the configured
/// table; `None` leaves the word to the stop-word filter.
pub fn map_interrogative(token: &str, table: &BTreeMap<String, String>) -> Option<String> {
    table.get(&token.to_lowercase()).cloned()
}

/// Wires the store, sense graph, lexicon, and model configuration into the
/// document and query processing entry points.
#[derive(Clone, Copy)]
pub struct Annotator<'a> {
    pub store: &'a OntologyStore,
    pub graph: &'a SenseGraph,
    pub lexicon: &'a Lexicon,
    pub config: &'a ModelConfig,
}

/// Mentions of one sentence: entity and word annotations plus leftover
/// keyword stems with their token positions.
struct SentenceMentions {
    ne: Vec<NeAnnotation>,
    ww: Vec<WwAnnotation>,
    keywords: Vec<(usize, String)>,
}

impl<'a> Annotator<'a> {
    /// Runs the document pipeline: filter, recognize entities, disambiguate
    /// the remaining lexicon words, keep unknown tokens as keywords, then add
    /// the full expansion sets as (weighted) virtual terms.
    pub fn annotate_document(&self, doc_id: &str, text: &str) -> AnnotatedDocument {
        let mut terms: BTreeMap<GeneralizedTerm, f64> = BTreeMap::new();
        let mut source_length = 0;
        for sentence in split_sentences(text) {
            let tokens = tokenize_and_filter(sentence, self.lexicon);
            source_length += tokens.len();
            let mentions = self.sentence_mentions(&tokens);
            for ann in &mentions.ne {
                let original = most_specific_ne_term(ann);
                for term in expand_ne_features(ann, self.store) {
                    let weight = if term == original {
                        1.0
                    } else {
                        self.config.virtual_term_weight
                    };
                    *terms.entry(term).or_insert(0.0) += weight;
                }
            }
            for ann in &mentions.ww {
                let originals = ww_original_terms(ann);
                for term in expand_ww_features(ann, self.store) {
                    let weight = if originals.contains(&term) {
                        1.0
                    } else {
                        self.config.virtual_term_weight
                    };
                    *terms.entry(term).or_insert(0.0) += weight;
                }
            }
            for (_, stem) in &mentions.keywords {
                *terms.entry(GeneralizedTerm::keyword(stem)).or_insert(0.0) += 1.0;
            }
        }
        terms.retain(|_, w| *w > 0.0);
        AnnotatedDocument {
            doc_id: doc_id.to_string(),
            terms,
            source_length,
        }
    }

    /// Runs the query pipeline. Each entity yields exactly one most-specific
    /// triple, each resolved word its sense, each tied word its form/hypernym
    /// pair; a leading interrogative word maps to a class pattern. Latent
    /// terms are left empty here and filled by query expansion.
    pub fn represent_query(&self, query_id: &str, text: &str) -> QueryRepresentation {
        let mut terms = Vec::new();
        if self.config.use_ne {
            if let Some(first) = tokenize_raw(text).first() {
                if let Some(class_id) = map_interrogative(first, &self.config.interrogatives) {
                    terms.push(GeneralizedTerm::ne_triple(None, Some(&class_id), None));
                }
            }
        }
        for sentence in split_sentences(text) {
            let tokens = tokenize_and_filter(sentence, self.lexicon);
            let mentions = self.sentence_mentions(&tokens);
            let mut positioned: Vec<(usize, GeneralizedTerm)> = Vec::new();
            for ann in &mentions.ne {
                positioned.push((ann.span.start, most_specific_ne_term(ann)));
            }
            for ann in &mentions.ww {
                let term = match &ann.resolution {
                    WwResolution::Resolved(sense) => GeneralizedTerm::ww_sense(sense),
                    WwResolution::Tied { msc } => GeneralizedTerm::ww_pair(&ann.form, msc),
                    WwResolution::Unresolved => GeneralizedTerm::ww_form(&ann.form),
                };
                positioned.push((ann.span.start, term));
            }
            for (pos, stem) in &mentions.keywords {
                positioned.push((*pos, GeneralizedTerm::keyword(stem)));
            }
            positioned.sort_by_key(|(pos, _)| *pos);
            terms.extend(positioned.into_iter().map(|(_, t)| t));
        }
        QueryRepresentation {
            query_id: query_id.to_string(),
            terms,
            latent_terms: Vec::new(),
        }
    }

    /// Entity scan, then word-form scan over the gaps, then keywords; gated
    /// by the model's `use_ne` / `use_ww` flags.
    fn sentence_mentions(&self, tokens: &[String]) -> SentenceMentions {
        let ne = if self.config.use_ne {
            recognize_entities(tokens, self.store)
        } else {
            Vec::new()
        };
        let mut covered = vec![false; tokens.len()];
        for ann in &ne {
            for slot in covered[ann.span.start..ann.span.end].iter_mut() {
                *slot = true;
            }
        }
        let mut ww = Vec::new();
        let mut keywords = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            if covered[i] {
                i += 1;
                continue;
            }
            if self.config.use_ww {
                if let Some((len, payload)) = self.store.form_matcher().longest_match_at(tokens, i)
                {
                    if covered[i..i + len].iter().all(|c| !c) {
                        let span = Span::new(i, i + len);
                        let resolution = self.resolve_ww(tokens, span, &payload.display);
                        ww.push(WwAnnotation {
                            span,
                            form: payload.display.clone(),
                            resolution,
                        });
                        i += len;
                        continue;
                    }
                }
            }
            keywords.push((i, tokens[i].clone()));
            i += 1;
        }
        SentenceMentions { ne, ww, keywords }
    }

    fn resolve_ww(&self, tokens: &[String], span: Span, form: &str) -> WwResolution {
        let window = self.config.wsd.context_window;
        let (lo, hi) = match window {
            Some(radius) => (
                span.start.saturating_sub(radius),
                (span.end + radius).min(tokens.len()),
            ),
            None => (0, tokens.len()),
        };
        let context: Vec<String> = (lo..hi)
            .filter(|&i| i < span.start || i >= span.end)
            .map(|i| tokens[i].clone())
            .collect();
        match wsd::disambiguate(&context, form, self.graph, self.store, &self.config.wsd) {
            Ok(result) => match result.outcome {
                Outcome::Resolved(sense) => WwResolution::Resolved(sense),
                Outcome::Tied { msc, .. } => WwResolution::Tied { msc },
                Outcome::Unresolved => WwResolution::Unresolved,
            },
            Err(_) => WwResolution::Unresolved,
        }
    }
}
