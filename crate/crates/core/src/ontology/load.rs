//! Loading and validation of the five line-oriented ontology files.
//!
//! Loading is atomic: the store is validated in full before it is returned,
//! and the first violation aborts the load with an error naming the file and
//! line (for parse errors), the unresolved id (for dangling references), or a
//! member of the offending cycle.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::{
    normalize_phrase, ClassNode, ConceptRef, EdgeType, EntityRecord, Fact, FormPayload,
    NamePayload, OntologyStore, RelationPhraseEntry, StoreError, Synset,
};
use crate::lexicon::tokenize_raw;
use crate::matcher::PhraseMatcher;

/// Locations of the five ontology files.
#[derive(Debug, Clone)]
pub struct OntologyPaths {
    pub entities: PathBuf,
    pub classes: PathBuf,
    pub synsets: PathBuf,
    pub facts: PathBuf,
    pub relation_phrases: PathBuf,
}

impl OntologyPaths {
    /// The conventional file names inside one directory.
    pub fn in_dir(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref();
        Self {
            entities: dir.join("entities.jsonl"),
            classes: dir.join("classes.jsonl"),
            synsets: dir.join("synsets.jsonl"),
            facts: dir.join("facts.tsv"),
            relation_phrases: dir.join("relation_phrases.tsv"),
        }
    }
}

#[derive(Deserialize)]
struct ClassRow {
    id: String,
    label: String,
    #[serde(default)]
    parents: Vec<String>,
}

#[derive(Deserialize)]
struct EntityRow {
    id: String,
    name: String,
    #[serde(default)]
    aliases: Vec<String>,
    class: String,
}

#[derive(Deserialize)]
struct EdgeRow {
    #[serde(rename = "type")]
    edge_type: String,
    target: String,
}

#[derive(Deserialize)]
struct SynsetRow {
    id: String,
    forms: Vec<String>,
    #[serde(default)]
    hypernyms: Vec<String>,
    #[serde(default)]
    edges: Vec<EdgeRow>,
}

fn parse_err(file: &Path, line: usize, message: impl Into<String>) -> StoreError {
    StoreError::Parse {
        file: file.display().to_string(),
        line,
        message: message.into(),
    }
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Non-empty, non-comment lines with their 1-based line numbers.
fn data_lines(content: &str) -> impl Iterator<Item = (usize, &str)> {
    content
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end()))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
}

impl OntologyStore {
    /// Loads and validates the five ontology files.
    pub fn load(paths: &OntologyPaths) -> Result<Self, StoreError> {
        let classes = load_classes(&paths.classes)?;
        let entities = load_entities(&paths.entities, &classes)?;
        let synsets = load_synsets(&paths.synsets)?;
        let facts = load_facts(&paths.facts, &entities, &classes, &synsets)?;
        let phrases = load_phrases(&paths.relation_phrases)?;

        let name_index = build_name_index(&entities);
        let form_index = build_form_index(&synsets);
        let concept_matcher = build_concept_matcher(&entities, &classes);
        let form_matcher = build_form_matcher(&synsets);
        let phrase_matcher = build_phrase_matcher(&phrases);
        let root_depths = compute_root_depths(&synsets);

        Ok(Self {
            classes,
            entities,
            synsets,
            facts,
            phrases,
            name_index,
            form_index,
            concept_matcher,
            form_matcher,
            phrase_matcher,
            root_depths,
        })
    }
}

fn load_classes(path: &Path) -> Result<BTreeMap<String, ClassNode>, StoreError> {
    let content = fs::read_to_string(path)?;
    let mut classes = BTreeMap::new();
    let mut lines = Vec::new();
    for (line, text) in data_lines(&content) {
        let row: ClassRow =
            serde_json::from_str(text).map_err(|e| parse_err(path, line, e.to_string()))?;
        if row.id.is_empty() {
            return Err(parse_err(path, line, "empty class id"));
        }
        if row.label.trim().is_empty() {
            return Err(parse_err(path, line, "empty class label"));
        }
        let node = ClassNode {
            class_id: row.id.clone(),
            label: row.label,
            parent_ids: row.parents.into_iter().collect(),
        };
        if classes.insert(row.id.clone(), node).is_some() {
            return Err(parse_err(
                path,
                line,
                format!("duplicate class id `{}`", row.id),
            ));
        }
        lines.push((line, row.id));
    }
    // Labels must be unique after lowercasing.
    let mut seen_labels = HashMap::new();
    for (line, id) in &lines {
        let label = classes[id].label.to_lowercase();
        if let Some(other) = seen_labels.insert(label.clone(), id.clone()) {
            return Err(parse_err(
                path,
                *line,
                format!("label `{label}` of `{id}` duplicates label of `{other}`"),
            ));
        }
    }
    // Parents must resolve.
    for node in classes.values() {
        for parent in &node.parent_ids {
            if !classes.contains_key(parent) {
                return Err(StoreError::DanglingRef {
                    context: format!("class `{}` parent ({})", node.class_id, file_name(path)),
                    id: parent.clone(),
                });
            }
        }
    }
    check_acyclic("class", classes.keys(), |id| classes[id].parent_ids.iter())?;
    Ok(classes)
}

fn load_entities(
    path: &Path,
    classes: &BTreeMap<String, ClassNode>,
) -> Result<BTreeMap<String, EntityRecord>, StoreError> {
    let content = fs::read_to_string(path)?;
    let mut entities = BTreeMap::new();
    for (line, text) in data_lines(&content) {
        let row: EntityRow =
            serde_json::from_str(text).map_err(|e| parse_err(path, line, e.to_string()))?;
        if row.id.is_empty() {
            return Err(parse_err(path, line, "empty entity id"));
        }
        if row.name.trim().is_empty() {
            return Err(parse_err(
                path,
                line,
                format!("entity `{}` has an empty name", row.id),
            ));
        }
        if !classes.contains_key(&row.class) {
            return Err(StoreError::DanglingRef {
                context: format!("entity `{}` class ({})", row.id, file_name(path)),
                id: row.class,
            });
        }
        // The main name is not repeated in the alias set.
        let aliases: BTreeSet<String> =
            row.aliases.into_iter().filter(|a| a != &row.name).collect();
        let record = EntityRecord {
            entity_id: row.id.clone(),
            main_name: row.name,
            aliases,
            class_id: row.class,
        };
        if entities.insert(row.id.clone(), record).is_some() {
            return Err(parse_err(
                path,
                line,
                format!("duplicate entity id `{}`", row.id),
            ));
        }
    }
    Ok(entities)
}

fn load_synsets(path: &Path) -> Result<BTreeMap<String, Synset>, StoreError> {
    let content = fs::read_to_string(path)?;
    let mut synsets: BTreeMap<String, Synset> = BTreeMap::new();
    for (line, text) in data_lines(&content) {
        let row: SynsetRow =
            serde_json::from_str(text).map_err(|e| parse_err(path, line, e.to_string()))?;
        if row.id.is_empty() {
            return Err(parse_err(path, line, "empty synset id"));
        }
        let forms: BTreeSet<String> = row
            .forms
            .into_iter()
            .filter(|f| !f.trim().is_empty())
            .collect();
        if forms.is_empty() {
            return Err(parse_err(
                path,
                line,
                format!("synset `{}` has no forms", row.id),
            ));
        }
        let mut other_edges = BTreeSet::new();
        for edge in row.edges {
            let edge_type = EdgeType::parse(&edge.edge_type).ok_or_else(|| {
                parse_err(
                    path,
                    line,
                    format!("unknown edge type `{}`", edge.edge_type),
                )
            })?;
            if edge.target == row.id {
                return Err(parse_err(
                    path,
                    line,
                    format!("synset `{}` has a self edge", row.id),
                ));
            }
            other_edges.insert((edge_type, edge.target));
        }
        let synset = Synset {
            synset_id: row.id.clone(),
            forms,
            hypernym_ids: row.hypernyms.into_iter().collect(),
            other_edges,
        };
        if synsets.insert(row.id.clone(), synset).is_some() {
            return Err(parse_err(
                path,
                line,
                format!("duplicate synset id `{}`", row.id),
            ));
        }
    }
    // Every referenced synset must resolve.
    let known: HashSet<String> = synsets.keys().cloned().collect();
    for synset in synsets.values() {
        for hyper in &synset.hypernym_ids {
            if !known.contains(hyper) {
                return Err(StoreError::DanglingRef {
                    context: format!(
                        "synset `{}` hypernym ({})",
                        synset.synset_id,
                        file_name(path)
                    ),
                    id: hyper.clone(),
                });
            }
        }
        for (_, target) in &synset.other_edges {
            if !known.contains(target) {
                return Err(StoreError::DanglingRef {
                    context: format!("synset `{}` edge ({})", synset.synset_id, file_name(path)),
                    id: target.clone(),
                });
            }
        }
    }
    check_acyclic("hypernym", synsets.keys(), |id| {
        synsets[id].hypernym_ids.iter()
    })?;
    // Declared hyponym edges must have the inverse hypernym edge, and every
    // hypernym edge synthesizes its hyponym inverse.
    for (id, synset) in &synsets {
        for (edge_type, target) in &synset.other_edges {
            if *edge_type == EdgeType::Hyponym && !synsets[target].hypernym_ids.contains(id) {
                return Err(StoreError::HyponymWithoutInverse {
                    synset: id.clone(),
                    target: target.clone(),
                });
            }
        }
    }
    let inverses: Vec<(String, String)> = synsets
        .values()
        .flat_map(|s| {
            s.hypernym_ids
                .iter()
                .map(|h| (h.clone(), s.synset_id.clone()))
        })
        .collect();
    for (hyper, hypo) in inverses {
        synsets
            .get_mut(&hyper)
            .unwrap()
            .other_edges
            .insert((EdgeType::Hyponym, hypo));
    }
    Ok(synsets)
}

fn load_facts(
    path: &Path,
    entities: &BTreeMap<String, EntityRecord>,
    classes: &BTreeMap<String, ClassNode>,
    synsets: &BTreeMap<String, Synset>,
) -> Result<Vec<Fact>, StoreError> {
    let content = fs::read_to_string(path)?;
    let resolves = |c: &ConceptRef| match c.kind {
        super::ConceptKind::Entity => entities.contains_key(&c.id),
        super::ConceptKind::Synset => synsets.contains_key(&c.id),
        super::ConceptKind::Class => classes.contains_key(&c.id),
    };
    let mut facts = Vec::new();
    let mut seen = HashSet::new();
    for (line, text) in data_lines(&content) {
        let fields: Vec<&str> = text.split('\t').collect();
        if fields.len() != 3 {
            return Err(parse_err(
                path,
                line,
                format!(
                    "expected subject<TAB>relation<TAB>object, got {} fields",
                    fields.len()
                ),
            ));
        }
        let subject = ConceptRef::parse(fields[0]).ok_or_else(|| {
            parse_err(
                path,
                line,
                format!("malformed concept reference `{}`", fields[0]),
            )
        })?;
        let object = ConceptRef::parse(fields[2]).ok_or_else(|| {
            parse_err(
                path,
                line,
                format!("malformed concept reference `{}`", fields[2]),
            )
        })?;
        let relation = fields[1].trim();
        if relation.is_empty() {
            return Err(parse_err(path, line, "empty relation"));
        }
        for endpoint in [&subject, &object] {
            if !resolves(endpoint) {
                return Err(StoreError::DanglingRef {
                    context: format!("fact at {}:{line}", file_name(path)),
                    id: endpoint.to_string(),
                });
            }
        }
        let fact = Fact {
            subject,
            relation: relation.to_string(),
            object,
        };
        if seen.insert(fact.clone()) {
            facts.push(fact);
        }
    }
    Ok(facts)
}

fn load_phrases(path: &Path) -> Result<Vec<RelationPhraseEntry>, StoreError> {
    let content = fs::read_to_string(path)?;
    let mut phrases = Vec::new();
    let mut seen = HashSet::new();
    for (line, text) in data_lines(&content) {
        let fields: Vec<&str> = text.split('\t').collect();
        if fields.len() != 3 {
            return Err(parse_err(
                path,
                line,
                format!(
                    "expected phrase<TAB>relation<TAB>spatial, got {} fields",
                    fields.len()
                ),
            ));
        }
        let phrase = normalize_phrase(fields[0]);
        if phrase.is_empty() {
            return Err(parse_err(path, line, "empty relation phrase"));
        }
        if !seen.insert(phrase.clone()) {
            return Err(parse_err(
                path,
                line,
                format!("duplicate relation phrase `{phrase}`"),
            ));
        }
        let is_spatial = match fields[2].trim() {
            "0" => false,
            "1" => true,
            other => {
                return Err(parse_err(
                    path,
                    line,
                    format!("spatial flag must be 0 or 1, got `{other}`"),
                ))
            }
        };
        phrases.push(RelationPhraseEntry {
            phrase,
            relation: fields[1].trim().to_string(),
            is_spatial,
        });
    }
    Ok(phrases)
}

/// Three-color depth-first search for a cycle over `edges`.
fn check_acyclic<'a, I, E, EI>(graph: &'static str, nodes: I, edges: E) -> Result<(), StoreError>
where
    I: Iterator<Item = &'a String>,
    E: Fn(&String) -> EI,
    EI: Iterator<Item = &'a String>,
{
    #[derive(Clone, Copy, PartialEq)]
    enum Color {
        White,
        Gray,
        Black,
    }
    let mut color: HashMap<String, Color> = HashMap::new();
    let all: Vec<String> = nodes.cloned().collect();
    for node in &all {
        color.insert(node.clone(), Color::White);
    }
    for start in &all {
        if color[start] != Color::White {
            continue;
        }
        // Stack holds (node, next-edge cursor) pairs.
        let mut stack: Vec<(String, Vec<String>, usize)> = Vec::new();
        color.insert(start.clone(), Color::Gray);
        stack.push((start.clone(), edges(start).cloned().collect(), 0));
        while let Some((node, targets, cursor)) = stack.pop() {
            if cursor < targets.len() {
                let next = targets[cursor].clone();
                stack.push((node, targets, cursor + 1));
                match color[&next] {
                    Color::Gray => {
                        return Err(StoreError::Cycle { graph, id: next });
                    }
                    Color::White => {
                        color.insert(next.clone(), Color::Gray);
                        stack.push((next.clone(), edges(&next).cloned().collect(), 0));
                    }
                    Color::Black => {}
                }
            } else {
                color.insert(node, Color::Black);
            }
        }
    }
    Ok(())
}

fn build_name_index(entities: &BTreeMap<String, EntityRecord>) -> HashMap<String, Vec<String>> {
    let mut index: HashMap<String, Vec<String>> = HashMap::new();
    for entity in entities.values() {
        let mut names = vec![entity.main_name.clone()];
        names.extend(entity.aliases.iter().cloned());
        for name in names {
            index
                .entry(normalize_phrase(&name))
                .or_default()
                .push(entity.entity_id.clone());
        }
    }
    for ids in index.values_mut() {
        ids.sort();
        ids.dedup();
    }
    index
}

fn build_form_index(synsets: &BTreeMap<String, Synset>) -> HashMap<String, Vec<String>> {
    let mut index: HashMap<String, Vec<String>> = HashMap::new();
    for synset in synsets.values() {
        for form in &synset.forms {
            index
                .entry(normalize_phrase(form))
                .or_default()
                .push(synset.synset_id.clone());
        }
    }
    for ids in index.values_mut() {
        ids.sort();
        ids.dedup();
    }
    index
}

fn build_concept_matcher(
    entities: &BTreeMap<String, EntityRecord>,
    classes: &BTreeMap<String, ClassNode>,
) -> PhraseMatcher<NamePayload> {
    let mut matcher = PhraseMatcher::new();
    for entity in entities.values() {
        let mut names = vec![entity.main_name.clone()];
        names.extend(entity.aliases.iter().cloned());
        for name in names {
            let key = tokenize_raw(&name);
            if key.is_empty() {
                continue;
            }
            let payload = matcher.insert(key, NamePayload::default());
            payload.entity_ids.push(entity.entity_id.clone());
        }
    }
    for class in classes.values() {
        let key = tokenize_raw(&class.label);
        if key.is_empty() {
            continue;
        }
        matcher.insert(key, NamePayload::default()).class_id = Some(class.class_id.clone());
    }
    // Deterministic, deduplicated entity lists per surface phrase.
    for entity in entities.values() {
        let mut names = vec![entity.main_name.clone()];
        names.extend(entity.aliases.iter().cloned());
        for name in names {
            if let Some(payload) = matcher.get_mut(&tokenize_raw(&name)) {
                payload.entity_ids.sort();
                payload.entity_ids.dedup();
            }
        }
    }
    matcher
}

fn build_form_matcher(synsets: &BTreeMap<String, Synset>) -> PhraseMatcher<FormPayload> {
    let mut matcher = PhraseMatcher::new();
    let mut by_key: BTreeMap<Vec<String>, FormPayload> = BTreeMap::new();
    for synset in synsets.values() {
        for form in &synset.forms {
            let key = tokenize_raw(form);
            if key.is_empty() {
                continue;
            }
            let payload = by_key.entry(key).or_insert_with(|| FormPayload {
                display: form.clone(),
                synset_ids: Vec::new(),
            });
            payload.synset_ids.push(synset.synset_id.clone());
        }
    }
    for (key, mut payload) in by_key {
        payload.synset_ids.sort();
        payload.synset_ids.dedup();
        matcher.insert(key, payload);
    }
    matcher
}

fn build_phrase_matcher(phrases: &[RelationPhraseEntry]) -> PhraseMatcher<(String, bool)> {
    let mut matcher = PhraseMatcher::new();
    for entry in phrases {
        matcher.insert(
            tokenize_raw(&entry.phrase),
            (entry.relation.clone(), entry.is_spatial),
        );
    }
    matcher
}

/// Longest hypernym path above each synset, by recursion over the (already
/// validated acyclic) DAG.
fn compute_root_depths(synsets: &BTreeMap<String, Synset>) -> HashMap<String, usize> {
    fn depth(
        id: &str,
        synsets: &BTreeMap<String, Synset>,
        memo: &mut HashMap<String, usize>,
    ) -> usize {
        if let Some(&d) = memo.get(id) {
            return d;
        }
        let d = synsets[id]
            .hypernym_ids
            .iter()
            .map(|h| depth(h, synsets, memo) + 1)
            .max()
            .unwrap_or(0);
        memo.insert(id.to_string(), d);
        d
    }
    let mut memo = HashMap::new();
    for id in synsets.keys() {
        depth(id, synsets, &mut memo);
    }
    memo
}
