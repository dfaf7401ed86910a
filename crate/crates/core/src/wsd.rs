//! Word sense disambiguation: personalized PageRank over the synset relation
//! graph, with a most-specific-common-hypernym fallback when the top senses
//! are effectively tied.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ontology::{OntologyStore, StoreError};

/// Undirected graph over all synsets. One edge per deduplicated
/// hypernym/hyponym/holonym/meronym/similarity pair, uniform weight, no
/// self-loops.
#[derive(Debug, Clone)]
pub struct SenseGraph {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    adjacency: Vec<Vec<usize>>,
    edge_count: usize,
}

impl SenseGraph {
    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn node_id(&self, index: usize) -> &str {
        &self.ids[index]
    }

    pub fn index_of(&self, synset_id: &str) -> Option<usize> {
        self.index.get(synset_id).copied()
    }

    pub fn neighbors(&self, index: usize) -> &[usize] {
        &self.adjacency[index]
    }

    pub fn degree(&self, index: usize) -> usize {
        self.adjacency[index].len()
    }
}

/// Builds the sense graph from the synset store.
pub fn build_sense_graph(store: &OntologyStore) -> SenseGraph {
    let ids: Vec<String> = store.synsets().map(|s| s.synset_id.clone()).collect();
    let index: HashMap<String, usize> = ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.clone(), i))
        .collect();
    let mut pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
    for synset in store.synsets() {
        let a = index[&synset.synset_id];
        let targets = synset
            .hypernym_ids
            .iter()
            .chain(synset.other_edges.iter().map(|(_, t)| t));
        for target in targets {
            let b = index[target];
            if a != b {
                pairs.insert((a.min(b), a.max(b)));
            }
        }
    }
    let mut adjacency = vec![Vec::new(); ids.len()];
    for &(a, b) in &pairs {
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    for list in &mut adjacency {
        list.sort_unstable();
    }
    SenseGraph {
        ids,
        index,
        adjacency,
        edge_count: pairs.len(),
    }
}

/// Parameters of the PageRank iteration and of tie detection.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct PprConfig {
    pub damping: f64,
    pub max_iterations: usize,
    /// L1 convergence tolerance.
    pub epsilon: f64,
    /// Two senses are tied when the top score is within this multiplicative
    /// ratio of the runner-up. Floating-point scores are never compared for
    /// exact equality.
    pub tie_ratio: f64,
    /// Context token radius around a target occurrence; `None` means the
    /// whole sentence.
    pub context_window: Option<usize>,
}

impl Default for PprConfig {
    fn default() -> Self {
        Self {
            damping: 0.85,
            max_iterations: 100,
            epsilon: 1e-9,
            tie_ratio: 1.0 + 1e-6,
            context_window: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum WsdError {
    #[error("invalid teleport distribution: {0}")]
    InvalidTeleport(String),
    #[error("sense graph has no nodes")]
    EmptyGraph,
    #[error("form `{0}` has no senses in the store")]
    UnknownForm(String),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Power iteration of `v <- (1-d)*teleport + d*W*v`, where `W` is
/// column-stochastic over the graph adjacency and dangling nodes redistribute
/// their mass to the teleport distribution. Stops when the L1 change drops
/// below `epsilon` or after `max_iterations`.
pub fn personalized_pagerank(
    graph: &SenseGraph,
    teleport: &[f64],
    config: &PprConfig,
) -> Result<Vec<f64>, WsdError> {
    let n = graph.node_count();
    if n == 0 {
        return Err(WsdError::EmptyGraph);
    }
    if teleport.len() != n {
        return Err(WsdError::InvalidTeleport(format!(
            "length {} does not match node count {n}",
            teleport.len()
        )));
    }
    if let Some(bad) = teleport.iter().find(|&&x| !x.is_finite() || x < 0.0) {
        return Err(WsdError::InvalidTeleport(format!(
            "entry {bad} is negative or not finite"
        )));
    }
    let sum: f64 = teleport.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(WsdError::InvalidTeleport(format!(
            "sums to {sum}, expected 1"
        )));
    }

    let d = config.damping;
    let mut scores = teleport.to_vec();
    let mut next = vec![0.0; n];
    for _ in 0..config.max_iterations {
        let dangling: f64 = (0..n)
            .filter(|&u| graph.degree(u) == 0)
            .map(|u| scores[u])
            .sum();
        for i in 0..n {
            next[i] = (1.0 - d + d * dangling) * teleport[i];
        }
        for (u, &score) in scores.iter().enumerate() {
            let degree = graph.degree(u);
            if degree > 0 {
                let share = d * score / degree as f64;
                for &v in graph.neighbors(u) {
                    next[v] += share;
                }
            }
        }
        let l1: f64 = scores.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut scores, &mut next);
        if l1 < config.epsilon {
            break;
        }
    }
    Ok(scores)
}

/// How a disambiguation call concluded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Resolved(String),
    /// Two or more senses within `tie_ratio` of the top score; `msc` is their
    /// most specific common hypernym.
    Tied {
        senses: Vec<String>,
        msc: String,
    },
    /// No usable sense: the tied senses share no common hypernym, so the
    /// caller falls back to a form-only representation.
    Unresolved,
}

/// Ranked senses of one target form plus the resolution outcome.
#[derive(Debug, Clone)]
pub struct DisambiguationResult {
    pub form: String,
    /// `(synset_id, score)` in nonincreasing score order.
    pub ranked: Vec<(String, f64)>,
    pub outcome: Outcome,
}

/// Chooses the intended sense of `target_form` given its context tokens.
///
/// Teleport mass is spread uniformly over the senses of the context forms,
/// excluding the target's own senses (the word-to-word variant); an empty
/// context teleports uniformly over the whole graph. A single-sense target
/// resolves immediately without running PageRank.
pub fn disambiguate(
    context_tokens: &[String],
    target_form: &str,
    graph: &SenseGraph,
    store: &OntologyStore,
    config: &PprConfig,
) -> Result<DisambiguationResult, WsdError> {
    let candidates: Vec<String> = store
        .synsets_for_form(target_form)
        .iter()
        .map(|s| s.synset_id.clone())
        .collect();
    if candidates.is_empty() {
        return Err(WsdError::UnknownForm(target_form.to_string()));
    }
    if candidates.len() == 1 {
        return Ok(DisambiguationResult {
            form: target_form.to_string(),
            ranked: vec![(candidates[0].clone(), 1.0)],
            outcome: Outcome::Resolved(candidates[0].clone()),
        });
    }

    let candidate_set: BTreeSet<&String> = candidates.iter().collect();
    let mut teleport_nodes: BTreeSet<usize> = BTreeSet::new();
    for token in context_tokens {
        for synset in store.synsets_for_form(token) {
            if !candidate_set.contains(&synset.synset_id) {
                if let Some(i) = graph.index_of(&synset.synset_id) {
                    teleport_nodes.insert(i);
                }
            }
        }
    }
    let n = graph.node_count();
    let teleport: Vec<f64> = if teleport_nodes.is_empty() {
        vec![1.0 / n as f64; n]
    } else {
        let mass = 1.0 / teleport_nodes.len() as f64;
        let mut t = vec![0.0; n];
        for &i in &teleport_nodes {
            t[i] = mass;
        }
        t
    };
    let scores = personalized_pagerank(graph, &teleport, config)?;

    let mut ranked: Vec<(String, f64)> = candidates
        .iter()
        .map(|id| (id.clone(), graph.index_of(id).map_or(0.0, |i| scores[i])))
        .collect();
    ranked.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.0.cmp(&b.0))
    });

    let top = ranked[0].1;
    let second = ranked[1].1;
    let outcome = if top > config.tie_ratio * second {
        Outcome::Resolved(ranked[0].0.clone())
    } else {
        let tied: Vec<String> = ranked
            .iter()
            .filter(|(_, score)| score * config.tie_ratio >= top)
            .map(|(id, _)| id.clone())
            .collect();
        match store.msc_hypernym(&tied) {
            Ok(msc) => Outcome::Tied { senses: tied, msc },
            Err(StoreError::NoCommonHypernym(_)) => Outcome::Unresolved,
            Err(e) => return Err(e.into()),
        }
    };
    Ok(DisambiguationResult {
        form: target_form.to_string(),
        ranked,
        outcome,
    })
}
