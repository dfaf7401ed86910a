//! Shared fixture loading and independent oracles for the integration and
//! acceptance suites. The oracles deliberately avoid the production code
//! paths they check: dense matrix power iteration for PageRank, recursive
//! ancestor enumeration for the hypernym operations, and exhaustive
//! enumeration for the randomization test.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use ontosearch::corpus::{read_jsonl, read_topics, RawDocument};
use ontosearch::eval::Qrels;
use ontosearch::lexicon::Lexicon;
use ontosearch::ontology::{OntologyPaths, OntologyStore};
use ontosearch::pipeline::Engine;
use ontosearch::wsd::SenseGraph;
use ontosearch::ModelConfig;

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn load_fixture_store() -> OntologyStore {
    OntologyStore::load(&OntologyPaths::in_dir(fixtures_dir().join("ontology")))
        .expect("fixture ontology loads")
}

pub fn fixture_corpus() -> Vec<RawDocument> {
    read_jsonl(&fixtures_dir().join("corpus.jsonl")).expect("fixture corpus loads")
}

pub fn fixture_topics() -> Vec<(String, String)> {
    read_topics(&fixtures_dir().join("topics.tsv")).expect("fixture topics load")
}

pub fn fixture_qrels() -> Qrels {
    Qrels::from_trec_file(&fixtures_dir().join("qrels.txt")).expect("fixture qrels load")
}

pub fn engine(preset: &str) -> Engine {
    let config = ModelConfig::preset(preset).unwrap_or_else(|| panic!("unknown preset {preset}"));
    Engine::new(load_fixture_store(), Lexicon::bundled(), config)
}

/// Dense power-iteration PageRank oracle over an explicit column-stochastic
/// matrix; dangling columns redistribute to the teleport distribution.
pub fn dense_ppr_oracle(
    graph: &SenseGraph,
    teleport: &[f64],
    damping: f64,
    max_iterations: usize,
    epsilon: f64,
) -> Vec<f64> {
    let n = graph.node_count();
    let mut matrix = vec![vec![0.0f64; n]; n];
    for u in 0..n {
        let degree = graph.degree(u);
        if degree == 0 {
            for (i, row) in matrix.iter_mut().enumerate() {
                row[u] = teleport[i];
            }
        } else {
            for &v in graph.neighbors(u) {
                matrix[v][u] = 1.0 / degree as f64;
            }
        }
    }
    let mut v = teleport.to_vec();
    for _ in 0..max_iterations {
        let mut next = vec![0.0; n];
        for (i, next_i) in next.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, &vj) in v.iter().enumerate() {
                acc += matrix[i][j] * vj;
            }
            *next_i = (1.0 - damping) * teleport[i] + damping * acc;
        }
        let l1: f64 = v.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        v = next;
        if l1 < epsilon {
            break;
        }
    }
    v
}

/// Reflexive ancestor set by plain recursive DFS over hypernym edges.
pub fn dfs_ancestors(store: &OntologyStore, synset_id: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    fn walk(store: &OntologyStore, id: &str, out: &mut BTreeSet<String>) {
        if !out.insert(id.to_string()) {
            return;
        }
        for hyper in &store.synset(id).expect("synset resolves").hypernym_ids {
            walk(store, hyper, out);
        }
    }
    walk(store, synset_id, &mut out);
    out
}

/// Longest path from `synset_id` up to any root, by exhaustive path
/// enumeration.
pub fn brute_force_root_depth(store: &OntologyStore, synset_id: &str) -> usize {
    let synset = store.synset(synset_id).expect("synset resolves");
    synset
        .hypernym_ids
        .iter()
        .map(|h| brute_force_root_depth(store, h) + 1)
        .max()
        .unwrap_or(0)
}

/// Brute-force most-specific-common-hypernym: intersect the reflexive
/// ancestor sets, keep the deepest (longest root path), break ties by
/// smallest id. `None` when the intersection is empty.
pub fn msc_oracle(store: &OntologyStore, senses: &[&str]) -> Option<String> {
    let mut common: Option<BTreeSet<String>> = None;
    for sense in senses {
        let ancestors = dfs_ancestors(store, sense);
        common = Some(match common {
            None => ancestors,
            Some(acc) => acc.intersection(&ancestors).cloned().collect(),
        });
    }
    common?
        .into_iter()
        .map(|id| (brute_force_root_depth(store, &id), id))
        // max_by favors the later of equal elements; ids ascend, so reverse
        // the id order to keep the smallest id among equally deep ones.
        .max_by(|a, b| a.0.cmp(&b.0).then_with(|| b.1.cmp(&a.1)))
        .map(|(_, id)| id)
}

/// Exact two-sided sign-flip p-value by full enumeration of all 2^n
/// assignments (no add-one smoothing; this is the true null distribution).
pub fn exact_randomization_pvalue(diffs: &[f64]) -> f64 {
    let n = diffs.len();
    assert!(n <= 20, "enumeration only feasible for small n");
    let observed = (diffs.iter().sum::<f64>() / n as f64).abs();
    let total = 1usize << n;
    let mut count = 0usize;
    for mask in 0..total {
        let sum: f64 = diffs
            .iter()
            .enumerate()
            .map(|(i, d)| if mask >> i & 1 == 1 { *d } else { -*d })
            .sum();
        if (sum / n as f64).abs() >= observed {
            count += 1;
        }
    }
    count as f64 / total as f64
}

/// Self-deleting scratch directory under the system temp dir.
pub struct TempDir(pub PathBuf);

impl TempDir {
    pub fn new(label: &str) -> Self {
        let pid = std::process::id();
        let stamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .unwrap()
            .as_nanos();
        let path = std::env::temp_dir().join(format!("ontosearch-{label}-{pid}-{stamp}"));
        std::fs::create_dir_all(&path).unwrap();
        Self(path)
    }

    pub fn path(&self) -> &Path {
        &self.0
    }
}

impl Drop for TempDir {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

/// Writes the five ontology files into `dir` and loads them.
pub fn load_inline_store(
    dir: &Path,
    entities: &str,
    classes: &str,
    synsets: &str,
    facts: &str,
    phrases: &str,
) -> Result<OntologyStore, ontosearch::ontology::StoreError> {
    std::fs::write(dir.join("entities.jsonl"), entities).unwrap();
    std::fs::write(dir.join("classes.jsonl"), classes).unwrap();
    std::fs::write(dir.join("synsets.jsonl"), synsets).unwrap();
    std::fs::write(dir.join("facts.tsv"), facts).unwrap();
    std::fs::write(dir.join("relation_phrases.tsv"), phrases).unwrap();
    OntologyStore::load(&OntologyPaths::in_dir(dir))
}
