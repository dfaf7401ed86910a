//! Generalized vector space model: a vocabulary over serialized terms, an
//! inverted index with TF-IDF weights, and cosine-ranked retrieval.
//!
//! Matching is exact on serialized terms; the document side has already
//! materialized every pattern a query can emit, so no wildcard matching
//! happens at query time. Weighting is `(1 + ln tf) * ln(N / df)` with an idf
//! floor so that terms present in every document still contribute.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::annotation::{AnnotatedDocument, QueryRepresentation};

/// Lower bound on inverse document frequency. Keeps single-document corpora
/// and all-document terms from zeroing out entire vectors.
pub const IDF_FLOOR: f64 = 0.01;

/// Sublinear term-frequency weight, extended continuously below 1 so that
/// fractional virtual-term weights stay positive: `1 + ln tf` for `tf >= 1`,
/// `tf` otherwise.
fn tf_weight(tf: f64) -> f64 {
    if tf >= 1.0 {
        1.0 + tf.ln()
    } else {
        tf
    }
}

/// Bidirectional map between serialized terms and dense ids. Ids are
/// assigned in lexicographic term order, so the mapping is independent of
/// document order and stable across rebuilds.
#[derive(Debug, Clone, Default)]
pub struct Vocabulary {
    terms: Vec<String>,
    ids: HashMap<String, u32>,
}

impl Vocabulary {
    fn from_sorted(terms: Vec<String>) -> Self {
        let ids = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Self { terms, ids }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn id(&self, term: &str) -> Option<u32> {
        self.ids.get(term).copied()
    }

    pub fn term(&self, id: u32) -> Option<&str> {
        self.terms.get(id as usize).map(String::as_str)
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().map(String::as_str)
    }
}

/// A retrieval result; results sort by score descending, then doc id.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredDoc {
    pub doc_id: String,
    pub score: f64,
}

#[derive(Debug, Error)]
pub enum VsmError {
    #[error("duplicate doc id `{0}`")]
    DuplicateDocId(String),
    #[error("query has no effective terms")]
    NoEffectiveTerms,
    #[error("doc `{0}` is not part of this index")]
    UnknownDoc(String),
    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Immutable inverted index over annotated documents.
#[derive(Debug, Clone)]
pub struct InvertedIndex {
    vocab: Vocabulary,
    doc_ids: Vec<String>,
    doc_index: HashMap<String, u32>,
    /// Per term id: `(doc index, raw tf)` sorted by doc index.
    postings: Vec<Vec<(u32, f64)>>,
    doc_freq: Vec<u32>,
    doc_norms: Vec<f64>,
}

impl InvertedIndex {
    /// Builds the index. Documents may arrive in any order; the result is
    /// identical for any permutation of the input.
    pub fn build(docs: &[AnnotatedDocument]) -> Result<Self, VsmError> {
        let mut by_id: BTreeMap<&str, &AnnotatedDocument> = BTreeMap::new();
        for doc in docs {
            if by_id.insert(&doc.doc_id, doc).is_some() {
                return Err(VsmError::DuplicateDocId(doc.doc_id.clone()));
            }
        }
        let doc_ids: Vec<String> = by_id.keys().map(|s| s.to_string()).collect();
        let doc_index: HashMap<String, u32> = doc_ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i as u32))
            .collect();

        let mut term_set: BTreeMap<String, ()> = BTreeMap::new();
        for doc in by_id.values() {
            for term in doc.terms.keys() {
                term_set.entry(term.serialized()).or_insert(());
            }
        }
        let vocab = Vocabulary::from_sorted(term_set.into_keys().collect());

        let mut postings: Vec<Vec<(u32, f64)>> = vec![Vec::new(); vocab.len()];
        for (di, doc) in by_id.values().enumerate() {
            for (term, &tf) in &doc.terms {
                if tf > 0.0 {
                    let tid = vocab.id(&term.serialized()).expect("term in vocab");
                    postings[tid as usize].push((di as u32, tf));
                }
            }
        }
        // Doc ids were inserted in sorted order, so postings are too.
        let doc_freq: Vec<u32> = postings.iter().map(|p| p.len() as u32).collect();

        let n = doc_ids.len();
        let mut doc_norms = vec![0.0; n];
        for (tid, posting) in postings.iter().enumerate() {
            let idf = idf_value(n, doc_freq[tid]);
            for &(di, tf) in posting {
                let w = tf_weight(tf) * idf;
                doc_norms[di as usize] += w * w;
            }
        }
        for norm in &mut doc_norms {
            *norm = norm.sqrt();
        }

        Ok(Self {
            vocab,
            doc_ids,
            doc_index,
            postings,
            doc_freq,
            doc_norms,
        })
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn doc_count(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn contains_doc(&self, doc_id: &str) -> bool {
        self.doc_index.contains_key(doc_id)
    }

    pub fn doc_norm(&self, doc_id: &str) -> Option<f64> {
        self.doc_index
            .get(doc_id)
            .map(|&i| self.doc_norms[i as usize])
    }

    pub fn doc_freq(&self, term: &str) -> u32 {
        self.vocab
            .id(term)
            .map_or(0, |tid| self.doc_freq[tid as usize])
    }

    /// `max(ln(N / df), IDF_FLOOR)` for a term of the vocabulary.
    pub fn idf(&self, term: &str) -> Option<f64> {
        self.vocab
            .id(term)
            .map(|tid| idf_value(self.doc_count(), self.doc_freq[tid as usize]))
    }

    /// Query weights over the vocabulary: ordinary terms count 1 per
    /// occurrence, latent terms count `latent_term_weight`. Terms outside the
    /// vocabulary contribute nothing.
    fn query_weights(
        &self,
        query: &QueryRepresentation,
        latent_term_weight: f64,
    ) -> BTreeMap<u32, f64> {
        let mut tf: BTreeMap<u32, f64> = BTreeMap::new();
        for term in &query.terms {
            if let Some(tid) = self.vocab.id(&term.serialized()) {
                *tf.entry(tid).or_insert(0.0) += 1.0;
            }
        }
        for (term, _) in &query.latent_terms {
            if let Some(tid) = self.vocab.id(&term.serialized()) {
                *tf.entry(tid).or_insert(0.0) += latent_term_weight;
            }
        }
        tf.into_iter()
            .filter(|(_, f)| *f > 0.0)
            .map(|(tid, f)| {
                let idf = idf_value(self.doc_count(), self.doc_freq[tid as usize]);
                (tid, tf_weight(f) * idf)
            })
            .collect()
    }

    /// Cosine-ranked top-`k` documents for the query. Fails with
    /// [`VsmError::NoEffectiveTerms`] when no query term is in the
    /// vocabulary.
    pub fn search(
        &self,
        query: &QueryRepresentation,
        k: usize,
        latent_term_weight: f64,
    ) -> Result<Vec<ScoredDoc>, VsmError> {
        let weights = self.query_weights(query, latent_term_weight);
        let query_norm: f64 = weights.values().map(|w| w * w).sum::<f64>().sqrt();
        if weights.is_empty() || query_norm == 0.0 {
            return Err(VsmError::NoEffectiveTerms);
        }
        let mut dot: HashMap<u32, f64> = HashMap::new();
        for (&tid, &wq) in &weights {
            let idf = idf_value(self.doc_count(), self.doc_freq[tid as usize]);
            for &(di, tf) in &self.postings[tid as usize] {
                *dot.entry(di).or_insert(0.0) += wq * tf_weight(tf) * idf;
            }
        }
        let mut scored: Vec<ScoredDoc> = dot
            .into_iter()
            .map(|(di, dot)| ScoredDoc {
                doc_id: self.doc_ids[di as usize].clone(),
                score: dot / (query_norm * self.doc_norms[di as usize]),
            })
            .collect();
        scored.sort_by(|a, b| {
            b.score
                .partial_cmp(&a.score)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.doc_id.cmp(&b.doc_id))
        });
        scored.truncate(k);
        Ok(scored)
    }

    /// Brute-force cosine between one indexed document and a query, computed
    /// densely from the document's own term multiset rather than through the
    /// postings. Serves as the definitional oracle for [`Self::search`].
    pub fn score_document(
        &self,
        doc: &AnnotatedDocument,
        query: &QueryRepresentation,
        latent_term_weight: f64,
    ) -> Result<f64, VsmError> {
        if !self.contains_doc(&doc.doc_id) {
            return Err(VsmError::UnknownDoc(doc.doc_id.clone()));
        }
        let query_weights = self.query_weights(query, latent_term_weight);
        let query_norm: f64 = query_weights.values().map(|w| w * w).sum::<f64>().sqrt();
        if query_weights.is_empty() || query_norm == 0.0 {
            return Err(VsmError::NoEffectiveTerms);
        }
        let mut doc_norm_sq = 0.0;
        let mut dot = 0.0;
        for (term, &tf) in &doc.terms {
            if tf <= 0.0 {
                continue;
            }
            let Some(tid) = self.vocab.id(&term.serialized()) else {
                continue;
            };
            let idf = idf_value(self.doc_count(), self.doc_freq[tid as usize]);
            let wd = tf_weight(tf) * idf;
            doc_norm_sq += wd * wd;
            if let Some(wq) = query_weights.get(&tid) {
                dot += wq * wd;
            }
        }
        if doc_norm_sq == 0.0 {
            return Ok(0.0);
        }
        Ok(dot / (query_norm * doc_norm_sq.sqrt()))
    }

    /// The query terms that occur in the given document, serialized; used by
    /// result explanation.
    pub fn matched_terms(&self, query: &QueryRepresentation, doc_id: &str) -> Vec<String> {
        let Some(&di) = self.doc_index.get(doc_id) else {
            return Vec::new();
        };
        let mut all: Vec<&crate::term::GeneralizedTerm> = query.terms.iter().collect();
        all.extend(query.latent_terms.iter().map(|(t, _)| t));
        let mut out = Vec::new();
        for term in all {
            let serialized = term.serialized();
            if out.contains(&serialized) {
                continue;
            }
            if let Some(tid) = self.vocab.id(&serialized) {
                if self.postings[tid as usize].iter().any(|&(d, _)| d == di) {
                    out.push(serialized);
                }
            }
        }
        out
    }

    /// Writes `vocab.tsv`, `postings.tsv`, and `meta.tsv` into `dir`. The
    /// given header pairs are embedded in every file as leading `#` comment
    /// lines, so identical inputs produce byte-identical files.
    pub fn persist(&self, dir: &Path, header: &[(String, String)]) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        let head = |buf: &mut String| {
            for (key, value) in header {
                let _ = writeln!(buf, "# {key}\t{value}");
            }
        };

        let mut vocab = String::new();
        head(&mut vocab);
        for (tid, term) in self.vocab.terms().enumerate() {
            let _ = writeln!(vocab, "{tid}\t{term}");
        }
        fs::write(dir.join("vocab.tsv"), vocab)?;

        let mut postings = String::new();
        head(&mut postings);
        for (tid, posting) in self.postings.iter().enumerate() {
            for &(di, tf) in posting {
                let _ = writeln!(postings, "{tid}\t{}\t{tf}", self.doc_ids[di as usize]);
            }
        }
        fs::write(dir.join("postings.tsv"), postings)?;

        let mut meta = String::new();
        head(&mut meta);
        let _ = writeln!(meta, "doc_count\t{}", self.doc_count());
        for (di, doc_id) in self.doc_ids.iter().enumerate() {
            let _ = writeln!(meta, "{doc_id}\t{}", self.doc_norms[di]);
        }
        fs::write(dir.join("meta.tsv"), meta)?;
        Ok(())
    }

    /// Reads an index persisted by [`Self::persist`], returning it together
    /// with the header pairs found in `meta.tsv`.
    pub fn load(dir: &Path) -> Result<(Self, BTreeMap<String, String>), VsmError> {
        let parse_err = |file: &Path, line: usize, message: String| VsmError::Parse {
            file: file.display().to_string(),
            line,
            message,
        };

        let vocab_path = dir.join("vocab.tsv");
        let mut terms = Vec::new();
        for (line_no, line) in fs::read_to_string(&vocab_path)?.lines().enumerate() {
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let (tid, term) = line.split_once('\t').ok_or_else(|| {
                parse_err(&vocab_path, line_no + 1, "expected id<TAB>term".into())
            })?;
            let tid: usize = tid
                .parse()
                .map_err(|e| parse_err(&vocab_path, line_no + 1, format!("bad term id: {e}")))?;
            if tid != terms.len() {
                return Err(parse_err(
                    &vocab_path,
                    line_no + 1,
                    format!("term ids must be dense, expected {} got {tid}", terms.len()),
                ));
            }
            terms.push(term.to_string());
        }
        let vocab = Vocabulary::from_sorted(terms);

        let meta_path = dir.join("meta.tsv");
        let mut header = BTreeMap::new();
        let mut doc_count: Option<usize> = None;
        let mut doc_ids = Vec::new();
        let mut doc_norms = Vec::new();
        for (line_no, line) in fs::read_to_string(&meta_path)?.lines().enumerate() {
            if let Some(comment) = line.strip_prefix('#') {
                if let Some((key, value)) = comment.trim_start().split_once('\t') {
                    header.insert(key.to_string(), value.to_string());
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let (left, right) = line.split_once('\t').ok_or_else(|| {
                parse_err(&meta_path, line_no + 1, "expected key<TAB>value".into())
            })?;
            if doc_count.is_none() {
                if left != "doc_count" {
                    return Err(parse_err(
                        &meta_path,
                        line_no + 1,
                        "missing doc_count header".into(),
                    ));
                }
                doc_count = Some(right.parse().map_err(|e| {
                    parse_err(&meta_path, line_no + 1, format!("bad doc_count: {e}"))
                })?);
                continue;
            }
            doc_ids.push(left.to_string());
            doc_norms.push(
                right
                    .parse()
                    .map_err(|e| parse_err(&meta_path, line_no + 1, format!("bad norm: {e}")))?,
            );
        }
        let doc_count =
            doc_count.ok_or_else(|| parse_err(&meta_path, 1, "missing doc_count header".into()))?;
        if doc_count != doc_ids.len() {
            return Err(parse_err(
                &meta_path,
                1,
                format!(
                    "doc_count {doc_count} does not match {} doc lines",
                    doc_ids.len()
                ),
            ));
        }
        let doc_index: HashMap<String, u32> = doc_ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i as u32))
            .collect();

        let postings_path = dir.join("postings.tsv");
        let mut postings: Vec<Vec<(u32, f64)>> = vec![Vec::new(); vocab.len()];
        for (line_no, line) in fs::read_to_string(&postings_path)?.lines().enumerate() {
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(parse_err(
                    &postings_path,
                    line_no + 1,
                    "expected term_id<TAB>doc_id<TAB>tf".into(),
                ));
            }
            let tid: usize = fields[0]
                .parse()
                .map_err(|e| parse_err(&postings_path, line_no + 1, format!("bad term id: {e}")))?;
            if tid >= vocab.len() {
                return Err(parse_err(
                    &postings_path,
                    line_no + 1,
                    format!("term id {tid} out of range"),
                ));
            }
            let di = *doc_index.get(fields[1]).ok_or_else(|| {
                parse_err(
                    &postings_path,
                    line_no + 1,
                    format!("unknown doc id `{}`", fields[1]),
                )
            })?;
            let tf: f64 = fields[2]
                .parse()
                .map_err(|e| parse_err(&postings_path, line_no + 1, format!("bad tf: {e}")))?;
            postings[tid].push((di, tf));
        }
        let doc_freq: Vec<u32> = postings.iter().map(|p| p.len() as u32).collect();

        Ok((
            Self {
                vocab,
                doc_ids,
                doc_index,
                postings,
                doc_freq,
                doc_norms,
            },
            header,
        ))
    }
}

fn idf_value(doc_count: usize, doc_freq: u32) -> f64 {
    let raw = (doc_count as f64 / doc_freq as f64).ln();
    raw.max(IDF_FLOOR)
}
