//! Retrieval effectiveness measurement: per-query average precision, MAP,
//! 11-point interpolated precision-recall and F-measure curves, and a paired
//! two-sided randomization significance test.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The eleven standard recall levels.
pub const RECALL_LEVELS: [f64; 11] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },
    #[error("relevant set must not be empty")]
    EmptyRelevantSet,
    #[error("run and qrels share no queries")]
    DisjointQuerySets,
    #[error("paired score vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("paired score vectors must not be empty")]
    EmptyInput,
    #[error("randomization test needs at least one permutation")]
    NoPermutations,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Binary relevance judgments. Queries judged without a single relevant
/// document are dropped at parse time with a warning.
#[derive(Debug, Clone, Default)]
pub struct Qrels {
    relevant: BTreeMap<String, BTreeSet<String>>,
    pub warnings: Vec<String>,
}

impl Qrels {
    pub fn from_trec_file(path: &Path) -> Result<Self, EvalError> {
        Self::from_trec_str(&fs::read_to_string(path)?, &path.display().to_string())
    }

    /// Parses the whitespace-separated `query_id 0 doc_id rel` format with
    /// binary relevance.
    pub fn from_trec_str(content: &str, file: &str) -> Result<Self, EvalError> {
        let mut relevant: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        let mut judged: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (line_no, line) in content.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(EvalError::Parse {
                    file: file.to_string(),
                    line: line_no + 1,
                    message: format!("expected 4 fields, got {}", fields.len()),
                });
            }
            let (query_id, doc_id, rel) = (fields[0], fields[2], fields[3]);
            if !judged
                .entry(query_id.to_string())
                .or_default()
                .insert(doc_id.to_string())
            {
                return Err(EvalError::Parse {
                    file: file.to_string(),
                    line: line_no + 1,
                    message: format!("duplicate judgment for ({query_id}, {doc_id})"),
                });
            }
            let rel: u8 = match rel {
                "0" => 0,
                "1" => 1,
                other => {
                    return Err(EvalError::Parse {
                        file: file.to_string(),
                        line: line_no + 1,
                        message: format!("relevance must be 0 or 1, got `{other}`"),
                    })
                }
            };
            relevant.entry(query_id.to_string()).or_default();
            if rel == 1 {
                relevant
                    .get_mut(query_id)
                    .unwrap()
                    .insert(doc_id.to_string());
            }
        }
        let mut warnings = Vec::new();
        relevant.retain(|query_id, docs| {
            if docs.is_empty() {
                warnings.push(format!(
                    "query {query_id} has no relevant documents; excluded"
                ));
                false
            } else {
                true
            }
        });
        Ok(Self { relevant, warnings })
    }

    pub fn insert(&mut self, query_id: impl Into<String>, relevant_docs: BTreeSet<String>) {
        self.relevant.insert(query_id.into(), relevant_docs);
    }

    pub fn relevant_for(&self, query_id: &str) -> Option<&BTreeSet<String>> {
        self.relevant.get(query_id)
    }

    pub fn query_ids(&self) -> impl Iterator<Item = &str> {
        self.relevant.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.relevant.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relevant.is_empty()
    }
}

/// Ranked retrieval output per query, in rank order without duplicates.
#[derive(Debug, Clone, Default)]
pub struct RunResult {
    rankings: BTreeMap<String, Vec<(String, f64)>>,
}

impl RunResult {
    pub fn from_trec_file(path: &Path) -> Result<Self, EvalError> {
        Self::from_trec_str(&fs::read_to_string(path)?, &path.display().to_string())
    }

    /// Parses the `query_id Q0 doc_id rank score tag` run format, ordering
    /// each query's documents by the rank field.
    pub fn from_trec_str(content: &str, file: &str) -> Result<Self, EvalError> {
        let mut rows: BTreeMap<String, Vec<(u32, String, f64)>> = BTreeMap::new();
        let mut seen: BTreeSet<(String, String)> = BTreeSet::new();
        for (line_no, line) in content.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 6 {
                return Err(EvalError::Parse {
                    file: file.to_string(),
                    line: line_no + 1,
                    message: format!("expected 6 fields, got {}", fields.len()),
                });
            }
            let query_id = fields[0].to_string();
            let doc_id = fields[2].to_string();
            if !seen.insert((query_id.clone(), doc_id.clone())) {
                return Err(EvalError::Parse {
                    file: file.to_string(),
                    line: line_no + 1,
                    message: format!("doc {doc_id} repeated for query {query_id}"),
                });
            }
            let rank: u32 = fields[3].parse().map_err(|e| EvalError::Parse {
                file: file.to_string(),
                line: line_no + 1,
                message: format!("bad rank: {e}"),
            })?;
            let score: f64 = fields[4].parse().map_err(|e| EvalError::Parse {
                file: file.to_string(),
                line: line_no + 1,
                message: format!("bad score: {e}"),
            })?;
            rows.entry(query_id)
                .or_default()
                .push((rank, doc_id, score));
        }
        let mut rankings = BTreeMap::new();
        for (query_id, mut docs) in rows {
            docs.sort_by_key(|(rank, _, _)| *rank);
            rankings.insert(
                query_id,
                docs.into_iter()
                    .map(|(_, doc, score)| (doc, score))
                    .collect(),
            );
        }
        Ok(Self { rankings })
    }

    /// Adds a ranking produced in-process (doc ids in rank order with
    /// scores). Any previous ranking for the query is replaced.
    pub fn insert_ranking(&mut self, query_id: impl Into<String>, docs: Vec<(String, f64)>) {
        self.rankings.insert(query_id.into(), docs);
    }

    pub fn ranked_docs(&self, query_id: &str) -> Vec<String> {
        self.rankings
            .get(query_id)
            .map(|docs| docs.iter().map(|(d, _)| d.clone()).collect())
            .unwrap_or_default()
    }

    pub fn query_ids(&self) -> impl Iterator<Item = &str> {
        self.rankings.keys().map(String::as_str)
    }

    /// Serializes in the TREC run format.
    pub fn to_trec_string(&self, tag: &str) -> String {
        let mut out = String::new();
        for (query_id, docs) in &self.rankings {
            for (rank, (doc_id, score)) in docs.iter().enumerate() {
                out.push_str(&format!(
                    "{query_id} Q0 {doc_id} {} {score} {tag}\n",
                    rank + 1
                ));
            }
        }
        out
    }
}

/// The measured quantities of one run against one qrels set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricReport {
    pub per_query_ap: BTreeMap<String, f64>,
    pub map: f64,
    /// `(recall level, average interpolated precision)`, 11 points.
    pub pr_curve: Vec<(f64, f64)>,
    /// `(recall level, F measure)`, 11 points.
    pub f_curve: Vec<(f64, f64)>,
}

/// Mean over the relevant documents of the precision at each relevant
/// document's rank; relevant documents never retrieved contribute zero.
pub fn average_precision(
    ranking: &[String],
    relevant: &BTreeSet<String>,
) -> Result<f64, EvalError> {
    if relevant.is_empty() {
        return Err(EvalError::EmptyRelevantSet);
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, doc) in ranking.iter().enumerate() {
        if relevant.contains(doc) {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    Ok(sum / relevant.len() as f64)
}

/// Interpolated precision of one ranking at the eleven recall levels:
/// the maximum precision attained at any recall at or beyond each level.
pub fn interpolated_precision_points(
    ranking: &[String],
    relevant: &BTreeSet<String>,
) -> Result<[f64; 11], EvalError> {
    if relevant.is_empty() {
        return Err(EvalError::EmptyRelevantSet);
    }
    // Precision/recall after each retrieved relevant document.
    let mut points: Vec<(f64, f64)> = Vec::new();
    let mut hits = 0usize;
    for (i, doc) in ranking.iter().enumerate() {
        if relevant.contains(doc) {
            hits += 1;
            points.push((
                hits as f64 / relevant.len() as f64,
                hits as f64 / (i + 1) as f64,
            ));
        }
    }
    let mut out = [0.0; 11];
    for (level_index, level) in RECALL_LEVELS.iter().enumerate() {
        out[level_index] = points
            .iter()
            .filter(|(recall, _)| *recall >= *level - 1e-12)
            .map(|(_, precision)| *precision)
            .fold(0.0, f64::max);
    }
    Ok(out)
}

/// Unweighted mean of average precision over the qrels queries; queries
/// missing from the run score zero.
pub fn mean_average_precision(run: &RunResult, qrels: &Qrels) -> Result<f64, EvalError> {
    Ok(evaluate(run, qrels)?.map)
}

/// Full effectiveness report: per-query AP, MAP, and the averaged
/// interpolated P-R and F-R curves. The F measure at each level uses the
/// recall level itself: `F = 2 P R / (P + R)`, zero when `P + R` is zero
/// (so F is always zero at recall 0).
pub fn evaluate(run: &RunResult, qrels: &Qrels) -> Result<MetricReport, EvalError> {
    if qrels.is_empty() {
        return Err(EvalError::DisjointQuerySets);
    }
    if !qrels.query_ids().any(|q| run.rankings.contains_key(q)) {
        return Err(EvalError::DisjointQuerySets);
    }
    let mut per_query_ap = BTreeMap::new();
    let mut precision_sums = [0.0; 11];
    for query_id in qrels.query_ids() {
        let relevant = qrels.relevant_for(query_id).unwrap();
        let ranking = run.ranked_docs(query_id);
        per_query_ap.insert(query_id.to_string(), average_precision(&ranking, relevant)?);
        let points = interpolated_precision_points(&ranking, relevant)?;
        for (sum, p) in precision_sums.iter_mut().zip(points) {
            *sum += p;
        }
    }
    let query_count = per_query_ap.len() as f64;
    let map = per_query_ap.values().sum::<f64>() / query_count;
    let mut pr_curve = Vec::with_capacity(11);
    let mut f_curve = Vec::with_capacity(11);
    for (level, sum) in RECALL_LEVELS.iter().zip(precision_sums) {
        let precision = sum / query_count;
        let f = if precision + level > 0.0 {
            2.0 * precision * level / (precision + level)
        } else {
            0.0
        };
        pr_curve.push((*level, precision));
        f_curve.push((*level, f));
    }
    Ok(MetricReport {
        per_query_ap,
        map,
        pr_curve,
        f_curve,
    })
}

/// Two-sided paired randomization (sign-flipping) test.
///
/// The observed statistic is `|mean(a - b)|`. Each permutation flips every
/// pair's sign independently with probability 1/2; permutations where the
/// permuted statistic is at least the observed one (ties count) accumulate,
/// and the p-value is `(count + 1) / (permutations + 1)`.
///
/// Each permutation index draws from its own ChaCha stream of the seeded
/// generator, so the result is reproducible regardless of evaluation order.
pub fn randomization_test(
    ap_a: &[f64],
    ap_b: &[f64],
    permutations: usize,
    seed: u64,
) -> Result<f64, EvalError> {
    if ap_a.len() != ap_b.len() {
        return Err(EvalError::LengthMismatch(ap_a.len(), ap_b.len()));
    }
    if ap_a.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    if permutations == 0 {
        return Err(EvalError::NoPermutations);
    }
    let diffs: Vec<f64> = ap_a.iter().zip(ap_b).map(|(a, b)| a - b).collect();
    let n = diffs.len() as f64;
    let observed = (diffs.iter().sum::<f64>() / n).abs();

    let mut count = 0usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for permutation in 0..permutations {
        rng.set_stream(permutation as u64);
        let mut bits = 0u64;
        let mut remaining = 0u32;
        let mut sum = 0.0;
        for &d in &diffs {
            if remaining == 0 {
                bits = rng.next_u64();
                remaining = 64;
            }
            sum += if bits & 1 == 1 { d } else { -d };
            bits >>= 1;
            remaining -= 1;
        }
        if (sum / n).abs() >= observed {
            count += 1;
        }
    }
    Ok((count as f64 + 1.0) / (permutations as f64 + 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn docs(ids: &[&str]) -> Vec<String> {
        ids.iter().map(|s| s.to_string()).collect()
    }

    fn set(ids: &[&str]) -> BTreeSet<String> {
        ids.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn ap_hand_example() {
        let ap = average_precision(&docs(&["d1", "d2", "d3"]), &set(&["d1", "d3"])).unwrap();
        assert!((ap - (1.0 + 2.0 / 3.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn ap_edges() {
        assert_eq!(
            average_precision(&docs(&["d1"]), &set(&["d1"])).unwrap(),
            1.0
        );
        assert_eq!(
            average_precision(&docs(&["d2"]), &set(&["d1"])).unwrap(),
            0.0
        );
        assert!(matches!(
            average_precision(&docs(&["d1"]), &BTreeSet::new()),
            Err(EvalError::EmptyRelevantSet)
        ));
    }

    #[test]
    fn interpolation_hand_example() {
        // relevant {d1,d2}, ranking [d1, x, d2]: precision 1.0 up to recall
        // 0.5, then 2/3.
        let points =
            interpolated_precision_points(&docs(&["d1", "x", "d2"]), &set(&["d1", "d2"])).unwrap();
        for (i, level) in RECALL_LEVELS.iter().enumerate() {
            let expected = if *level <= 0.5 { 1.0 } else { 2.0 / 3.0 };
            assert!((points[i] - expected).abs() < 1e-12, "level {level}");
        }
    }

    #[test]
    fn randomization_identical_inputs_give_one() {
        let x = [0.2, 0.4, 0.9, 0.1];
        let p = randomization_test(&x, &x, 1000, 7).unwrap();
        assert_eq!(p, 1.0);
    }

    #[test]
    fn randomization_rejects_bad_input() {
        assert!(matches!(
            randomization_test(&[1.0], &[1.0, 2.0], 10, 0),
            Err(EvalError::LengthMismatch(1, 2))
        ));
        assert!(matches!(
            randomization_test(&[], &[], 10, 0),
            Err(EvalError::EmptyInput)
        ));
    }

    #[test]
    fn qrels_drop_queries_without_relevant_docs() {
        let qrels = Qrels::from_trec_str("q1 0 d1 1\nq2 0 d9 0\n", "test").unwrap();
        assert_eq!(qrels.len(), 1);
        assert_eq!(qrels.warnings.len(), 1);
        assert!(qrels.warnings[0].contains("q2"));
    }

    #[test]
    fn run_rejects_duplicate_docs() {
        let err = RunResult::from_trec_str("q1 Q0 d1 1 2.0 tag\nq1 Q0 d1 2 1.0 tag\n", "test")
            .unwrap_err();
        assert!(matches!(err, EvalError::Parse { line: 2, .. }));
    }
}
