//! Command implementations behind the `ontosearch` binary: index a corpus,
//! search it, print query expansions, evaluate a run, and compare two
//! evaluation reports.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use ontosearch::corpus::{read_auto, read_topics};
use ontosearch::eval::{evaluate, randomization_test, MetricReport, Qrels, RunResult};
use ontosearch::lexicon::Lexicon;
use ontosearch::ontology::{OntologyPaths, OntologyStore};
use ontosearch::pipeline::Engine;
use ontosearch::vsm::{InvertedIndex, VsmError};
use ontosearch::{Expansion, LatentRendering, ModelConfig};

/// Everything a run depended on, recorded verbatim in every output file.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct RunManifest {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corpus: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ontology: Option<String>,
    pub preset: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub topics: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub run: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qrels: Option<String>,
    pub seed: u64,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("manifest serializes")
    }
}

/// Optional JSON configuration file. Path fields resolve relative to the
/// current directory; the model block overrides the chosen preset field by
/// field through serde defaults.
#[derive(Debug, Clone, Deserialize, Default)]
#[serde(default)]
pub struct FileConfig {
    pub preset: Option<String>,
    pub ontology: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub lemmas: Option<PathBuf>,
    pub seed: Option<u64>,
    /// Force keyword rendering of latent concepts regardless of preset.
    pub latent_keywords: Option<bool>,
    pub model: Option<serde_json::Value>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Shared command context assembled from flags plus the optional config file.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    pub config: FileConfig,
    pub preset: Option<String>,
    pub seed: Option<u64>,
    pub latent_keywords: bool,
}

impl Settings {
    pub fn preset_name(&self) -> Option<String> {
        self.preset.clone().or_else(|| self.config.preset.clone())
    }

    pub fn seed(&self) -> u64 {
        self.seed.or(self.config.seed).unwrap_or(42)
    }

    /// Resolves the model configuration for `preset`, applying the config
    /// file's model overrides and the keyword-rendering flag.
    pub fn model(&self, preset: &str) -> Result<ModelConfig> {
        let mut model = ModelConfig::preset(preset).ok_or_else(|| {
            anyhow!(
                "unknown preset `{preset}` (expected one of {:?})",
                ontosearch::PRESET_NAMES
            )
        })?;
        if let Some(overrides) = &self.config.model {
            let mut value = serde_json::to_value(&model)?;
            merge_json(&mut value, overrides);
            model = serde_json::from_value(value).context("applying model overrides")?;
        }
        if self.latent_keywords || self.config.latent_keywords == Some(true) {
            model.latent_rendering = LatentRendering::Keyword;
        }
        Ok(model)
    }

    pub fn lexicon(&self) -> Result<Lexicon> {
        match (&self.config.stopwords, &self.config.lemmas) {
            (Some(stop), Some(lem)) => Ok(Lexicon::from_files(stop, lem)?),
            (None, None) => Ok(Lexicon::bundled()),
            _ => bail!("config must set both `stopwords` and `lemmas`, or neither"),
        }
    }
}

/// Prints to stdout, tolerating a consumer that closed the pipe early.
fn emit(text: &str) {
    let _ = std::io::stdout().write_all(text.as_bytes());
}

fn merge_json(base: &mut serde_json::Value, overlay: &serde_json::Value) {
    match (base, overlay) {
        (serde_json::Value::Object(base), serde_json::Value::Object(overlay)) => {
            for (key, value) in overlay {
                match base.get_mut(key) {
                    Some(slot) => merge_json(slot, value),
                    None => {
                        base.insert(key.clone(), value.clone());
                    }
                }
            }
        }
        (base, overlay) => *base = overlay.clone(),
    }
}

fn load_engine(settings: &Settings, ontology: &Path, preset: &str) -> Result<Engine> {
    let store = OntologyStore::load(&OntologyPaths::in_dir(ontology))
        .with_context(|| format!("loading ontology from {}", ontology.display()))?;
    Ok(Engine::new(
        store,
        settings.lexicon()?,
        settings.model(preset)?,
    ))
}

/// `index`: annotate the corpus under the chosen preset and persist the
/// inverted index with its manifest.
pub fn cmd_index(settings: &Settings, corpus: &Path, ontology: &Path, out: &Path) -> Result<()> {
    let preset = settings
        .preset_name()
        .unwrap_or_else(|| "semantic".to_string());
    let engine = load_engine(settings, ontology, &preset)?;
    let docs = read_auto(corpus).with_context(|| format!("reading corpus {}", corpus.display()))?;
    let index = engine.build_index(&docs)?;
    let manifest = RunManifest {
        corpus: Some(corpus.display().to_string()),
        ontology: Some(ontology.display().to_string()),
        preset: preset.clone(),
        index: Some(out.display().to_string()),
        topics: None,
        run: None,
        qrels: None,
        seed: settings.seed(),
    };
    let header = vec![
        ("preset".to_string(), preset.clone()),
        ("manifest".to_string(), manifest.to_json()),
    ];
    index.persist(out, &header)?;
    println!(
        "indexed {} documents, {} terms, preset {preset} -> {}",
        index.doc_count(),
        index.vocabulary().len(),
        out.display()
    );
    Ok(())
}

fn load_index(dir: &Path) -> Result<(InvertedIndex, BTreeMap<String, String>)> {
    InvertedIndex::load(dir).with_context(|| format!("loading index from {}", dir.display()))
}

fn index_manifest(header: &BTreeMap<String, String>) -> Option<RunManifest> {
    header
        .get("manifest")
        .and_then(|text| serde_json::from_str(text).ok())
}

/// Resolves the preset for `search`/`expand` against what the index was
/// built with; a mismatch is an error rather than a silent reinterpretation.
fn resolve_search_preset(settings: &Settings, header: &BTreeMap<String, String>) -> Result<String> {
    let indexed = header.get("preset").cloned();
    match (settings.preset_name(), indexed) {
        (Some(wanted), Some(indexed)) if wanted != indexed => bail!(
            "index was built with preset `{indexed}` but `{wanted}` was requested; rebuild the index or drop --preset"
        ),
        (Some(wanted), _) => Ok(wanted),
        (None, Some(indexed)) => Ok(indexed),
        (None, None) => Ok("semantic".to_string()),
    }
}

/// `search`: represent one query (or a topics file) against an index and
/// print the ranked results; optionally write a TREC run file.
#[allow(clippy::too_many_arguments)]
pub fn cmd_search(
    settings: &Settings,
    index_dir: &Path,
    ontology: Option<&Path>,
    query: Option<&str>,
    topics: Option<&Path>,
    k: usize,
    explain: bool,
    run_out: Option<&Path>,
    tag: &str,
) -> Result<()> {
    let (index, header) = load_index(index_dir)?;
    let preset = resolve_search_preset(settings, &header)?;
    let ontology_dir = match ontology {
        Some(dir) => dir.to_path_buf(),
        None => index_manifest(&header)
            .and_then(|m| m.ontology)
            .map(PathBuf::from)
            .ok_or_else(|| {
                anyhow!("no --ontology given and the index manifest does not record one")
            })?,
    };
    let engine = load_engine(settings, &ontology_dir, &preset)?;

    let queries: Vec<(String, String)> = match (query, topics) {
        (Some(text), None) => vec![("q1".to_string(), text.to_string())],
        (None, Some(path)) => read_topics(path)?,
        _ => bail!("exactly one of --query or --topics is required"),
    };

    let manifest = RunManifest {
        corpus: None,
        ontology: Some(ontology_dir.display().to_string()),
        preset: preset.clone(),
        index: Some(index_dir.display().to_string()),
        topics: topics.map(|p| p.display().to_string()),
        run: run_out.map(|p| p.display().to_string()),
        qrels: None,
        seed: settings.seed(),
    };

    let mut run = RunResult::default();
    for (qid, text) in &queries {
        if text.trim().is_empty() {
            bail!("query `{qid}` is empty");
        }
        match engine.search(&index, qid, text, k) {
            Ok((repr, hits)) => {
                for (rank, hit) in hits.iter().enumerate() {
                    emit(&format!(
                        "{qid}\t{}\t{}\t{:.6}\n",
                        rank + 1,
                        hit.doc_id,
                        hit.score
                    ));
                    if explain {
                        for term in index.matched_terms(&repr, &hit.doc_id) {
                            emit(&format!("#   matched {term}\n"));
                        }
                    }
                }
                if explain {
                    for (term, provenance) in &repr.latent_terms {
                        emit(&format!("# latent {} <- {provenance}\n", term.serialized()));
                    }
                }
                run.insert_ranking(
                    qid.clone(),
                    hits.into_iter().map(|h| (h.doc_id, h.score)).collect(),
                );
            }
            Err(VsmError::NoEffectiveTerms) if queries.len() > 1 => {
                eprintln!("warning: query {qid} has no effective terms; skipped");
            }
            Err(VsmError::NoEffectiveTerms) => bail!("query `{qid}` has no effective terms"),
            Err(e) => return Err(e.into()),
        }
    }
    if let Some(path) = run_out {
        let mut text = format!("# manifest\t{}\n", manifest.to_json());
        text.push_str(&run.to_trec_string(tag));
        fs::write(path, text)?;
        emit(&format!("# run written to {}\n", path.display()));
    }
    Ok(())
}

/// `expand`: print the latent concepts of a query with their provenance,
/// one JSON object per line, without searching.
pub fn cmd_expand(settings: &Settings, ontology: &Path, query: &str) -> Result<()> {
    let preset = settings
        .preset_name()
        .unwrap_or_else(|| "semantic".to_string());
    let engine = load_engine(settings, ontology, &preset)?;
    match engine.config.expansion {
        Expansion::Rcsa => {
            let outcome = engine.rcsa_expansion(query);
            for line in &outcome.trace {
                println!("{line}");
            }
        }
        Expansion::Csa | Expansion::None => {
            // Fall back to the full representation so csa presets trace too.
            let repr = engine.represent_query("q", query);
            let mut seen = std::collections::BTreeSet::new();
            for (_, provenance) in &repr.latent_terms {
                if seen.insert(provenance.clone()) {
                    println!("{provenance}");
                }
            }
        }
    }
    Ok(())
}

/// Report written by `eval`: the manifest plus the metric fields.
#[derive(Debug, Serialize, Deserialize)]
pub struct ReportFile {
    pub manifest: RunManifest,
    #[serde(flatten)]
    pub metrics: MetricReport,
}

/// `eval`: score a TREC run against qrels and write the JSON and TSV
/// reports.
/// Manifest embedded as a leading `# manifest<TAB>{json}` comment line.
fn embedded_manifest(text: &str) -> Option<RunManifest> {
    text.lines()
        .take_while(|l| l.starts_with('#'))
        .find_map(|l| l.strip_prefix("# manifest\t"))
        .and_then(|json| serde_json::from_str(json).ok())
}

pub fn cmd_eval(
    settings: &Settings,
    run_path: &Path,
    qrels_path: &Path,
    out_json: &Path,
    out_tsv: Option<&Path>,
) -> Result<()> {
    let run_text = fs::read_to_string(run_path)?;
    let run_manifest = embedded_manifest(&run_text);
    let run = RunResult::from_trec_str(&run_text, &run_path.display().to_string())?;
    let qrels = Qrels::from_trec_file(qrels_path)?;
    for warning in &qrels.warnings {
        eprintln!("warning: {warning}");
    }
    for qid in run.query_ids() {
        if qrels.relevant_for(qid).is_none() {
            eprintln!("warning: query {qid} in run has no judgments; ignored");
        }
    }
    let metrics = evaluate(&run, &qrels)?;
    // Inherit what the run file recorded about its own production.
    let preset = settings
        .preset_name()
        .or_else(|| run_manifest.as_ref().map(|m| m.preset.clone()))
        .unwrap_or_else(|| "unknown".to_string());
    let manifest = RunManifest {
        corpus: None,
        ontology: run_manifest.as_ref().and_then(|m| m.ontology.clone()),
        preset,
        index: run_manifest.as_ref().and_then(|m| m.index.clone()),
        topics: run_manifest.as_ref().and_then(|m| m.topics.clone()),
        run: Some(run_path.display().to_string()),
        qrels: Some(qrels_path.display().to_string()),
        seed: settings.seed(),
    };
    // Reports land on disk before anything is printed, so a closed pipe
    // downstream cannot lose them.
    let report = ReportFile { manifest, metrics };
    fs::write(out_json, serde_json::to_string_pretty(&report)?)?;
    if let Some(tsv) = out_tsv {
        let mut text = format!("# manifest\t{}\n", report.manifest.to_json());
        text.push_str("recall\tprecision\tf\n");
        for ((level, precision), (_, f)) in
            report.metrics.pr_curve.iter().zip(&report.metrics.f_curve)
        {
            text.push_str(&format!("{level:.1}\t{precision}\t{f}\n"));
        }
        fs::write(tsv, text)?;
    }
    emit(&format!("map\t{:.6}\n", report.metrics.map));
    for (qid, ap) in &report.metrics.per_query_ap {
        emit(&format!("ap\t{qid}\t{ap:.6}\n"));
    }
    Ok(())
}

/// `compare`: two-sided randomization test between two evaluation reports
/// over the same query set.
pub fn cmd_compare(
    settings: &Settings,
    report_a: &Path,
    report_b: &Path,
    permutations: usize,
) -> Result<()> {
    let a: ReportFile = serde_json::from_str(&fs::read_to_string(report_a)?)
        .with_context(|| format!("parsing report {}", report_a.display()))?;
    let b: ReportFile = serde_json::from_str(&fs::read_to_string(report_b)?)
        .with_context(|| format!("parsing report {}", report_b.display()))?;

    let queries_a: Vec<&String> = a.metrics.per_query_ap.keys().collect();
    let queries_b: Vec<&String> = b.metrics.per_query_ap.keys().collect();
    if queries_a != queries_b {
        bail!(
            "reports cover different query sets ({} vs {} queries)",
            queries_a.len(),
            queries_b.len()
        );
    }
    let ap_a: Vec<f64> = a.metrics.per_query_ap.values().copied().collect();
    let ap_b: Vec<f64> = b.metrics.per_query_ap.values().copied().collect();
    let p = randomization_test(&ap_a, &ap_b, permutations, settings.seed())?;
    let improvement = if b.metrics.map != 0.0 {
        (a.metrics.map - b.metrics.map) / b.metrics.map * 100.0
    } else {
        f64::INFINITY
    };
    println!("map_a\t{:.6}", a.metrics.map);
    println!("map_b\t{:.6}", b.metrics.map);
    println!("improvement\t{improvement:.1}%");
    println!("p_value\t{p:.5}");
    println!("permutations\t{permutations}");
    println!("seed\t{}", settings.seed());
    Ok(())
}
