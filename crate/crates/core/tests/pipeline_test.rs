//! Pipeline-level behavior: the concurrency contract (shared immutable
//! stores, order-independent results) and the expansion wiring per preset.

mod common;

use common::*;
use ontosearch::vsm::InvertedIndex;
use ontosearch::{AnnotatedDocument, Engine, Lexicon, ModelConfig, OntologyStore};

#[test]
fn shared_types_are_send_and_sync() {
    fn assert_send_sync<T: Send + Sync>() {}
    assert_send_sync::<OntologyStore>();
    assert_send_sync::<ontosearch::wsd::SenseGraph>();
    assert_send_sync::<Lexicon>();
    assert_send_sync::<ModelConfig>();
    assert_send_sync::<InvertedIndex>();
    assert_send_sync::<Engine>();
}

#[test]
fn parallel_annotation_matches_sequential_annotation() {
    let engine = engine("semantic");
    let corpus = fixture_corpus();
    let sequential = engine.annotate_corpus(&corpus);

    // Annotate concurrently from four threads sharing the engine.
    let chunks: Vec<_> = corpus.chunks(8).collect();
    let mut parallel: Vec<AnnotatedDocument> = std::thread::scope(|scope| {
        let handles: Vec<_> = chunks
            .iter()
            .map(|chunk| {
                let engine = &engine;
                scope.spawn(move || engine.annotate_corpus(chunk))
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().unwrap())
            .collect()
    });
    parallel.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));

    assert_eq!(sequential, parallel);
    let a = InvertedIndex::build(&sequential).unwrap();
    let b = InvertedIndex::build(&parallel).unwrap();
    let dir_a = TempDir::new("par-a");
    let dir_b = TempDir::new("par-b");
    a.persist(dir_a.path(), &[]).unwrap();
    b.persist(dir_b.path(), &[]).unwrap();
    for file in ["vocab.tsv", "postings.tsv", "meta.tsv"] {
        assert_eq!(
            std::fs::read(dir_a.path().join(file)).unwrap(),
            std::fs::read(dir_b.path().join(file)).unwrap()
        );
    }
}

#[test]
fn concurrent_searches_share_one_index() {
    let engine = engine("semantic");
    let docs = engine.annotate_corpus(&fixture_corpus());
    let index = InvertedIndex::build(&docs).unwrap();
    let topics = fixture_topics();

    let results: Vec<Vec<String>> = std::thread::scope(|scope| {
        topics
            .iter()
            .map(|(qid, text)| {
                let engine = &engine;
                let index = &index;
                scope.spawn(move || {
                    engine
                        .search(index, qid, text, 10)
                        .map(|(_, hits)| hits.into_iter().map(|h| h.doc_id).collect())
                        .unwrap_or_default()
                })
            })
            .collect::<Vec<_>>()
            .into_iter()
            .map(|h| h.join().unwrap())
            .collect()
    });
    for ((qid, text), threaded) in topics.iter().zip(results) {
        let (_, hits) = engine.search(&index, qid, text, 10).unwrap();
        let direct: Vec<String> = hits.into_iter().map(|h| h.doc_id).collect();
        assert_eq!(direct, threaded, "{qid}");
    }
}

#[test]
fn latent_terms_carry_provenance_strings() {
    let engine = engine("semantic");
    let query = engine.represent_query("q", "cities that are tourist destinations of Thailand");
    assert!(!query.latent_terms.is_empty());
    for (term, provenance) in &query.latent_terms {
        let value: serde_json::Value = serde_json::from_str(provenance).unwrap();
        assert!(value.get("branch").is_some(), "{term}");
    }
    let rendered: Vec<String> = query
        .latent_terms
        .iter()
        .map(|(t, _)| t.serialized())
        .collect();
    assert!(rendered.contains(&"ne:chiang mai/*/*".to_string()));
    assert!(rendered.contains(&"ne:phuket/*/*".to_string()));
}

#[test]
fn keyword_rendering_tokenizes_latent_surfaces() {
    let engine = engine("rcsa");
    let query = engine.represent_query("q", "Barack Obama uses high-tech defences");
    let rendered: Vec<String> = query
        .latent_terms
        .iter()
        .map(|(t, _)| t.serialized())
        .collect();
    // "bullet-resistant suit" becomes three keyword stems.
    assert_eq!(rendered, ["kw:bullet", "kw:resistant", "kw:suit"]);
}

#[test]
fn expansion_none_never_adds_latents() {
    let engine = engine("ne_ww_kw");
    for (qid, text) in fixture_topics() {
        let query = engine.represent_query(&qid, &text);
        assert!(query.latent_terms.is_empty(), "{qid}");
    }
}
