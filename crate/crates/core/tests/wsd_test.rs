//! Sense graph construction, personalized PageRank against a dense
//! power-iteration oracle, and disambiguation outcomes on the fixture.

mod common;

use common::*;
use ontosearch::wsd::{
    build_sense_graph, disambiguate, personalized_pagerank, Outcome, PprConfig, WsdError,
};
use proptest::prelude::*;

#[test]
fn fixture_graph_shape() {
    let store = load_fixture_store();
    let graph = build_sense_graph(&store);
    assert_eq!(graph.node_count(), 31);
    // 30 hypernym pairs plus the play/win, quake/storm, and suit/protection
    // similarity edges; the beach holonym/meronym edges collapse into the
    // existing hypernym pair.
    assert_eq!(graph.edge_count(), 33);
    for i in 0..graph.node_count() {
        for &j in graph.neighbors(i) {
            assert!(
                graph.neighbors(j).contains(&i),
                "adjacency must be symmetric"
            );
            assert_ne!(i, j, "no self loops");
        }
    }
}

#[test]
fn single_synset_store_yields_isolated_node() {
    let dir = TempDir::new("onenode");
    let store = load_inline_store(
        dir.path(),
        "",
        "",
        "{\"id\":\"S\",\"forms\":[\"s\"],\"hypernyms\":[]}\n",
        "",
        "",
    )
    .unwrap();
    let graph = build_sense_graph(&store);
    assert_eq!(graph.node_count(), 1);
    assert_eq!(graph.edge_count(), 0);
}

#[test]
fn inverse_edge_pairs_deduplicate() {
    let dir = TempDir::new("dedup");
    let store = load_inline_store(
        dir.path(),
        "",
        "",
        concat!(
            "{\"id\":\"A\",\"forms\":[\"a\"],\"hypernyms\":[\"B\"]}\n",
            "{\"id\":\"B\",\"forms\":[\"b\"],\"hypernyms\":[],\"edges\":[{\"type\":\"hyponym\",\"target\":\"A\"}]}\n",
        ),
        "",
        "",
    )
    .unwrap();
    let graph = build_sense_graph(&store);
    assert_eq!(graph.node_count(), 2);
    assert_eq!(graph.edge_count(), 1);
}

#[test]
fn two_node_uniform_teleport_splits_evenly() {
    let dir = TempDir::new("twonode");
    let store = load_inline_store(
        dir.path(),
        "",
        "",
        concat!(
            "{\"id\":\"A\",\"forms\":[\"a\"],\"hypernyms\":[\"B\"]}\n",
            "{\"id\":\"B\",\"forms\":[\"b\"],\"hypernyms\":[]}\n",
        ),
        "",
        "",
    )
    .unwrap();
    let graph = build_sense_graph(&store);
    let scores = personalized_pagerank(&graph, &[0.5, 0.5], &PprConfig::default()).unwrap();
    assert!((scores[0] - 0.5).abs() < 1e-12);
    assert!((scores[1] - 0.5).abs() < 1e-12);
}

#[test]
fn three_node_path_matches_dense_oracle() {
    let dir = TempDir::new("path3");
    let store = load_inline_store(
        dir.path(),
        "",
        "",
        concat!(
            "{\"id\":\"A\",\"forms\":[\"a\"],\"hypernyms\":[\"B\"]}\n",
            "{\"id\":\"B\",\"forms\":[\"b\"],\"hypernyms\":[\"C\"]}\n",
            "{\"id\":\"C\",\"forms\":[\"c\"],\"hypernyms\":[]}\n",
        ),
        "",
        "",
    )
    .unwrap();
    let graph = build_sense_graph(&store);
    let a = graph.index_of("A").unwrap();
    let mut teleport = vec![0.0; 3];
    teleport[a] = 1.0;
    let config = PprConfig::default();
    let scores = personalized_pagerank(&graph, &teleport, &config).unwrap();
    let oracle = dense_ppr_oracle(
        &graph,
        &teleport,
        config.damping,
        config.max_iterations,
        config.epsilon,
    );
    for (s, o) in scores.iter().zip(&oracle) {
        assert!((s - o).abs() < 1e-8, "{s} vs {o}");
    }
    assert!((scores.iter().sum::<f64>() - 1.0).abs() < 1e-9);
}

#[test]
fn fixture_graph_matches_dense_oracle_for_varied_teleports() {
    let store = load_fixture_store();
    let graph = build_sense_graph(&store);
    let n = graph.node_count();
    let config = PprConfig::default();
    let teleports: Vec<Vec<f64>> = vec![
        vec![1.0 / n as f64; n],
        {
            let mut t = vec![0.0; n];
            t[graph.index_of("S_CHANGE").unwrap()] = 1.0;
            t
        },
        {
            let mut t = vec![0.0; n];
            t[graph.index_of("S_BEACH").unwrap()] = 0.5;
            t[graph.index_of("S_TSUNAMI").unwrap()] = 0.5;
            t
        },
    ];
    for teleport in teleports {
        let scores = personalized_pagerank(&graph, &teleport, &config).unwrap();
        let oracle = dense_ppr_oracle(
            &graph,
            &teleport,
            config.damping,
            config.max_iterations,
            config.epsilon,
        );
        assert!((scores.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        for (s, o) in scores.iter().zip(&oracle) {
            assert!((s - o).abs() < 1e-8);
        }
    }
}

#[test]
fn invalid_teleports_are_rejected() {
    let store = load_fixture_store();
    let graph = build_sense_graph(&store);
    let n = graph.node_count();
    let config = PprConfig::default();

    let short = vec![1.0];
    assert!(matches!(
        personalized_pagerank(&graph, &short, &config),
        Err(WsdError::InvalidTeleport(_))
    ));

    let mut negative = vec![1.0 / (n as f64 - 1.0); n];
    negative[0] = -1.0 / (n as f64 - 1.0);
    assert!(matches!(
        personalized_pagerank(&graph, &negative, &config),
        Err(WsdError::InvalidTeleport(_))
    ));

    let wrong_sum = vec![0.5 / n as f64; n];
    assert!(matches!(
        personalized_pagerank(&graph, &wrong_sum, &config),
        Err(WsdError::InvalidTeleport(_))
    ));
}

#[test]
fn context_resolves_movement_to_each_side() {
    let store = load_fixture_store();
    let graph = build_sense_graph(&store);
    let config = PprConfig::default();

    let change = disambiguate(&["change".into()], "movement", &graph, &store, &config).unwrap();
    assert_eq!(change.outcome, Outcome::Resolved("S_MOVE1".into()));
    // Ranked scores agree with the dense oracle's argmax.
    let mut teleport = vec![0.0; graph.node_count()];
    teleport[graph.index_of("S_CHANGE").unwrap()] = 1.0;
    let oracle = dense_ppr_oracle(
        &graph,
        &teleport,
        config.damping,
        config.max_iterations,
        config.epsilon,
    );
    let move1 = oracle[graph.index_of("S_MOVE1").unwrap()];
    let move2 = oracle[graph.index_of("S_MOVE2").unwrap()];
    assert!(move1 > move2);

    let campaign = disambiguate(&["campaign".into()], "movement", &graph, &store, &config).unwrap();
    assert_eq!(campaign.outcome, Outcome::Resolved("S_MOVE2".into()));
}

#[test]
fn neutral_context_ties_and_falls_back_to_common_hypernym() {
    let store = load_fixture_store();
    let graph = build_sense_graph(&store);
    let result = disambiguate(&[], "movement", &graph, &store, &PprConfig::default()).unwrap();
    match &result.outcome {
        Outcome::Tied { senses, msc } => {
            assert_eq!(senses, &["S_MOVE1".to_string(), "S_MOVE2".to_string()]);
            assert_eq!(msc, "S_ACT");
        }
        other => panic!("expected tie, got {other:?}"),
    }
    // The fixture is symmetric under swapping the two senses, so their
    // scores agree to well under the tie ratio.
    let scores: Vec<f64> = result.ranked.iter().map(|(_, s)| *s).collect();
    assert!((scores[0] - scores[1]).abs() < 1e-10);
    assert!(result.ranked[0].1 > 0.0);
}

#[test]
fn single_sense_targets_skip_pagerank() {
    let store = load_fixture_store();
    let graph = build_sense_graph(&store);
    let result = disambiguate(
        &["anything".into(), "at".into(), "all".into()],
        "tsunami",
        &graph,
        &store,
        &PprConfig::default(),
    )
    .unwrap();
    assert_eq!(result.outcome, Outcome::Resolved("S_TSUNAMI".into()));
    assert_eq!(result.ranked.len(), 1);
}

#[test]
fn unknown_form_is_an_error() {
    let store = load_fixture_store();
    let graph = build_sense_graph(&store);
    assert!(matches!(
        disambiguate(&[], "qwertyuiop", &graph, &store, &PprConfig::default()),
        Err(WsdError::UnknownForm(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    // Any valid teleport yields a probability distribution.
    #[test]
    fn ppr_output_is_a_distribution(weights in proptest::collection::vec(0.0f64..1.0, 31)) {
        let sum: f64 = weights.iter().sum();
        prop_assume!(sum > 1e-9);
        let teleport: Vec<f64> = weights.iter().map(|w| w / sum).collect();
        let store = load_fixture_store();
        let graph = build_sense_graph(&store);
        prop_assume!(teleport.len() == graph.node_count());
        let scores = personalized_pagerank(&graph, &teleport, &PprConfig::default()).unwrap();
        prop_assert!(scores.iter().all(|s| *s >= 0.0));
        prop_assert!((scores.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}
