//! Search-model configuration and the seven named presets.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::wsd::PprConfig;

/// Query-expansion strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expansion {
    None,
    /// Broadcast all direct fact links from the query's concepts.
    Csa,
    /// Relation-constrained spreading activation.
    Rcsa,
}

/// How latent concepts are appended to the query vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatentRendering {
    /// Entity triple patterns and word-form terms.
    NeWw,
    /// Plain keywords over the concept's name or forms.
    Keyword,
}

/// Everything that distinguishes one search model from another.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct ModelConfig {
    pub use_ne: bool,
    pub use_ww: bool,
    pub expansion: Expansion,
    pub latent_rendering: LatentRendering,
    /// Term-frequency contribution of each virtually added document term.
    pub virtual_term_weight: f64,
    /// Term-frequency contribution of each latent query term.
    pub latent_term_weight: f64,
    pub wsd: PprConfig,
    /// Interrogative word to entity class. Words absent from the table are
    /// left to the stop-word filter.
    pub interrogatives: BTreeMap<String, String>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            use_ne: true,
            use_ww: true,
            expansion: Expansion::Rcsa,
            latent_rendering: LatentRendering::NeWw,
            virtual_term_weight: 1.0,
            latent_term_weight: 1.0,
            wsd: PprConfig::default(),
            interrogatives: default_interrogatives(),
        }
    }
}

/// The default interrogative mapping: where, who, and when map to classes;
/// what, which, and how stay unmapped and fall to the stop-word filter.
pub fn default_interrogatives() -> BTreeMap<String, String> {
    [
        ("where", "Location"),
        ("who", "Person"),
        ("when", "TimeInterval"),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect()
}

/// Names of the seven model presets, in comparison order.
pub const PRESET_NAMES: [&str; 7] = [
    "lexical", "ne_kw", "ww_kw", "ne_ww_kw", "csa", "rcsa", "semantic",
];

impl ModelConfig {
    /// Resolves one of the seven named presets.
    ///
    /// `lexical` is the plain keyword VSM; `ne_kw`, `ww_kw`, and `ne_ww_kw`
    /// add entity and word features; `csa` and `rcsa` expand keyword-
    /// represented queries; `semantic` combines `rcsa` with full annotation.
    pub fn preset(name: &str) -> Option<Self> {
        let base = Self::default();
        let config = match name {
            "lexical" => Self {
                use_ne: false,
                use_ww: false,
                expansion: Expansion::None,
                ..base
            },
            "ne_kw" => Self {
                use_ne: true,
                use_ww: false,
                expansion: Expansion::None,
                ..base
            },
            "ww_kw" => Self {
                use_ne: false,
                use_ww: true,
                expansion: Expansion::None,
                ..base
            },
            "ne_ww_kw" => Self {
                use_ne: true,
                use_ww: true,
                expansion: Expansion::None,
                ..base
            },
            // Expanded queries and documents of the two spreading-activation
            // baselines are represented by keywords.
            "csa" => Self {
                use_ne: false,
                use_ww: false,
                expansion: Expansion::Csa,
                latent_rendering: LatentRendering::Keyword,
                ..base
            },
            "rcsa" => Self {
                use_ne: false,
                use_ww: false,
                expansion: Expansion::Rcsa,
                latent_rendering: LatentRendering::Keyword,
                ..base
            },
            "semantic" => Self {
                use_ne: true,
                use_ww: true,
                expansion: Expansion::Rcsa,
                latent_rendering: LatentRendering::NeWw,
                ..base
            },
            _ => return None,
        };
        Some(config)
    }
}
