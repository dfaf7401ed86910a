//! The unit of the generalized vector space: an entity triple pattern, a
//! word feature, or a plain keyword.

use std::fmt;

/// One indexable term. The canonical serialization (used as index key) is:
///
/// - `ne:{name|*}/{class|*}/{id|*}` for entity triple patterns,
/// - `ws:{synset_id}` for a sense,
/// - `wf:{form}` for a word form,
/// - `wp:{form}/{synset_id}` for a form/sense pair,
/// - `kw:{stem}` for a keyword.
///
/// Wildcard positions in a triple are absent fields, never empty strings.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GeneralizedTerm {
    NeTriple {
        name: Option<String>,
        class_id: Option<String>,
        entity_id: Option<String>,
    },
    WwSense {
        synset_id: String,
    },
    WwForm {
        form: String,
    },
    WwPair {
        form: String,
        synset_id: String,
    },
    Keyword {
        stem: String,
    },
}

impl GeneralizedTerm {
    /// An entity triple pattern; at least one position must be bound.
    pub fn ne_triple(name: Option<&str>, class_id: Option<&str>, entity_id: Option<&str>) -> Self {
        debug_assert!(
            name.is_some() || class_id.is_some() || entity_id.is_some(),
            "a triple pattern needs at least one bound position"
        );
        debug_assert!(
            [name, class_id, entity_id]
                .iter()
                .flatten()
                .all(|s| !s.is_empty()),
            "bound positions must be nonempty"
        );
        Self::NeTriple {
            name: name.map(str::to_string),
            class_id: class_id.map(str::to_string),
            entity_id: entity_id.map(str::to_string),
        }
    }

    pub fn ww_sense(synset_id: impl Into<String>) -> Self {
        Self::WwSense {
            synset_id: synset_id.into(),
        }
    }

    pub fn ww_form(form: impl Into<String>) -> Self {
        Self::WwForm { form: form.into() }
    }

    pub fn ww_pair(form: impl Into<String>, synset_id: impl Into<String>) -> Self {
        Self::WwPair {
            form: form.into(),
            synset_id: synset_id.into(),
        }
    }

    pub fn keyword(stem: impl Into<String>) -> Self {
        Self::Keyword { stem: stem.into() }
    }

    /// Canonical serialization; see the type docs.
    pub fn serialized(&self) -> String {
        self.to_string()
    }

    /// True for terms produced without a literal occurrence-level keyword.
    pub fn is_keyword(&self) -> bool {
        matches!(self, Self::Keyword { .. })
    }
}

impl fmt::Display for GeneralizedTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn slot(v: &Option<String>) -> &str {
            v.as_deref().unwrap_or("*")
        }
        match self {
            Self::NeTriple {
                name,
                class_id,
                entity_id,
            } => {
                write!(
                    f,
                    "ne:{}/{}/{}",
                    slot(name),
                    slot(class_id),
                    slot(entity_id)
                )
            }
            Self::WwSense { synset_id } => write!(f, "ws:{synset_id}"),
            Self::WwForm { form } => write!(f, "wf:{form}"),
            Self::WwPair { form, synset_id } => write!(f, "wp:{form}/{synset_id}"),
            Self::Keyword { stem } => write!(f, "kw:{stem}"),
        }
    }
}
