//! Corpus ingestion: JSONL (`{"docno","text"}`) as the primary format and
//! TREC-style SGML (`<DOC><DOCNO>..</DOCNO><TEXT>..</TEXT></DOC>`) as the
//! secondary one.

use std::fs;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

/// One raw corpus document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawDocument {
    pub id: String,
    pub text: String,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },
    #[error("duplicate docno `{0}`")]
    DuplicateDocno(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Deserialize)]
struct JsonlRow {
    docno: String,
    text: String,
}

/// Reads a JSONL corpus, one `{"docno","text"}` object per line.
pub fn read_jsonl(path: &Path) -> Result<Vec<RawDocument>, CorpusError> {
    let content = fs::read_to_string(path)?;
    let file = path.display().to_string();
    let mut docs = Vec::new();
    for (line_no, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: JsonlRow = serde_json::from_str(line).map_err(|e| CorpusError::Parse {
            file: file.clone(),
            line: line_no + 1,
            message: e.to_string(),
        })?;
        docs.push(RawDocument {
            id: row.docno,
            text: row.text,
        });
    }
    check_unique(docs)
}

/// Reads a TREC-style SGML corpus. The parser is line oriented: `<DOCNO>` may
/// sit on one line, `<TEXT>` bodies span until the closing tag.
pub fn read_sgml(path: &Path) -> Result<Vec<RawDocument>, CorpusError> {
    let content = fs::read_to_string(path)?;
    let file = path.display().to_string();
    let mut docs = Vec::new();
    let mut docno: Option<String> = None;
    let mut text = String::new();
    let mut in_text = false;
    for (line_no, line) in content.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.starts_with("<DOC>") {
            docno = None;
            text.clear();
            in_text = false;
        } else if let Some(rest) = trimmed.strip_prefix("<DOCNO>") {
            let value = rest.trim_end_matches("</DOCNO>").trim();
            if value.is_empty() {
                return Err(CorpusError::Parse {
                    file: file.clone(),
                    line: line_no + 1,
                    message: "empty DOCNO".into(),
                });
            }
            docno = Some(value.to_string());
        } else if trimmed.starts_with("<TEXT>") {
            in_text = true;
        } else if trimmed.starts_with("</TEXT>") {
            in_text = false;
        } else if trimmed.starts_with("</DOC>") {
            let id = docno.take().ok_or_else(|| CorpusError::Parse {
                file: file.clone(),
                line: line_no + 1,
                message: "document without DOCNO".into(),
            })?;
            docs.push(RawDocument {
                id,
                text: text.trim().to_string(),
            });
            text.clear();
        } else if in_text {
            text.push_str(line);
            text.push(' ');
        }
    }
    check_unique(docs)
}

/// Sniffs the format: a leading `<` means SGML, anything else JSONL.
pub fn read_auto(path: &Path) -> Result<Vec<RawDocument>, CorpusError> {
    let content = fs::read_to_string(path)?;
    match content.trim_start().chars().next() {
        Some('<') => read_sgml(path),
        _ => read_jsonl(path),
    }
}

fn check_unique(docs: Vec<RawDocument>) -> Result<Vec<RawDocument>, CorpusError> {
    let mut seen = std::collections::BTreeSet::new();
    for doc in &docs {
        if !seen.insert(doc.id.clone()) {
            return Err(CorpusError::DuplicateDocno(doc.id.clone()));
        }
    }
    Ok(docs)
}

/// Reads a topics file: `query_id<TAB>text`, one query per line.
pub fn read_topics(path: &Path) -> Result<Vec<(String, String)>, CorpusError> {
    let content = fs::read_to_string(path)?;
    let file = path.display().to_string();
    let mut topics = Vec::new();
    for (line_no, line) in content.lines().enumerate() {
        let line = line.trim_end();
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (id, text) = line.split_once('\t').ok_or_else(|| CorpusError::Parse {
            file: file.clone(),
            line: line_no + 1,
            message: "expected query_id<TAB>text".into(),
        })?;
        topics.push((id.trim().to_string(), text.trim().to_string()));
    }
    Ok(topics)
}
