use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use super::CorpusError;
use crate::text::{normalize, tokenize};

/// One article as read from the source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Article {
    pub title: String,
    pub body: String,
    /// Byte range of the article in its source file, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub byte_span: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermEntry {
    pub raw_title: String,
    pub title_tokens: Vec<String>,
    pub body: Vec<String>,
    /// Original body text, kept for annotator reference.
    pub body_text: String,
    pub byte_span: Option<(usize, usize)>,
}

/// Articles keyed by normalized title.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TermIndex {
    pub entries: BTreeMap<String, TermEntry>,
}

impl TermIndex {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, term: &str) -> Option<&TermEntry> {
        self.entries.get(&normalize(term))
    }
}

/// Builds the index, keeping the longer body when two titles normalize to
/// the same term.
pub fn build_term_index<I>(articles: I) -> Result<TermIndex, CorpusError>
where
    I: IntoIterator<Item = Article>,
{
    let mut entries: BTreeMap<String, TermEntry> = BTreeMap::new();
    let mut seen = 0usize;
    for article in articles {
        seen += 1;
        let key = normalize(&article.title);
        if key.is_empty() {
            warn!("skipping article with empty title");
            continue;
        }
        let body = tokenize(&article.body);
        let entry = TermEntry {
            raw_title: article.title.trim().to_string(),
            title_tokens: tokenize(&key),
            body,
            body_text: article.body,
            byte_span: article.byte_span,
        };
        match entries.get(&key) {
            Some(existing) => {
                warn!("duplicate title `{}` (normalized `{key}`), keeping the longer article", entry.raw_title);
                if entry.body.len() > existing.body.len() {
                    entries.insert(key, entry);
                }
            }
            None => {
                entries.insert(key, entry);
            }
        }
    }
    if seen == 0 || entries.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    Ok(TermIndex { entries })
}

/// Returns the title if `line` is a top-level WikiText heading (`= Title =`).
/// Section headings (`= = Section = =`) are not article boundaries.
fn heading_title(line: &str) -> Option<&str> {
    let t = line.trim();
    if t.len() < 3 || !t.starts_with("= ") || !t.ends_with(" =") || t.starts_with("= =") {
        return None;
    }
    let inner = t[2..t.len() - 2].trim();
    if inner.is_empty() || inner.starts_with('=') || inner.ends_with('=') {
        return None;
    }
    Some(inner)
}

fn strip_section_markup(line: &str) -> &str {
    let t = line.trim();
    if t.starts_with('=') && t.ends_with('=') {
        t.trim_matches(|c: char| c == '=' || c.is_whitespace())
    } else {
        t
    }
}

/// Parses a WikiText-layout corpus. Lines before the first heading are
/// ignored; section headings are kept as body text without markup.
pub fn read_wikitext(source: &str) -> Vec<Article> {
    let mut articles = Vec::new();
    let mut current: Option<(String, String, usize)> = None;
    let mut offset = 0usize;
    for line in source.split_inclusive('\n') {
        let start = offset;
        offset += line.len();
        if let Some(title) = heading_title(line) {
            if let Some((title, body, begin)) = current.take() {
                articles.push(Article { title, body: body.trim().to_string(), byte_span: Some((begin, start)) });
            }
            current = Some((title.to_string(), String::new(), start));
            continue;
        }
        if let Some((_, body, _)) = current.as_mut() {
            let text = strip_section_markup(line);
            if !text.is_empty() {
                if !body.is_empty() {
                    body.push('\n');
                }
                body.push_str(text);
            }
        }
    }
    if let Some((title, body, begin)) = current.take() {
        articles.push(Article { title, body: body.trim().to_string(), byte_span: Some((begin, offset)) });
    }
    articles
}

/// Reads `{title, body}` JSON lines.
pub fn read_jsonl_corpus<R: BufRead>(reader: R) -> Result<Vec<Article>, CorpusError> {
    crate::jsonl::read_from(reader, "corpus").map_err(|e| CorpusError::Parse(e.to_string()))
}

/// Loads a corpus file, choosing the parser from the extension
/// (`.jsonl`/`.json` → JSON lines, anything else → WikiText).
pub fn load_corpus(path: &Path) -> Result<Vec<Article>, CorpusError> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    if ext == "jsonl" || ext == "json" {
        let f = std::fs::File::open(path)?;
        read_jsonl_corpus(std::io::BufReader::new(f))
    } else {
        Ok(read_wikitext(&std::fs::read_to_string(path)?))
    }
}
