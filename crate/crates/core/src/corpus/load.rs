use std::collections::HashSet;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Corpus, Query};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorpusFormat {
    TrecSgml,
    Jsonl,
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trec-sgml" | "trec" => Ok(CorpusFormat::TrecSgml),
            "jsonl" => Ok(CorpusFormat::Jsonl),
            other => Err(Error::Config(format!(
                "unknown corpus format `{other}` (expected trec-sgml or jsonl)"
            ))),
        }
    }
}

pub fn load_corpus(path: impl AsRef<Path>, format: CorpusFormat) -> Result<Corpus> {
    let path = path.as_ref();
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let origin = path.display().to_string();
    let records = match format {
        CorpusFormat::Jsonl => parse_jsonl(&content, &origin)?,
        CorpusFormat::TrecSgml => parse_trec_sgml(&content, &origin)?,
    };
    Corpus::from_texts(records)
}

#[derive(Deserialize)]
struct JsonRecord {
    name: String,
    text: String,
}

/// Parses one `{"name": ..., "text": ...}` object per non-blank line.
pub fn parse_jsonl(content: &str, origin: &str) -> Result<Vec<(String, String)>> {
    content
        .lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| {
            serde_json::from_str::<JsonRecord>(line)
                .map(|r| (r.name, r.text))
                .map_err(|e| Error::parse(format!("{origin}:{}", i + 1), e.to_string()))
        })
        .collect()
}

fn line_of(content: &str, offset: usize) -> usize {
    content[..offset].bytes().filter(|&b| b == b'\n').count() + 1
}

/// Finds `needle` (lowercase ASCII) in `haystack_lower` at or after `from`.
fn find_tag(haystack_lower: &str, needle: &str, from: usize) -> Option<usize> {
    haystack_lower[from..].find(needle).map(|i| i + from)
}

/// Parses `<DOC><DOCNO>..</DOCNO><TEXT>..</TEXT></DOC>` blocks. Tags match
/// case-insensitively; every TEXT element of a block is concatenated and all
/// other fields are ignored.
pub fn parse_trec_sgml(content: &str, origin: &str) -> Result<Vec<(String, String)>> {
    // ASCII lowercasing keeps byte offsets aligned with `content`.
    let lower = content.to_ascii_lowercase();
    let at = |offset: usize| format!("{origin}:{} (byte {offset})", line_of(content, offset));

    let mut records = Vec::new();
    let mut pos = 0;
    while let Some(start) = find_tag(&lower, "<doc>", pos) {
        let body_start = start + "<doc>".len();
        let end = find_tag(&lower, "</doc>", body_start)
            .ok_or_else(|| Error::parse(at(start), "unterminated <DOC>"))?;
        if let Some(nested) = find_tag(&lower[..end], "<doc>", body_start) {
            return Err(Error::parse(at(nested), "nested <DOC>"));
        }

        let docno_open = find_tag(&lower[..end], "<docno>", body_start)
            .ok_or_else(|| Error::parse(at(start), "<DOC> without <DOCNO>"))?;
        let docno_start = docno_open + "<docno>".len();
        let docno_end = find_tag(&lower[..end], "</docno>", docno_start)
            .ok_or_else(|| Error::parse(at(docno_open), "unterminated <DOCNO>"))?;
        let name = content[docno_start..docno_end].trim();
        if name.is_empty() {
            return Err(Error::parse(at(docno_open), "empty <DOCNO>"));
        }

        let mut text = String::new();
        let mut cursor = body_start;
        while let Some(open) = find_tag(&lower[..end], "<text>", cursor) {
            let text_start = open + "<text>".len();
            let close = find_tag(&lower[..end], "</text>", text_start)
                .ok_or_else(|| Error::parse(at(open), "unterminated <TEXT>"))?;
            if !text.is_empty() {
                text.push('\n');
            }
            text.push_str(&content[text_start..close]);
            cursor = close + "</text>".len();
        }

        records.push((name.to_owned(), text));
        pos = end + "</doc>".len();
    }
    Ok(records)
}

/// Reads a `qid<TAB>query text` file.
pub fn load_queries(path: impl AsRef<Path>) -> Result<Vec<Query>> {
    let path = path.as_ref();
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_queries(&content, &path.display().to_string())
}

pub fn parse_queries(content: &str, origin: &str) -> Result<Vec<Query>> {
    let mut seen = HashSet::new();
    let mut queries = Vec::new();
    for (i, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let location = || format!("{origin}:{}", i + 1);
        let (qid, text) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(location(), "expected `qid<TAB>text`"))?;
        let qid = qid.trim();
        if qid.is_empty() {
            return Err(Error::parse(location(), "empty query id"));
        }
        if !seen.insert(qid.to_owned()) {
            return Err(Error::parse(location(), format!("duplicate query id `{qid}`")));
        }
        let query = Query::parse(qid, text)
            .map_err(|_| Error::parse(location(), format!("query `{qid}` has no tokens")))?;
        queries.push(query);
    }
    Ok(queries)
}
