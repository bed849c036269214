//! Documents, queries and corpus-wide term statistics.

mod load;
pub mod porter;
mod tokenize;

use std::collections::HashMap;
use std::fmt;

use log::warn;

use crate::error::{Error, Result};

pub use load::{load_corpus, load_queries, parse_jsonl, parse_queries, parse_trec_sgml, CorpusFormat};
pub use tokenize::tokenize;

/// Position of a document in its corpus; also the tie-breaking key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DocId(pub u32);

impl DocId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for DocId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TermId(pub u32);

impl TermId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Interned stemmed terms.
#[derive(Debug, Clone, Default)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, TermId>,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, term: &str) -> Option<TermId> {
        self.index.get(term).copied()
    }

    pub fn term(&self, id: TermId) -> &str {
        &self.terms[id.index()]
    }

    fn intern(&mut self, term: &str) -> TermId {
        if let Some(&id) = self.index.get(term) {
            return id;
        }
        let id = TermId(self.terms.len() as u32);
        self.terms.push(term.to_owned());
        self.index.insert(term.to_owned(), id);
        id
    }
}

/// Sparse term-frequency vector, sorted by term id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TermCounts {
    entries: Vec<(TermId, u32)>,
    total: u64,
}

impl TermCounts {
    pub fn from_terms(terms: &[TermId]) -> Self {
        let mut sorted = terms.to_vec();
        sorted.sort_unstable();
        let mut entries: Vec<(TermId, u32)> = Vec::new();
        for t in sorted {
            match entries.last_mut() {
                Some((last, c)) if *last == t => *c += 1,
                _ => entries.push((t, 1)),
            }
        }
        TermCounts {
            entries,
            total: terms.len() as u64,
        }
    }

    /// tf(w; x)
    pub fn get(&self, term: TermId) -> u32 {
        self.entries
            .binary_search_by_key(&term, |&(t, _)| t)
            .map_or(0, |i| self.entries[i].1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (TermId, u32)> + '_ {
        self.entries.iter().copied()
    }

    /// Number of distinct terms.
    pub fn num_types(&self) -> usize {
        self.entries.len()
    }

    /// Number of tokens.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }
}

#[derive(Debug, Clone)]
pub struct Document {
    id: DocId,
    name: String,
    tokens: Vec<TermId>,
    counts: TermCounts,
}

impl Document {
    pub fn id(&self) -> DocId {
        self.id
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn tokens(&self) -> &[TermId] {
        &self.tokens
    }

    /// |d|, the token count.
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn counts(&self) -> &TermCounts {
        &self.counts
    }

    pub fn count(&self, term: TermId) -> u32 {
        self.counts.get(term)
    }

    pub fn num_types(&self) -> usize {
        self.counts.num_types()
    }
}

/// An immutable document collection with its collection statistics.
#[derive(Debug, Clone)]
pub struct Corpus {
    documents: Vec<Document>,
    names: HashMap<String, DocId>,
    vocab: Vocabulary,
    collection_counts: Vec<u64>,
    doc_freqs: Vec<u32>,
    total_tokens: u64,
}

impl Corpus {
    /// Builds a corpus from `(name, raw text)` pairs. Ids follow input order;
    /// documents with no tokens are dropped with a warning.
    pub fn from_texts<I, N, T>(docs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (N, T)>,
        N: Into<String>,
        T: AsRef<str>,
    {
        let tokenized = docs
            .into_iter()
            .map(|(name, text)| (name.into(), tokenize(text.as_ref())));
        Self::from_tokenized(tokenized)
    }

    /// Builds a corpus from already-stemmed token lists.
    pub fn from_tokenized<I>(docs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, Vec<String>)>,
    {
        let mut vocab = Vocabulary::default();
        let mut documents = Vec::new();
        let mut names = HashMap::new();
        for (name, tokens) in docs {
            if names.contains_key(&name) {
                return Err(Error::DuplicateDocument(name));
            }
            if tokens.is_empty() {
                warn!("document `{name}` has no tokens; excluded");
                continue;
            }
            let id = DocId(documents.len() as u32);
            let tokens: Vec<TermId> = tokens.iter().map(|t| vocab.intern(t)).collect();
            let counts = TermCounts::from_terms(&tokens);
            names.insert(name.clone(), id);
            documents.push(Document {
                id,
                name,
                tokens,
                counts,
            });
        }

        let mut collection_counts = vec![0u64; vocab.len()];
        let mut doc_freqs = vec![0u32; vocab.len()];
        for doc in &documents {
            for (t, c) in doc.counts.iter() {
                collection_counts[t.index()] += u64::from(c);
                doc_freqs[t.index()] += 1;
            }
        }
        let total_tokens = collection_counts.iter().sum();

        Ok(Corpus {
            documents,
            names,
            vocab,
            collection_counts,
            doc_freqs,
            total_tokens,
        })
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn doc(&self, id: DocId) -> &Document {
        &self.documents[id.index()]
    }

    pub fn doc_by_name(&self, name: &str) -> Option<DocId> {
        self.names.get(name).copied()
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn term_id(&self, term: &str) -> Option<TermId> {
        self.vocab.get(term)
    }

    pub fn term(&self, id: TermId) -> &str {
        self.vocab.term(id)
    }

    pub fn collection_count(&self, term: TermId) -> u64 {
        self.collection_counts[term.index()]
    }

    /// Maximum-likelihood estimate of `term` over the whole collection.
    pub fn collection_prob(&self, term: TermId) -> f64 {
        self.collection_counts[term.index()] as f64 / self.total_tokens as f64
    }

    /// Number of documents containing `term`.
    pub fn doc_freq(&self, term: TermId) -> u32 {
        self.doc_freqs[term.index()]
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    /// Maps stemmed terms to ids, dropping terms outside the vocabulary.
    pub fn known_terms<S: AsRef<str>>(&self, terms: &[S]) -> Vec<TermId> {
        terms.iter().filter_map(|t| self.term_id(t.as_ref())).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub qid: String,
    pub tokens: Vec<String>,
}

impl Query {
    /// Tokenizes `text`; fails if nothing is left.
    pub fn parse(qid: impl Into<String>, text: &str) -> Result<Self> {
        let tokens = tokenize(text);
        if tokens.is_empty() {
            return Err(Error::EmptyText);
        }
        Ok(Query {
            qid: qid.into(),
            tokens,
        })
    }
}

/// Occurrences of `term` in `tokens`.
pub fn count<T: PartialEq>(term: &T, tokens: &[T]) -> usize {
    tokens.iter().filter(|t| *t == term).count()
}
