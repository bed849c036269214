//! Deterministic topic-mixture test collection with planted relevance.
//!
//! Every document draws most of its tokens from a shared Zipfian background,
//! a fixed share from one main topic and a smaller share from a secondary
//! topic. Query `t` uses frequent words of topic `t` plus one word borrowed
//! from another topic, and documents whose main topic is `t` are relevant.
//! Words are consonant-vowel strings ending in `a`, `o` or `u`, which the
//! stemmer leaves untouched.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_SEED: u64 = 20_050_815;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticParams {
    pub seed: u64,
    pub num_docs: usize,
    pub num_topics: usize,
    pub min_len: usize,
    pub max_len: usize,
    pub background_words: usize,
    pub words_per_topic: usize,
    /// Share of tokens from the main topic.
    pub main_share: f64,
    /// Share of tokens from the secondary topic.
    pub secondary_share: f64,
    /// Topic words per query, before the borrowed distractor.
    pub query_topic_words: usize,
    /// Non-relevant documents per query additionally judged with grade 0.
    pub judged_nonrelevant: usize,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        SyntheticParams {
            seed: DEFAULT_SEED,
            num_docs: 200,
            num_topics: 15,
            min_len: 120,
            max_len: 180,
            background_words: 400,
            words_per_topic: 30,
            main_share: 0.22,
            secondary_share: 0.14,
            query_topic_words: 3,
            judged_nonrelevant: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCollection {
    /// `(name, text)`
    pub documents: Vec<(String, String)>,
    /// `(qid, text)`
    pub queries: Vec<(String, String)>,
    /// `(qid, docname, grade)`
    pub qrels: Vec<(String, String, u32)>,
}

const CONSONANTS: &[u8] = b"bcdfghjklmnprstvz";
const VOWELS: &[u8] = b"aeiou";
const FINAL_VOWELS: &[u8] = b"aou";

fn pseudo_word(rng: &mut ChaCha8Rng) -> String {
    let syllables = rng.gen_range(2..=4);
    let mut w = String::new();
    for i in 0..syllables {
        w.push(*CONSONANTS.choose(rng).expect("non-empty") as char);
        let vowels = if i + 1 == syllables { FINAL_VOWELS } else { VOWELS };
        w.push(*vowels.choose(rng).expect("non-empty") as char);
    }
    w
}

fn zipf_weights(n: usize) -> Vec<f64> {
    (1..=n).map(|r| 1.0 / r as f64).collect()
}

pub fn generate(params: &SyntheticParams) -> Result<SyntheticCollection> {
    let p = params;
    if p.num_topics < 2 || p.num_docs < p.num_topics || p.min_len == 0 || p.min_len > p.max_len {
        return Err(Error::InvalidParameter("inconsistent synthetic collection parameters".into()));
    }
    if p.query_topic_words > p.words_per_topic || p.main_share + p.secondary_share > 1.0 {
        return Err(Error::InvalidParameter("inconsistent synthetic collection parameters".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);

    let total_words = p.background_words + p.num_topics * p.words_per_topic;
    let mut seen = HashSet::new();
    let mut words = Vec::with_capacity(total_words);
    while words.len() < total_words {
        let w = pseudo_word(&mut rng);
        if seen.insert(w.clone()) {
            words.push(w);
        }
    }
    let background = &words[..p.background_words];
    let topics: Vec<&[String]> = words[p.background_words..].chunks(p.words_per_topic).collect();
    let background_dist = WeightedIndex::new(zipf_weights(p.background_words)).expect("positive weights");
    let topic_dist = WeightedIndex::new(zipf_weights(p.words_per_topic)).expect("positive weights");

    // main topics: balanced, then shuffled
    let mut main_topics: Vec<usize> = (0..p.num_docs).map(|i| i % p.num_topics).collect();
    main_topics.shuffle(&mut rng);

    let mut documents = Vec::with_capacity(p.num_docs);
    for (i, &main) in main_topics.iter().enumerate() {
        let secondary = (main + rng.gen_range(1..p.num_topics)) % p.num_topics;
        let len = rng.gen_range(p.min_len..=p.max_len);
        let tokens: Vec<&str> = (0..len)
            .map(|_| {
                let u: f64 = rng.gen();
                if u < p.main_share {
                    topics[main][topic_dist.sample(&mut rng)].as_str()
                } else if u < p.main_share + p.secondary_share {
                    topics[secondary][topic_dist.sample(&mut rng)].as_str()
                } else {
                    background[background_dist.sample(&mut rng)].as_str()
                }
            })
            .collect();
        documents.push((format!("SYN-{:04}", i + 1), tokens.join(" ")));
    }

    let mut queries = Vec::with_capacity(p.num_topics);
    let mut qrels = Vec::new();
    for t in 0..p.num_topics {
        let qid = (t + 1).to_string();
        // frequent topic words, plus one frequent word of another topic
        let pool: Vec<&String> = topics[t][..(2 * p.query_topic_words).min(p.words_per_topic)].iter().collect();
        let mut terms: Vec<&str> = pool
            .choose_multiple(&mut rng, p.query_topic_words)
            .map(|w| w.as_str())
            .collect();
        let other = (t + rng.gen_range(1..p.num_topics)) % p.num_topics;
        terms.push(topics[other][rng.gen_range(0..3)].as_str());
        queries.push((qid.clone(), terms.join(" ")));

        let mut nonrelevant = Vec::new();
        for (i, &main) in main_topics.iter().enumerate() {
            if main == t {
                qrels.push((qid.clone(), documents[i].0.clone(), 1));
            } else {
                nonrelevant.push(i);
            }
        }
        for &i in nonrelevant.choose_multiple(&mut rng, p.judged_nonrelevant) {
            qrels.push((qid.clone(), documents[i].0.clone(), 0));
        }
    }
    qrels.sort();

    Ok(SyntheticCollection {
        documents,
        queries,
        qrels,
    })
}

#[derive(Serialize)]
struct JsonDoc<'a> {
    name: &'a str,
    text: &'a str,
}

impl SyntheticCollection {
    pub fn corpus_jsonl(&self) -> String {
        let mut out = String::new();
        for (name, text) in &self.documents {
            out.push_str(&serde_json::to_string(&JsonDoc { name, text }).expect("strings serialize"));
            out.push('\n');
        }
        out
    }

    pub fn queries_tsv(&self) -> String {
        let mut out = String::new();
        for (qid, text) in &self.queries {
            writeln!(out, "{qid}\t{text}").expect("writing to a String");
        }
        out
    }

    pub fn qrels_text(&self) -> String {
        let mut out = String::new();
        for (qid, doc, grade) in &self.qrels {
            writeln!(out, "{qid} 0 {doc} {grade}").expect("writing to a String");
        }
        out
    }

    /// Writes `corpus.jsonl`, `queries.tsv` and `qrels.txt` into `dir`.
    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (file, content) in [
            ("corpus.jsonl", self.corpus_jsonl()),
            ("queries.tsv", self.queries_tsv()),
            ("qrels.txt", self.qrels_text()),
        ] {
            let path = dir.join(file);
            fs::write(&path, content).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}
