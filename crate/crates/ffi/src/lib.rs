//! C interface to genrank.
//!
//! Corpora and result lists are opaque handles owned by the caller and
//! released with the matching `_free` function. Every fallible call returns
//! a [`GenrankStatus`]; on failure [`genrank_last_error`] describes the
//! problem for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use genrank::centrality::{hits, recursive_influx, IterationOptions};
use genrank::corpus::{parse_jsonl, tokenize, Corpus, CorpusFormat, DocId, Query};
use genrank::error::{Error, ErrorClass};
use genrank::graph::{smooth, GenerationGraph, LinkMode};
use genrank::lm::{log_gen_prob, DirichletModel, TermDistribution};
use genrank::rerank::{retrieve_and_rerank, RerankConfig};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenrankStatus {
    Ok = 0,
    ConfigError = 1,
    DataError = 2,
    RuntimeError = 3,
    NullPointer = 4,
    InvalidUtf8 = 5,
    OutOfRange = 6,
}

/// A tokenized document collection.
pub struct GenrankCorpus {
    corpus: Corpus,
}

/// A ranked list of document names and scores.
pub struct GenrankResults {
    names: Vec<CString>,
    scores: Vec<f64>,
}

/// Parameters of [`genrank_rerank`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GenrankRerankParams {
    /// Algorithm name such as `R-W-In+LM`, or `initial`.
    pub algorithm: *const c_char,
    /// Size of the initial retrieval.
    pub k: usize,
    /// Ancestry size; ignored by algorithms without a graph.
    pub alpha: usize,
    /// Smoothing factor; ignored by algorithms on unsmoothed graphs.
    pub lambda: f64,
    pub mu: f64,
    /// 0 for language-model links, 1 for cosine links.
    pub link_mode: u32,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(message));
}

fn fail(status: GenrankStatus, message: impl Into<String>) -> GenrankStatus {
    set_error(message.into());
    status
}

fn from_error(err: Error) -> GenrankStatus {
    let status = match err.class() {
        ErrorClass::Config => GenrankStatus::ConfigError,
        ErrorClass::Data => GenrankStatus::DataError,
        ErrorClass::Runtime => GenrankStatus::RuntimeError,
    };
    fail(status, err.to_string())
}

/// Runs `f`, turning panics into `RuntimeError`.
fn guard(f: impl FnOnce() -> GenrankStatus) -> GenrankStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(GenrankStatus::RuntimeError, "internal panic"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, GenrankStatus> {
    if p.is_null() {
        return Err(fail(GenrankStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(GenrankStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

macro_rules! try_ffi {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(status) => return status,
        }
    };
}

macro_rules! try_lib {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(err) => return from_error(err),
        }
    };
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into the library from this thread.
#[no_mangle]
pub extern "C" fn genrank_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn genrank_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

fn boxed_corpus(corpus: Corpus, out: *mut *mut GenrankCorpus) -> GenrankStatus {
    unsafe { *out = Box::into_raw(Box::new(GenrankCorpus { corpus })) };
    GenrankStatus::Ok
}

/// Loads a corpus file. `format` is `"jsonl"` or `"trec-sgml"`.
///
/// # Safety
/// `path` and `format` must be nul-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn genrank_corpus_load(
    path: *const c_char,
    format: *const c_char,
    out: *mut *mut GenrankCorpus,
) -> GenrankStatus {
    guard(|| {
        if out.is_null() {
            return fail(GenrankStatus::NullPointer, "out is null");
        }
        let path = try_ffi!(str_arg(path, "path"));
        let format: CorpusFormat = try_lib!(try_ffi!(str_arg(format, "format")).parse());
        boxed_corpus(try_lib!(genrank::corpus::load_corpus(path, format)), out)
    })
}

/// Builds a corpus from JSON lines of the form `{"name": ..., "text": ...}`.
///
/// # Safety
/// `jsonl` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn genrank_corpus_from_jsonl(
    jsonl: *const c_char,
    out: *mut *mut GenrankCorpus,
) -> GenrankStatus {
    guard(|| {
        if out.is_null() {
            return fail(GenrankStatus::NullPointer, "out is null");
        }
        let text = try_ffi!(str_arg(jsonl, "jsonl"));
        let records = try_lib!(parse_jsonl(text, "<jsonl>"));
        boxed_corpus(try_lib!(Corpus::from_texts(records)), out)
    })
}

/// # Safety
/// `corpus` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn genrank_corpus_free(corpus: *mut GenrankCorpus) {
    if !corpus.is_null() {
        drop(Box::from_raw(corpus));
    }
}

/// Number of documents, or 0 for a null handle.
///
/// # Safety
/// `corpus` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn genrank_corpus_len(corpus: *const GenrankCorpus) -> usize {
    corpus.as_ref().map_or(0, |c| c.corpus.len())
}

/// Log generation score `-KL(mle(text) || p_doc)` of `text` under the
/// Dirichlet-smoothed model of document `doc_name`. Terms unknown to the
/// corpus are ignored.
///
/// # Safety
/// `corpus` must be a live handle, strings nul-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn genrank_gen_log_prob(
    corpus: *const GenrankCorpus,
    doc_name: *const c_char,
    text: *const c_char,
    mu: f64,
    out: *mut f64,
) -> GenrankStatus {
    guard(|| {
        let (Some(c), false) = (corpus.as_ref(), out.is_null()) else {
            return fail(GenrankStatus::NullPointer, "corpus or out is null");
        };
        let corpus = &c.corpus;
        let name = try_ffi!(str_arg(doc_name, "doc_name"));
        let text = try_ffi!(str_arg(text, "text"));
        let Some(doc) = corpus.doc_by_name(name) else {
            return fail(GenrankStatus::DataError, format!("unknown document `{name}`"));
        };
        if mu.is_nan() || mu <= 0.0 {
            return fail(GenrankStatus::ConfigError, format!("mu must be > 0, got {mu}"));
        }
        let terms = corpus.known_terms(&tokenize(text));
        if terms.is_empty() {
            return fail(GenrankStatus::DataError, "text has no terms known to the corpus");
        }
        let dist = try_lib!(TermDistribution::mle(&terms));
        let model = try_lib!(DirichletModel::for_document(corpus.doc(doc), corpus, mu));
        *out = try_lib!(log_gen_prob(&model, &dist));
        GenrankStatus::Ok
    })
}

/// Retrieves the top `params.k` documents for `query` and re-ranks them.
///
/// # Safety
/// `corpus` and `params` must be valid, `query` and `params.algorithm`
/// nul-terminated, and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn genrank_rerank(
    corpus: *const GenrankCorpus,
    query: *const c_char,
    params: *const GenrankRerankParams,
    out: *mut *mut GenrankResults,
) -> GenrankStatus {
    guard(|| {
        let (Some(c), Some(p), false) = (corpus.as_ref(), params.as_ref(), out.is_null()) else {
            return fail(GenrankStatus::NullPointer, "corpus, params or out is null");
        };
        let query = try_lib!(Query::parse("q", try_ffi!(str_arg(query, "query"))));
        let algorithm: genrank::rerank::Algorithm =
            try_lib!(try_ffi!(str_arg(p.algorithm, "algorithm")).parse());
        let link_mode = match p.link_mode {
            0 => LinkMode::LmGeneration,
            1 => LinkMode::CosineLogTfidf,
            other => return fail(GenrankStatus::ConfigError, format!("unknown link mode {other}")),
        };
        if p.k == 0 {
            return fail(GenrankStatus::ConfigError, "k must be >= 1");
        }
        let config = RerankConfig {
            algorithm,
            alpha: algorithm.needs_graph().then_some(p.alpha),
            lambda: algorithm.needs_lambda().then_some(p.lambda),
            mu: p.mu,
            link_mode,
        };
        let list = try_lib!(retrieve_and_rerank(&query, &c.corpus, p.k, &config, IterationOptions::default()));
        let names = list
            .docs()
            .map(|d| CString::new(c.corpus.doc(d).name()).unwrap_or_default())
            .collect();
        let scores = list.entries().iter().map(|e| e.score).collect();
        *out = Box::into_raw(Box::new(GenrankResults { names, scores }));
        GenrankStatus::Ok
    })
}

/// Number of ranked entries, or 0 for a null handle.
///
/// # Safety
/// `results` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn genrank_results_len(results: *const GenrankResults) -> usize {
    results.as_ref().map_or(0, |r| r.scores.len())
}

/// Entry `index` (0-based). The name pointer lives as long as `results`.
///
/// # Safety
/// `results` must be a live handle; `name` and `score` writable.
#[no_mangle]
pub unsafe extern "C" fn genrank_results_get(
    results: *const GenrankResults,
    index: usize,
    name: *mut *const c_char,
    score: *mut f64,
) -> GenrankStatus {
    guard(|| {
        let (Some(r), false, false) = (results.as_ref(), name.is_null(), score.is_null()) else {
            return fail(GenrankStatus::NullPointer, "results, name or score is null");
        };
        if index >= r.scores.len() {
            return fail(
                GenrankStatus::OutOfRange,
                format!("index {index} out of range for {} results", r.scores.len()),
            );
        }
        *name = r.names[index].as_ptr();
        *score = r.scores[index];
        GenrankStatus::Ok
    })
}

/// # Safety
/// `results` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn genrank_results_free(results: *mut GenrankResults) {
    if !results.is_null() {
        drop(Box::from_raw(results));
    }
}

unsafe fn matrix(weights: *const f64, n: usize) -> Result<GenerationGraph, GenrankStatus> {
    if weights.is_null() || n == 0 {
        return Err(fail(GenrankStatus::NullPointer, "weights is null or n is 0"));
    }
    let Some(len) = n.checked_mul(n) else {
        return Err(fail(GenrankStatus::OutOfRange, "n * n overflows"));
    };
    let values = slice::from_raw_parts(weights, len).to_vec();
    GenerationGraph::from_weights((0..n as u32).map(DocId).collect(), values).map_err(from_error)
}

/// Smooths the row-major `n x n` matrix `weights` (`weights[o*n + g]` is the
/// edge `o -> g`) with factor `lambda` and writes its stationary
/// distribution to `out_pi` (length `n`).
///
/// # Safety
/// `weights` must hold `n * n` values and `out_pi` room for `n`.
#[no_mangle]
pub unsafe extern "C" fn genrank_stationary_distribution(
    weights: *const f64,
    n: usize,
    lambda: f64,
    out_pi: *mut f64,
) -> GenrankStatus {
    guard(|| {
        if out_pi.is_null() {
            return fail(GenrankStatus::NullPointer, "out_pi is null");
        }
        let graph = try_ffi!(matrix(weights, n));
        let smoothed = try_lib!(smooth(&graph, lambda));
        let pi = try_lib!(recursive_influx(&smoothed, IterationOptions::default()));
        slice::from_raw_parts_mut(out_pi, n).copy_from_slice(pi.scores());
        GenrankStatus::Ok
    })
}

/// HITS authority and hub vectors (unit L2 norm) of the row-major `n x n`
/// matrix `weights`.
///
/// # Safety
/// `weights` must hold `n * n` values; `out_auth` and `out_hub` room for `n`.
#[no_mangle]
pub unsafe extern "C" fn genrank_hits(
    weights: *const f64,
    n: usize,
    out_auth: *mut f64,
    out_hub: *mut f64,
) -> GenrankStatus {
    guard(|| {
        if out_auth.is_null() || out_hub.is_null() {
            return fail(GenrankStatus::NullPointer, "output buffer is null");
        }
        let graph = try_ffi!(matrix(weights, n));
        let (auth, hub) = try_lib!(hits(&graph, IterationOptions::default()));
        slice::from_raw_parts_mut(out_auth, n).copy_from_slice(auth.scores());
        slice::from_raw_parts_mut(out_hub, n).copy_from_slice(hub.scores());
        GenrankStatus::Ok
    })
}
