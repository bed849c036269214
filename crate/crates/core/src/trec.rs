//! TREC run files: `qid Q0 docname rank score tag`.

use std::io::{self, Write};

use crate::corpus::Corpus;
use crate::retrieval::RankedList;

/// Writes one line per entry, ranks starting at 1.
pub fn write_run<W: Write>(out: &mut W, list: &RankedList, corpus: &Corpus, tag: &str) -> io::Result<()> {
    for (i, entry) in list.entries().iter().enumerate() {
        writeln!(
            out,
            "{} Q0 {} {} {} {}",
            list.qid,
            corpus.doc(entry.doc).name(),
            i + 1,
            entry.score,
            tag
        )?;
    }
    Ok(())
}
