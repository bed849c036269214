use super::porter;

/// Lowercases `raw`, splits it on every non-alphanumeric character and
/// Porter-stems each piece. No stopwords are removed.
pub fn tokenize(raw: &str) -> Vec<String> {
    raw.split(|c: char| !c.is_alphanumeric())
        .filter(|piece| !piece.is_empty())
        .map(|piece| porter::stem(&piece.to_lowercase()))
        .collect()
}
