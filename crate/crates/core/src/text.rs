//! Tokenization and cell normalization shared by every stage.

/// Lowercased alphanumeric runs. No stemming, stopwords kept.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            cur.extend(ch.to_lowercase());
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Case, whitespace and punctuation-insensitive form of a cell value.
pub fn normalize_cell(text: &str) -> String {
    tokenize(text).join(" ")
}

/// Collapses runs of whitespace and trims.
pub fn squash_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// A cell counts as numeric when it parses as a number after removing
/// grouping separators, currency signs and a trailing percent.
pub fn is_numeric(text: &str) -> bool {
    let t: String = text
        .trim()
        .chars()
        .filter(|c| !matches!(c, ',' | '$' | '€' | '£' | '%' | ' '))
        .collect();
    !t.is_empty() && t.parse::<f64>().is_ok()
}
