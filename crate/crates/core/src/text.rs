//! Term normalization and tokenization shared by corpus statistics and the
//! c-NLI length checks.

use unicode_normalization::UnicodeNormalization;

/// Normalizes a term or title: Unicode NFC, lowercase, whitespace collapsed
/// to single spaces and trimmed.
pub fn normalize(text: &str) -> String {
    let nfc: String = text.nfc().collect::<String>().to_lowercase();
    // lowercasing can produce decomposed sequences
    let nfc: String = nfc.nfc().collect();
    nfc.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Splits text into normalized word tokens. Whitespace and punctuation are
/// boundaries; punctuation never becomes a token.
pub fn tokenize(text: &str) -> Vec<String> {
    let normalized = normalize(text);
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in normalized.chars() {
        if ch.is_alphanumeric() {
            current.push(ch);
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}
