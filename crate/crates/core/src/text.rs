//! Tokenizer shared by question classification and vocabulary scoring.

use alloc::string::String;
use alloc::vec::Vec;

/// Splits on Unicode whitespace, strips leading and trailing punctuation from
/// every token and lower-cases it. Tokens that end up empty are dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|tok| tok.trim_matches(|c: char| !c.is_alphanumeric()))
        .filter(|tok| !tok.is_empty())
        .map(|tok| tok.to_lowercase())
        .collect()
}
