//! Lowercased tokenization shared by the adapters.

/// Splits text into lowercase alphanumeric tokens. Punctuation separates
/// tokens; case is folded so "Paris" and "paris" encode identically.
pub fn tokenize_lowercase(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() {
            for lc in c.to_lowercase() {
                current.push(lc);
            }
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folds_case_and_strips_punctuation() {
        assert_eq!(
            tokenize_lowercase("The U.S. Senate, in 1990!"),
            vec!["the", "u", "s", "senate", "in", "1990"]
        );
    }

    #[test]
    fn empty_input_yields_no_tokens() {
        assert!(tokenize_lowercase("  ...  ").is_empty());
    }
}
