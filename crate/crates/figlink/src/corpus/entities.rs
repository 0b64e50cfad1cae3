//! Heuristic entity extraction: maximal runs of capitalized tokens,
//! lowercase-normalized. Stopwords never head a run. Deterministic and
//! replaceable by a learned extractor behind the same signature.

use std::collections::BTreeSet;

const STOPWORDS: &[&str] = &[
    "a", "an", "and", "as", "at", "but", "by", "for", "from", "he", "her", "his", "i", "if",
    "in", "is", "it", "its", "nor", "of", "on", "or", "our", "she", "so", "that", "the",
    "their", "them", "they", "these", "this", "those", "to", "was", "we", "were", "with",
    "you", "your",
];

pub fn is_stopword(token: &str) -> bool {
    STOPWORDS.contains(&token.to_lowercase().as_str())
}

/// Strips non-alphanumeric characters from both ends of a token.
fn trim_token(token: &str) -> &str {
    token.trim_matches(|c: char| !c.is_alphanumeric())
}

fn is_capitalized(token: &str) -> bool {
    token.chars().next().is_some_and(|c| c.is_uppercase())
}

/// Extracts the set of entity strings mentioned in `text`.
///
/// An entity is a maximal run of capitalized tokens; leading stopwords are
/// dropped from each run, and the surviving run is joined with single spaces
/// and lowercased for comparison.
pub fn extract_entities(text: &str) -> BTreeSet<String> {
    let mut entities = BTreeSet::new();
    let mut run: Vec<String> = Vec::new();

    let mut flush = |run: &mut Vec<String>, entities: &mut BTreeSet<String>| {
        while run.first().is_some_and(|t| is_stopword(t)) {
            run.remove(0);
        }
        if !run.is_empty() {
            entities.insert(run.join(" ").to_lowercase());
        }
        run.clear();
    };

    for raw in text.split_whitespace() {
        let token = trim_token(raw);
        if !token.is_empty() && is_capitalized(token) {
            run.push(token.to_string());
        } else {
            flush(&mut run, &mut entities);
        }
        // Punctuation at the end of a token also closes the run: "Paris,"
        // cannot continue into the next capitalized word.
        if raw.ends_with(|c: char| !c.is_alphanumeric()) && !run.is_empty() {
            flush(&mut run, &mut entities);
        }
    }
    flush(&mut run, &mut entities);
    entities
}

/// Number of distinct normalized entities shared by two texts.
pub fn shared_entity_count(a: &str, b: &str) -> usize {
    let ea = extract_entities(a);
    let eb = extract_entities(b);
    ea.intersection(&eb).count()
}
