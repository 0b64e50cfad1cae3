//! Document model and corpus tooling: parsing, filtering, sentence
//! segmentation, entity extraction, splits, and statistics.

mod entities;
mod filter;
mod html;
mod jsonl;
mod parse;
mod segment;
mod split;
mod stats;

pub use entities::{extract_entities, shared_entity_count, is_stopword};
pub use filter::{filter_document, FilterOptions, FilterReport, ImageChecker, FsImageChecker};
pub use html::article_from_html;
pub use jsonl::{read_corpus_jsonl, write_corpus_jsonl};
pub use parse::{parse_document, RawArticle, RawFigure, RawSection};
pub use segment::segment_sentences;
pub use split::{split_corpus, SplitSizes};
pub use stats::compute_stats;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One sentence of a section, with its position and whitespace token count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub index: usize,
    pub text: String,
    pub token_count: usize,
}

impl Sentence {
    pub fn new(index: usize, text: impl Into<String>) -> Self {
        let text = text.into();
        let token_count = text.split_whitespace().count().max(1);
        Sentence {
            index,
            text,
            token_count,
        }
    }
}

/// A heading-delimited block of body text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Section {
    pub index: usize,
    pub heading: String,
    pub sentences: Vec<Sentence>,
}

impl Section {
    pub fn text(&self) -> String {
        let parts: Vec<&str> = self.sentences.iter().map(|s| s.text.as_str()).collect();
        parts.join(" ")
    }

    pub fn word_count(&self) -> usize {
        self.sentences.iter().map(|s| s.token_count).sum()
    }
}

/// An image together with its caption; one retrieval query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Figure {
    pub figure_index: usize,
    pub image_ref: String,
    pub caption: String,
    pub gt_section_index: usize,
}

/// A parsed article with ground-truth figure-to-section links.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub title: String,
    pub sections: Vec<Section>,
    pub figures: Vec<Figure>,
}

impl Document {
    /// Section count N.
    pub fn section_count(&self) -> usize {
        self.sections.len()
    }

    /// Figure count M.
    pub fn figure_count(&self) -> usize {
        self.figures.len()
    }

    pub fn word_count(&self) -> usize {
        self.sections.iter().map(|s| s.word_count()).sum()
    }

    /// Checks the structural invariants: contiguous indices, non-empty
    /// sections, and ground-truth links inside [0, N).
    pub fn validate(&self) -> Result<()> {
        if self.sections.is_empty() {
            return Err(Error::MalformedPayload(format!(
                "document {}: empty section list",
                self.id
            )));
        }
        for (j, section) in self.sections.iter().enumerate() {
            if section.index != j {
                return Err(Error::MalformedPayload(format!(
                    "document {}: section index {} at position {}",
                    self.id, section.index, j
                )));
            }
            if section.sentences.is_empty() {
                return Err(Error::MalformedPayload(format!(
                    "document {}: section {} has no sentences",
                    self.id, j
                )));
            }
            for (i, sentence) in section.sentences.iter().enumerate() {
                if sentence.index != i {
                    return Err(Error::MalformedPayload(format!(
                        "document {}: sentence index {} at position {} of section {}",
                        self.id, sentence.index, i, j
                    )));
                }
                if sentence.text.trim().is_empty() {
                    return Err(Error::MalformedPayload(format!(
                        "document {}: empty sentence {} in section {}",
                        self.id, i, j
                    )));
                }
            }
        }
        let n = self.sections.len();
        for (k, figure) in self.figures.iter().enumerate() {
            if figure.figure_index != k {
                return Err(Error::MalformedPayload(format!(
                    "document {}: figure index {} at position {}",
                    self.id, figure.figure_index, k
                )));
            }
            if figure.image_ref.is_empty() {
                return Err(Error::UnresolvableImage(format!(
                    "document {}: figure {}",
                    self.id, k
                )));
            }
            if figure.gt_section_index >= n {
                return Err(Error::MalformedPayload(format!(
                    "document {}: figure {} links to section {} of {}",
                    self.id, k, figure.gt_section_index, n
                )));
            }
        }
        Ok(())
    }
}

/// Corpus-level statistics; averages are in whitespace words, unit = section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub avg_unit_length: f64,
    pub avg_doc_length: f64,
    pub avg_sent_length: f64,
    pub avg_sent_per_unit: f64,
    pub avg_img_per_doc: f64,
    pub doc_count: usize,
    pub figure_count: usize,
    /// count of figures nested in a section -> number of such sections
    pub images_per_section_hist: std::collections::BTreeMap<usize, usize>,
    /// section count per document -> number of such documents
    pub sections_per_doc_hist: std::collections::BTreeMap<usize, usize>,
}
