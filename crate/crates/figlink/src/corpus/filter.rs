//! Corpus admission filter: 2..=30 figures, at most 32 sections, and every
//! image must decode as 3-channel RGB.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Document;

pub const MIN_FIGURES: usize = 2;
pub const MAX_FIGURES: usize = 30;
pub const MAX_SECTIONS: usize = 32;

/// Decides whether an image locator resolves to a decodable RGB image.
pub trait ImageChecker: Sync {
    fn decodes_as_rgb(&self, image_ref: &str) -> bool;
}

/// Filesystem-backed checker; locators are paths, optionally relative to a
/// base directory.
pub struct FsImageChecker {
    base: Option<std::path::PathBuf>,
}

impl FsImageChecker {
    pub fn new(base: Option<&Path>) -> Self {
        FsImageChecker {
            base: base.map(Path::to_path_buf),
        }
    }

    pub fn resolve(&self, image_ref: &str) -> std::path::PathBuf {
        let p = Path::new(image_ref);
        match (&self.base, p.is_absolute()) {
            (Some(base), false) => base.join(p),
            _ => p.to_path_buf(),
        }
    }
}

impl ImageChecker for FsImageChecker {
    fn decodes_as_rgb(&self, image_ref: &str) -> bool {
        let path = self.resolve(image_ref);
        match image::open(&path) {
            Ok(img) => {
                let rgb = img.to_rgb8();
                rgb.width() > 0 && rgb.height() > 0
            }
            Err(_) => false,
        }
    }
}

/// Checker that accepts every locator; for pipelines whose images were
/// validated at ingest time.
pub struct AcceptAllImages;

impl ImageChecker for AcceptAllImages {
    fn decodes_as_rgb(&self, _image_ref: &str) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FilterOptions {
    pub min_figures: usize,
    pub max_figures: usize,
    pub max_sections: usize,
}

impl Default for FilterOptions {
    fn default() -> Self {
        FilterOptions {
            min_figures: MIN_FIGURES,
            max_figures: MAX_FIGURES,
            max_sections: MAX_SECTIONS,
        }
    }
}

/// True iff the document satisfies the corpus admission rules.
pub fn filter_document(doc: &Document, checker: &dyn ImageChecker) -> bool {
    filter_document_with(doc, checker, FilterOptions::default())
}

pub fn filter_document_with(
    doc: &Document,
    checker: &dyn ImageChecker,
    opts: FilterOptions,
) -> bool {
    let m = doc.figure_count();
    let n = doc.section_count();
    if m < opts.min_figures || m > opts.max_figures || n > opts.max_sections {
        return false;
    }
    doc.figures
        .iter()
        .all(|f| checker.decodes_as_rgb(&f.image_ref))
}

/// Outcome of an ingestion pass: what parsed, what was rejected and why.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FilterReport {
    pub parsed: usize,
    pub kept: usize,
    pub parse_failures: Vec<ParseFailure>,
    pub rejected: Vec<Rejection>,
    pub rejection_counts: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParseFailure {
    pub id: String,
    pub error: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Rejection {
    pub id: String,
    pub reason: String,
}

impl FilterReport {
    pub fn record_rejection(&mut self, id: &str, reason: String) {
        *self.rejection_counts.entry(reason.clone()).or_insert(0) += 1;
        self.rejected.push(Rejection {
            id: id.to_string(),
            reason,
        });
    }
}

/// Human-readable reason a document failed the filter, or None if it passes.
pub fn rejection_reason(doc: &Document, checker: &dyn ImageChecker) -> Option<String> {
    let m = doc.figure_count();
    let n = doc.section_count();
    if m < MIN_FIGURES {
        return Some(format!("too few figures ({m} < {MIN_FIGURES})"));
    }
    if m > MAX_FIGURES {
        return Some(format!("too many figures ({m} > {MAX_FIGURES})"));
    }
    if n > MAX_SECTIONS {
        return Some(format!("too many sections ({n} > {MAX_SECTIONS})"));
    }
    for f in &doc.figures {
        if !checker.decodes_as_rgb(&f.image_ref) {
            return Some(format!("image does not decode as RGB: {}", f.image_ref));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Figure, Section, Sentence};

    fn doc(m: usize, n: usize) -> Document {
        let sections = (0..n)
            .map(|j| Section {
                index: j,
                heading: String::new(),
                sentences: vec![Sentence::new(0, format!("Sentence of section {j}."))],
            })
            .collect();
        let figures = (0..m)
            .map(|k| Figure {
                figure_index: k,
                image_ref: format!("img{k}.png"),
                caption: String::new(),
                gt_section_index: 0,
            })
            .collect();
        Document {
            id: format!("doc-{m}-{n}"),
            title: "t".into(),
            sections,
            figures,
        }
    }

    #[test]
    fn image_count_lower_bound() {
        assert!(!filter_document(&doc(1, 5), &AcceptAllImages));
        assert!(filter_document(&doc(2, 5), &AcceptAllImages));
    }

    #[test]
    fn section_cap_boundaries() {
        assert!(filter_document(&doc(2, 32), &AcceptAllImages));
        assert!(!filter_document(&doc(30, 33), &AcceptAllImages));
        assert!(filter_document(&doc(30, 32), &AcceptAllImages));
        assert!(!filter_document(&doc(31, 32), &AcceptAllImages));
    }

    #[test]
    fn undecodable_image_rejects() {
        struct Never;
        impl ImageChecker for Never {
            fn decodes_as_rgb(&self, _: &str) -> bool {
                false
            }
        }
        assert!(!filter_document(&doc(2, 5), &Never));
        assert!(rejection_reason(&doc(2, 5), &Never)
            .unwrap()
            .contains("does not decode"));
    }
}
