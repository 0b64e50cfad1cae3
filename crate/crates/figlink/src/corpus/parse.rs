//! Canonical ingestion payload and its conversion into the document model.

use serde::{Deserialize, Serialize};

use crate::corpus::{segment_sentences, Document, Figure, Section};
use crate::error::{Error, Result};

/// Pre-parsed article payload: ordered sections with raw text, figures
/// nested inside the section they belong to.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RawArticle {
    #[serde(default)]
    pub id: String,
    pub title: String,
    pub sections: Vec<RawSection>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RawSection {
    #[serde(default)]
    pub heading: String,
    pub text: String,
    #[serde(default)]
    pub figures: Vec<RawFigure>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RawFigure {
    pub image_ref: String,
    #[serde(default)]
    pub caption: String,
}

/// Converts a raw payload into a [`Document`].
///
/// The section a figure is nested in becomes its ground-truth link; captions
/// are taken verbatim (empty captions are retained).
pub fn parse_document(raw: &RawArticle) -> Result<Document> {
    if raw.title.trim().is_empty() {
        return Err(Error::MalformedPayload(format!(
            "article {:?}: missing title",
            raw.id
        )));
    }
    if raw.sections.is_empty() {
        return Err(Error::MalformedPayload(format!(
            "article {:?}: empty section list",
            raw.id
        )));
    }

    let id = if raw.id.is_empty() {
        raw.title.clone()
    } else {
        raw.id.clone()
    };

    let mut sections = Vec::with_capacity(raw.sections.len());
    let mut figures = Vec::new();
    for (j, raw_section) in raw.sections.iter().enumerate() {
        let sentences = segment_sentences(&raw_section.text).map_err(|_| {
            Error::MalformedPayload(format!("article {id}: section {j} has no text"))
        })?;
        sections.push(Section {
            index: j,
            heading: raw_section.heading.trim().to_string(),
            sentences,
        });
        for raw_figure in &raw_section.figures {
            if raw_figure.image_ref.trim().is_empty() {
                return Err(Error::UnresolvableImage(format!(
                    "article {id}: figure {} in section {j}",
                    figures.len()
                )));
            }
            figures.push(Figure {
                figure_index: figures.len(),
                image_ref: raw_figure.image_ref.clone(),
                caption: raw_figure.caption.clone(),
                gt_section_index: j,
            });
        }
    }

    let doc = Document {
        id,
        title: raw.title.trim().to_string(),
        sections,
        figures,
    };
    doc.validate()?;
    Ok(doc)
}
