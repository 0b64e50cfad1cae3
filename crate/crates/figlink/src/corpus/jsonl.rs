//! Corpus file IO: one JSON document per line, UTF-8.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Document, Figure, Section, Sentence};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct DocumentLine {
    id: String,
    title: String,
    sections: Vec<SectionLine>,
    figures: Vec<FigureLine>,
}

#[derive(Serialize, Deserialize)]
struct SectionLine {
    heading: String,
    sentences: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct FigureLine {
    image_ref: String,
    caption: String,
    gt_section_index: usize,
}

impl From<&Document> for DocumentLine {
    fn from(doc: &Document) -> Self {
        DocumentLine {
            id: doc.id.clone(),
            title: doc.title.clone(),
            sections: doc
                .sections
                .iter()
                .map(|s| SectionLine {
                    heading: s.heading.clone(),
                    sentences: s.sentences.iter().map(|x| x.text.clone()).collect(),
                })
                .collect(),
            figures: doc
                .figures
                .iter()
                .map(|f| FigureLine {
                    image_ref: f.image_ref.clone(),
                    caption: f.caption.clone(),
                    gt_section_index: f.gt_section_index,
                })
                .collect(),
        }
    }
}

impl DocumentLine {
    fn into_document(self) -> Document {
        Document {
            id: self.id,
            title: self.title,
            sections: self
                .sections
                .into_iter()
                .enumerate()
                .map(|(j, s)| Section {
                    index: j,
                    heading: s.heading,
                    sentences: s
                        .sentences
                        .into_iter()
                        .enumerate()
                        .map(|(i, text)| Sentence::new(i, text))
                        .collect(),
                })
                .collect(),
            figures: self
                .figures
                .into_iter()
                .enumerate()
                .map(|(k, f)| Figure {
                    figure_index: k,
                    image_ref: f.image_ref,
                    caption: f.caption,
                    gt_section_index: f.gt_section_index,
                })
                .collect(),
        }
    }
}

pub fn write_corpus_jsonl(path: &Path, docs: &[Document]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for doc in docs {
        let line = serde_json::to_string(&DocumentLine::from(doc)).map_err(|e| Error::Json {
            path: path.display().to_string(),
            source: e,
        })?;
        writeln!(out, "{line}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Reads and validates a corpus file; malformed lines are hard errors.
pub fn read_corpus_jsonl(path: &Path) -> Result<Vec<Document>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut docs = Vec::new();
    for line in reader.lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: DocumentLine = serde_json::from_str(&line).map_err(|e| Error::Json {
            path: path.display().to_string(),
            source: e,
        })?;
        let doc = parsed.into_document();
        doc.validate()?;
        docs.push(doc);
    }
    Ok(docs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let doc = Document {
            id: "d0".into(),
            title: "Title".into(),
            sections: vec![Section {
                index: 0,
                heading: "H".into(),
                sentences: vec![Sentence::new(0, "One two."), Sentence::new(1, "Three.")],
            }],
            figures: vec![Figure {
                figure_index: 0,
                image_ref: "a.png".into(),
                caption: "cap".into(),
                gt_section_index: 0,
            }],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        write_corpus_jsonl(&path, &[doc.clone()]).unwrap();
        let loaded = read_corpus_jsonl(&path).unwrap();
        assert_eq!(loaded, vec![doc]);
    }
}
