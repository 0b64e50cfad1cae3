//! Corpus statistics over words (whitespace tokens); unit = section.

use std::collections::BTreeMap;

use crate::corpus::{CorpusStats, Document};
use crate::error::{Error, Result};

pub fn compute_stats(corpus: &[Document]) -> Result<CorpusStats> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }

    let mut total_words = 0usize;
    let mut total_sections = 0usize;
    let mut total_sentences = 0usize;
    let mut total_figures = 0usize;
    let mut images_per_section_hist: BTreeMap<usize, usize> = BTreeMap::new();
    let mut sections_per_doc_hist: BTreeMap<usize, usize> = BTreeMap::new();

    for doc in corpus {
        total_sections += doc.section_count();
        total_figures += doc.figure_count();
        *sections_per_doc_hist.entry(doc.section_count()).or_insert(0) += 1;

        let mut per_section = vec![0usize; doc.section_count()];
        for figure in &doc.figures {
            per_section[figure.gt_section_index] += 1;
        }
        for count in per_section {
            *images_per_section_hist.entry(count).or_insert(0) += 1;
        }

        for section in &doc.sections {
            total_sentences += section.sentences.len();
            total_words += section.word_count();
        }
    }

    let f = |num: usize, den: usize| num as f64 / den as f64;
    Ok(CorpusStats {
        avg_unit_length: f(total_words, total_sections),
        avg_doc_length: f(total_words, corpus.len()),
        avg_sent_length: f(total_words, total_sentences),
        avg_sent_per_unit: f(total_sentences, total_sections),
        avg_img_per_doc: f(total_figures, corpus.len()),
        doc_count: corpus.len(),
        figure_count: total_figures,
        images_per_section_hist,
        sections_per_doc_hist,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Figure, Section, Sentence};

    fn sent(i: usize, words: usize) -> Sentence {
        Sentence::new(i, vec!["w"; words].join(" "))
    }

    #[test]
    fn sentences_per_unit() {
        let doc = Document {
            id: "d".into(),
            title: "t".into(),
            sections: (0..2)
                .map(|j| Section {
                    index: j,
                    heading: String::new(),
                    sentences: (0..4).map(|i| sent(i, 3)).collect(),
                })
                .collect(),
            figures: vec![],
        };
        let stats = compute_stats(&[doc]).unwrap();
        assert_eq!(stats.avg_sent_per_unit, 4.0);
    }

    #[test]
    fn unit_and_doc_lengths() {
        let doc = Document {
            id: "d".into(),
            title: "t".into(),
            sections: vec![
                Section {
                    index: 0,
                    heading: String::new(),
                    sentences: vec![sent(0, 10)],
                },
                Section {
                    index: 1,
                    heading: String::new(),
                    sentences: vec![sent(0, 20)],
                },
            ],
            figures: vec![],
        };
        let stats = compute_stats(&[doc]).unwrap();
        assert_eq!(stats.avg_unit_length, 15.0);
        assert_eq!(stats.avg_doc_length, 30.0);
        assert_eq!(stats.avg_sent_length, 15.0);
    }

    #[test]
    fn histogram_mass_matches_populations() {
        let doc = |m: usize, n: usize, idx: usize| Document {
            id: format!("d{idx}"),
            title: "t".into(),
            sections: (0..n)
                .map(|j| Section {
                    index: j,
                    heading: String::new(),
                    sentences: vec![sent(0, 5)],
                })
                .collect(),
            figures: (0..m)
                .map(|k| Figure {
                    figure_index: k,
                    image_ref: "x.png".into(),
                    caption: String::new(),
                    gt_section_index: k % n,
                })
                .collect(),
        };
        let corpus = vec![doc(2, 3, 0), doc(4, 5, 1), doc(0, 2, 2)];
        let stats = compute_stats(&corpus).unwrap();
        let section_mass: usize = stats.images_per_section_hist.values().sum();
        let doc_mass: usize = stats.sections_per_doc_hist.values().sum();
        assert_eq!(section_mass, 10);
        assert_eq!(doc_mass, 3);
        assert_eq!(stats.figure_count, 6);
        assert_eq!(stats.avg_img_per_doc, 2.0);
    }

    #[test]
    fn empty_corpus_is_an_error() {
        assert!(matches!(compute_stats(&[]), Err(Error::EmptyCorpus)));
    }
}
