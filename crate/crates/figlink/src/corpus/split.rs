//! Deterministic 80/10/10 corpus split.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::Document;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSizes {
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

/// 80/10/10 by document count; val and test get floor(n/10) each and train
/// keeps the remainder.
pub fn split_sizes(n: usize) -> SplitSizes {
    let val = n / 10;
    let test = n / 10;
    SplitSizes {
        train: n - val - test,
        val,
        test,
    }
}

/// Partitions documents into (train, val, test), deterministic given `seed`.
pub fn split_corpus(
    docs: Vec<Document>,
    seed: u64,
) -> Result<(Vec<Document>, Vec<Document>, Vec<Document>)> {
    if docs.len() < 10 {
        return Err(Error::TooFewDocuments {
            need: 10,
            got: docs.len(),
        });
    }
    let sizes = split_sizes(docs.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..docs.len()).collect();
    order.shuffle(&mut rng);

    let mut slots: Vec<Option<Document>> = docs.into_iter().map(Some).collect();
    let mut take = |ids: &[usize]| -> Vec<Document> {
        ids.iter().map(|&i| slots[i].take().unwrap()).collect()
    };

    let train = take(&order[..sizes.train]);
    let val = take(&order[sizes.train..sizes.train + sizes.val]);
    let test = take(&order[sizes.train + sizes.val..]);
    Ok((train, val, test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Section, Sentence};
    use std::collections::BTreeSet;

    fn docs(n: usize) -> Vec<Document> {
        (0..n)
            .map(|i| Document {
                id: format!("d{i}"),
                title: format!("t{i}"),
                sections: vec![Section {
                    index: 0,
                    heading: String::new(),
                    sentences: vec![Sentence::new(0, "Text.")],
                }],
                figures: vec![],
            })
            .collect()
    }

    #[test]
    fn ten_docs_split_8_1_1() {
        let (train, val, test) = split_corpus(docs(10), 7).unwrap();
        assert_eq!((train.len(), val.len(), test.len()), (8, 1, 1));
    }

    #[test]
    fn train_gets_remainders() {
        let s = split_sizes(107);
        assert_eq!((s.train, s.val, s.test), (87, 10, 10));
    }

    #[test]
    fn deterministic_under_seed() {
        let ids = |v: &[Document]| v.iter().map(|d| d.id.clone()).collect::<Vec<_>>();
        let (a1, b1, c1) = split_corpus(docs(100), 42).unwrap();
        let (a2, b2, c2) = split_corpus(docs(100), 42).unwrap();
        assert_eq!(ids(&a1), ids(&a2));
        assert_eq!(ids(&b1), ids(&b2));
        assert_eq!(ids(&c1), ids(&c2));
    }

    #[test]
    fn partition_property() {
        let (train, val, test) = split_corpus(docs(100), 3).unwrap();
        let mut all = BTreeSet::new();
        for d in train.iter().chain(&val).chain(&test) {
            assert!(all.insert(d.id.clone()), "duplicate {}", d.id);
        }
        assert_eq!(all.len(), 100);
    }

    #[test]
    fn too_few_documents() {
        assert!(matches!(
            split_corpus(docs(9), 0),
            Err(Error::TooFewDocuments { .. })
        ));
    }
}
