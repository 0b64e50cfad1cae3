//! Deterministic test adapter: seeded hash of tokens/pixels to
//! pseudo-random unit vectors. Makes the whole pipeline testable offline.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::encoders::tokenize::tokenize_lowercase;
use crate::encoders::{EmbeddingVector, EncoderAdapter};
use crate::error::Result;

pub struct HashAdapter {
    seed: u64,
    dim: usize,
    max_text_tokens: usize,
    name: String,
}

impl HashAdapter {
    pub fn new(seed: u64, dim: usize, max_text_tokens: usize) -> Self {
        HashAdapter {
            seed,
            dim,
            max_text_tokens,
            name: if seed == 0 {
                "hash".to_string()
            } else {
                format!("hash:{seed}")
            },
        }
    }

    fn hash_seed(&self, tag: u8, payload: &[u8]) -> u64 {
        let mut hasher = Sha256::new();
        hasher.update(self.seed.to_le_bytes());
        hasher.update([tag]);
        hasher.update(payload);
        let digest = hasher.finalize();
        u64::from_le_bytes(digest[..8].try_into().unwrap())
    }

    /// Pseudo-random unit vector for one token (or marker), f32-exact.
    fn token_vector(&self, tag: u8, payload: &[u8]) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.hash_seed(tag, payload));
        let mut v: Vec<f64> = (0..self.dim)
            .map(|_| {
                let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
                let u2: f64 = rng.gen_range(0.0..1.0);
                (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
            })
            .collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
        for x in &mut v {
            *x = (*x / norm) as f32 as f64;
        }
        v
    }
}

const TAG_TOKEN: u8 = b'T';
const TAG_MARKER: u8 = b'M';
const TAG_PIXELS: u8 = b'P';

impl EncoderAdapter for HashAdapter {
    fn name(&self) -> &str {
        &self.name
    }

    fn dimension(&self) -> usize {
        self.dim
    }

    fn max_text_tokens(&self) -> usize {
        self.max_text_tokens
    }

    fn deterministic(&self) -> bool {
        true
    }

    /// Bag of hashed token vectors over the first `max_text_tokens - 2`
    /// tokens (two slots go to the begin/end markers), renormalized.
    fn encode_text(&self, text: &str) -> Result<EmbeddingVector> {
        let capacity = self.max_text_tokens.saturating_sub(2);
        let tokens = tokenize_lowercase(text);
        let window = &tokens[..tokens.len().min(capacity)];

        let mut sum = self.token_vector(TAG_MARKER, b"begin");
        let end = self.token_vector(TAG_MARKER, b"end");
        for (s, e) in sum.iter_mut().zip(&end) {
            *s += e;
        }
        for token in window {
            let tv = self.token_vector(TAG_TOKEN, token.as_bytes());
            for (s, t) in sum.iter_mut().zip(&tv) {
                *s += t;
            }
        }
        let norm = sum.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
        for x in &mut sum {
            *x /= norm;
        }
        Ok(EmbeddingVector::new(sum).round_to_f32())
    }

    fn encode_image_pixels(&self, image: &image::RgbImage) -> Result<EmbeddingVector> {
        let mut payload = Vec::with_capacity(8 + image.as_raw().len());
        payload.extend_from_slice(&image.width().to_le_bytes());
        payload.extend_from_slice(&image.height().to_le_bytes());
        payload.extend_from_slice(image.as_raw());
        Ok(EmbeddingVector::new(self.token_vector(TAG_PIXELS, &payload)).round_to_f32())
    }
}
