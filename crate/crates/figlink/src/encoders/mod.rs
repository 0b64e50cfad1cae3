//! Pluggable sentence/caption/image encoders behind a uniform vector
//! interface, plus salience scoring and the section-encoding strategies.

mod cache;
mod checkpoint_adapter;
mod hash_adapter;
mod salience;
mod section;
mod tokenize;

pub use cache::{CachingAdapter, EmbeddingCache};
pub use checkpoint_adapter::{CheckpointAdapter, EncoderArch};
pub use hash_adapter::HashAdapter;
pub use salience::{salience_from_cosines, salience_score, select_salient, QueryEmbeddings, SalienceScore};
pub use section::{encode_section, pool_sentences, pool_sentences_node, SectionStrategy};
pub use tokenize::tokenize_lowercase;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fixed-dimension real vector exchanged by all encoders and transformers.
///
/// Adapter outputs are exactly representable in 32-bit floats so the on-disk
/// embedding cache round-trips without loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    pub values: Vec<f64>,
}

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Self {
        EmbeddingVector { values }
    }

    pub fn from_f32(values: &[f32]) -> Self {
        EmbeddingVector {
            values: values.iter().map(|&v| v as f64).collect(),
        }
    }

    pub fn to_f32(&self) -> Vec<f32> {
        self.values.iter().map(|&v| v as f32).collect()
    }

    /// Rounds every entry to the nearest f32; adapters apply this before
    /// returning so cached and fresh embeddings are identical.
    pub fn round_to_f32(mut self) -> Self {
        for v in &mut self.values {
            *v = *v as f32 as f64;
        }
        self
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn cosine(&self, other: &EmbeddingVector) -> f64 {
        cosine(&self.values, &other.values)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    dot / (na * nb).max(1e-12)
}

/// Text and image encoder pair behind one interface.
pub trait EncoderAdapter: Send + Sync {
    fn name(&self) -> &str;
    fn dimension(&self) -> usize;
    fn max_text_tokens(&self) -> usize;
    fn deterministic(&self) -> bool;
    fn encode_text(&self, text: &str) -> Result<EmbeddingVector>;
    fn encode_image_pixels(&self, image: &image::RgbImage) -> Result<EmbeddingVector>;
}

/// Encodes one sentence (or any short text) to a d-dimensional vector.
/// The adapter tokenizes with begin/end markers, truncates to its token
/// budget, pads to fixed length, and pools the begin-marker output.
pub fn encode_sentence(text: &str, adapter: &dyn EncoderAdapter) -> Result<EmbeddingVector> {
    let v = adapter.encode_text(text)?;
    debug_assert_eq!(v.dim(), adapter.dimension());
    Ok(v)
}

/// Resolves image locators relative to an optional base directory.
#[derive(Debug, Clone, Default)]
pub struct ImageLoader {
    base: Option<PathBuf>,
}

impl ImageLoader {
    pub fn new(base: Option<&Path>) -> Self {
        ImageLoader {
            base: base.map(Path::to_path_buf),
        }
    }

    pub fn resolve(&self, image_ref: &str) -> PathBuf {
        let p = Path::new(image_ref);
        match (&self.base, p.is_absolute()) {
            (Some(base), false) => base.join(p),
            _ => p.to_path_buf(),
        }
    }

    pub fn load(&self, image_ref: &str) -> Result<image::RgbImage> {
        let path = self.resolve(image_ref);
        let img = image::open(&path).map_err(|e| Error::ImageDecodeError {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Ok(img.to_rgb8())
    }
}

/// Loads and encodes an image by locator.
pub fn encode_image(
    image_ref: &str,
    loader: &ImageLoader,
    adapter: &dyn EncoderAdapter,
) -> Result<EmbeddingVector> {
    let pixels = loader.load(image_ref)?;
    adapter.encode_image_pixels(&pixels)
}

/// Config keys for adapter construction.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EncoderCfg {
    pub name: String,
    pub dim: usize,
    pub max_text_tokens: usize,
    #[serde(default)]
    pub checkpoint_path: Option<String>,
    /// Text-side checkpoint override for hybrid initialization.
    #[serde(default)]
    pub text_checkpoint_path: Option<String>,
    #[serde(default)]
    pub cache_path: Option<String>,
}

impl Default for EncoderCfg {
    fn default() -> Self {
        EncoderCfg {
            name: "hash".into(),
            dim: 512,
            max_text_tokens: 77,
            checkpoint_path: None,
            text_checkpoint_path: None,
            cache_path: None,
        }
    }
}

/// Builds the adapter named in the config.
///
/// `hash` and `scratch` never touch the filesystem; `checkpoint` requires
/// `checkpoint_path` and fails with `AdapterUnavailable` when it is missing.
pub fn build_adapter(cfg: &EncoderCfg) -> Result<Arc<dyn EncoderAdapter>> {
    let inner: Arc<dyn EncoderAdapter> = match cfg.name.as_str() {
        "hash" => Arc::new(HashAdapter::new(0, cfg.dim, cfg.max_text_tokens)),
        name if name.starts_with("hash:") => {
            let seed: u64 = name["hash:".len()..]
                .parse()
                .map_err(|_| Error::Config(format!("bad hash adapter seed in {name:?}")))?;
            Arc::new(HashAdapter::new(seed, cfg.dim, cfg.max_text_tokens))
        }
        "scratch" => Arc::new(CheckpointAdapter::seeded(
            0,
            cfg.dim,
            cfg.max_text_tokens,
        )),
        name if name.starts_with("scratch:") => {
            let seed: u64 = name["scratch:".len()..]
                .parse()
                .map_err(|_| Error::Config(format!("bad scratch adapter seed in {name:?}")))?;
            Arc::new(CheckpointAdapter::seeded(seed, cfg.dim, cfg.max_text_tokens))
        }
        "checkpoint" | "dual_vit" | "dual_resnet" | "hybrid_text" => {
            let path = cfg.checkpoint_path.as_deref().ok_or_else(|| {
                Error::AdapterUnavailable(format!(
                    "adapter {:?} needs encoder.checkpoint_path",
                    cfg.name
                ))
            })?;
            let mut adapter = CheckpointAdapter::load(Path::new(path))?;
            if let Some(text_path) = cfg.text_checkpoint_path.as_deref() {
                adapter = adapter.with_text_from(Path::new(text_path))?;
            }
            Arc::new(adapter)
        }
        other => {
            return Err(Error::AdapterUnavailable(format!(
                "unknown adapter {other:?}"
            )))
        }
    };
    if let Some(cache_path) = cfg.cache_path.as_deref() {
        let cache = EmbeddingCache::open(Path::new(cache_path), inner.dimension())?;
        return Ok(Arc::new(CachingAdapter::new(inner, Arc::new(cache))));
    }
    Ok(inner)
}
