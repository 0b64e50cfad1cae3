//! Named parameter tensors and their gradients.

use std::collections::BTreeMap;

use ndarray::Array2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// All learnable tensors of a model, keyed by name. BTreeMap keeps iteration
/// order deterministic.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamSet {
    tensors: BTreeMap<String, Array2<f64>>,
}

impl ParamSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, value: Array2<f64>) {
        self.tensors.insert(name.into(), value);
    }

    pub fn get(&self, name: &str) -> &Array2<f64> {
        self.tensors
            .get(name)
            .unwrap_or_else(|| panic!("unknown parameter {name}"))
    }

    pub fn try_get(&self, name: &str) -> Option<&Array2<f64>> {
        self.tensors.get(name)
    }

    pub fn get_mut(&mut self, name: &str) -> &mut Array2<f64> {
        self.tensors
            .get_mut(name)
            .unwrap_or_else(|| panic!("unknown parameter {name}"))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.tensors.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.tensors.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Array2<f64>)> {
        self.tensors.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    /// Adds a tensor drawn from a zero-mean Gaussian with the given sigma.
    pub fn init_gaussian(
        &mut self,
        name: impl Into<String>,
        rows: usize,
        cols: usize,
        sigma: f64,
        rng: &mut ChaCha8Rng,
    ) {
        let mut arr = Array2::zeros((rows, cols));
        for v in arr.iter_mut() {
            *v = gaussian(rng) * sigma;
        }
        self.insert(name, arr);
    }

    pub fn init_zeros(&mut self, name: impl Into<String>, rows: usize, cols: usize) {
        self.insert(name, Array2::zeros((rows, cols)));
    }

    pub fn init_ones(&mut self, name: impl Into<String>, rows: usize, cols: usize) {
        self.insert(name, Array2::ones((rows, cols)));
    }

    /// Stable content hash of one tensor, for checkpoint diffing in tests.
    pub fn tensor_digest(&self, name: &str) -> u64 {
        use std::hash::Hasher;
        let mut h = std::collections::hash_map::DefaultHasher::new();
        for v in self.get(name).iter() {
            h.write_u64(v.to_bits());
        }
        h.finish()
    }
}

/// Box-Muller transform over the seeded stream; avoids depending on a
/// specific distribution crate version for reproducibility.
fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Gradient accumulator aligned with [`ParamSet`] names.
#[derive(Debug, Clone, Default)]
pub struct Grads {
    map: BTreeMap<String, Array2<f64>>,
}

impl Grads {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn accumulate(&mut self, name: &str, grad: &Array2<f64>) {
        match self.map.get_mut(name) {
            Some(existing) => *existing += grad,
            None => {
                self.map.insert(name.to_string(), grad.clone());
            }
        }
    }

    pub fn add_all(&mut self, other: &Grads) {
        for (name, grad) in &other.map {
            self.accumulate(name, grad);
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for grad in self.map.values_mut() {
            grad.mapv_inplace(|v| v * factor);
        }
    }

    pub fn get(&self, name: &str) -> Option<&Array2<f64>> {
        self.map.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Array2<f64>)> {
        self.map.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.map
            .values()
            .flat_map(|g| g.iter())
            .fold(0.0, |acc, v| acc.max(v.abs()))
    }
}
