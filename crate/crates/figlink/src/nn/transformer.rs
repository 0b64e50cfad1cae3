//! Pre-norm transformer encoder blocks built on the autodiff graph.

use rand_chacha::ChaCha8Rng;

use crate::nn::graph::{Graph, NodeId};
use crate::nn::params::ParamSet;

pub const INIT_SIGMA: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransformerCfg {
    pub dim: usize,
    pub heads: usize,
    pub depth: usize,
    /// feed-forward width multiplier (hidden = ff_mult * dim)
    pub ff_mult: usize,
}

impl TransformerCfg {
    pub fn new(dim: usize, heads: usize, depth: usize) -> Self {
        assert!(dim % heads == 0, "dim {dim} not divisible by heads {heads}");
        TransformerCfg {
            dim,
            heads,
            depth,
            ff_mult: 4,
        }
    }
}

fn init_linear(ps: &mut ParamSet, name: &str, d_in: usize, d_out: usize, rng: &mut ChaCha8Rng) {
    ps.init_gaussian(format!("{name}.w"), d_in, d_out, INIT_SIGMA, rng);
    ps.init_zeros(format!("{name}.b"), 1, d_out);
}

fn init_layer_norm(ps: &mut ParamSet, name: &str, dim: usize) {
    ps.init_ones(format!("{name}.gamma"), 1, dim);
    ps.init_zeros(format!("{name}.beta"), 1, dim);
}

/// Registers all tensors of a `depth`-layer encoder stack under `prefix`.
pub fn init_transformer(
    ps: &mut ParamSet,
    prefix: &str,
    cfg: TransformerCfg,
    rng: &mut ChaCha8Rng,
) {
    let d = cfg.dim;
    for layer in 0..cfg.depth {
        let base = format!("{prefix}.{layer}");
        init_layer_norm(ps, &format!("{base}.ln1"), d);
        for proj in ["wq", "wk", "wv", "wo"] {
            init_linear(ps, &format!("{base}.attn.{proj}"), d, d, rng);
        }
        init_layer_norm(ps, &format!("{base}.ln2"), d);
        init_linear(ps, &format!("{base}.ff1"), d, cfg.ff_mult * d, rng);
        init_linear(ps, &format!("{base}.ff2"), cfg.ff_mult * d, d, rng);
    }
    if cfg.depth > 0 {
        init_layer_norm(ps, &format!("{prefix}.final"), d);
    }
}

fn layer_norm(g: &mut Graph, name: &str, x: NodeId) -> NodeId {
    let gamma = g.param(&format!("{name}.gamma"));
    let beta = g.param(&format!("{name}.beta"));
    g.layer_norm_rows(x, gamma, beta)
}

fn multi_head_attention(g: &mut Graph, base: &str, cfg: TransformerCfg, x: NodeId) -> NodeId {
    let q = g.linear(&format!("{base}.attn.wq"), x);
    let k = g.linear(&format!("{base}.attn.wk"), x);
    let v = g.linear(&format!("{base}.attn.wv"), x);
    let dh = cfg.dim / cfg.heads;
    let scale = 1.0 / (dh as f64).sqrt();
    let mut heads = Vec::with_capacity(cfg.heads);
    for h in 0..cfg.heads {
        let qh = g.slice_cols(q, h * dh, dh);
        let kh = g.slice_cols(k, h * dh, dh);
        let vh = g.slice_cols(v, h * dh, dh);
        let kt = g.transpose(kh);
        let scores = g.matmul(qh, kt);
        let scaled = g.scale(scores, scale);
        let weights = g.softmax_rows(scaled);
        heads.push(g.matmul(weights, vh));
    }
    let merged = g.concat_cols(&heads);
    g.linear(&format!("{base}.attn.wo"), merged)
}

fn feed_forward(g: &mut Graph, base: &str, x: NodeId) -> NodeId {
    let h = g.linear(&format!("{base}.ff1"), x);
    let h = g.relu(h);
    g.linear(&format!("{base}.ff2"), h)
}

/// Full-attention encoder stack over an NxD sequence. Depth 0 is the
/// identity (no final norm), so callers can collapse the stack exactly.
pub fn transformer_stack(
    g: &mut Graph,
    prefix: &str,
    cfg: TransformerCfg,
    mut x: NodeId,
) -> NodeId {
    for layer in 0..cfg.depth {
        let base = format!("{prefix}.{layer}");
        let normed = layer_norm(g, &format!("{base}.ln1"), x);
        let attn = multi_head_attention(g, &base, cfg, normed);
        x = g.add(x, attn);
        let normed = layer_norm(g, &format!("{base}.ln2"), x);
        let ff = feed_forward(g, &base, normed);
        x = g.add(x, ff);
    }
    if cfg.depth > 0 {
        x = layer_norm(g, &format!("{prefix}.final"), x);
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::SeedableRng;

    #[test]
    fn stack_preserves_shape_and_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cfg = TransformerCfg::new(16, 4, 2);
        let mut ps = ParamSet::new();
        init_transformer(&mut ps, "enc", cfg, &mut rng);

        let input = Array2::from_shape_fn((5, 16), |(r, c)| ((r * 17 + c) as f64).sin());
        let run = |ps: &ParamSet| {
            let mut g = Graph::new(ps);
            let x = g.constant(input.clone());
            let y = transformer_stack(&mut g, "enc", cfg, x);
            g.value(y).clone()
        };
        let a = run(&ps);
        let b = run(&ps);
        assert_eq!(a.dim(), (5, 16));
        assert_eq!(a, b);
    }

    #[test]
    fn depth_zero_is_identity() {
        let cfg = TransformerCfg::new(8, 2, 0);
        let ps = ParamSet::new();
        let input = Array2::from_shape_fn((3, 8), |(r, c)| (r + c) as f64);
        let mut g = Graph::new(&ps);
        let x = g.constant(input.clone());
        let y = transformer_stack(&mut g, "enc", cfg, x);
        assert_eq!(g.value(y), &input);
    }

    #[test]
    fn every_parameter_receives_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let cfg = TransformerCfg::new(8, 2, 1);
        let mut ps = ParamSet::new();
        init_transformer(&mut ps, "enc", cfg, &mut rng);

        let input = Array2::from_shape_fn((4, 8), |(r, c)| ((r * 3 + c) as f64).cos());
        let mut g = Graph::new(&ps);
        let x = g.constant(input);
        let y = transformer_stack(&mut g, "enc", cfg, x);
        let a = g.slice_rows(y, 0, 1);
        let b = g.slice_rows(y, 2, 1);
        let loss = g.row_cosine(a, b);
        let grads = g.backward(loss);
        for name in ps.names() {
            let grad = grads.get(name).expect(name);
            assert!(
                grad.iter().any(|v| *v != 0.0),
                "parameter {name} got a zero gradient"
            );
        }
    }
}
