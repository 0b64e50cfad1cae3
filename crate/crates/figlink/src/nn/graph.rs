//! Reverse-mode autodiff over 2-D f64 tensors.
//!
//! A [`Graph`] is a tape of operations built per forward pass. Nodes are
//! appended in topological order, so backpropagation is a single reverse
//! sweep. Scalars are 1x1 tensors.

use ndarray::{s, Array2, Axis};

use crate::nn::params::{Grads, ParamSet};

pub type NodeId = usize;

#[derive(Debug, Clone)]
enum Op {
    Const,
    Param { name: String },
    ParamRow { name: String, row: usize },
    MatMul { a: NodeId, b: NodeId },
    Transpose { a: NodeId },
    Add { a: NodeId, b: NodeId },
    AddRow { a: NodeId, row: NodeId },
    Affine { a: NodeId, mul: f64, add: f64 },
    Relu { a: NodeId },
    Exp { a: NodeId },
    Ln { a: NodeId },
    DivElem { a: NodeId, b: NodeId },
    Sigmoid { a: NodeId },
    SoftmaxRows { a: NodeId },
    LayerNormRows { x: NodeId, gamma: NodeId, beta: NodeId },
    ConcatRows { parts: Vec<NodeId> },
    SliceRows { a: NodeId, start: usize, len: usize },
    ConcatCols { parts: Vec<NodeId> },
    SliceCols { a: NodeId, start: usize, len: usize },
    RowCosine { a: NodeId, b: NodeId },
    MaxScalars { parts: Vec<NodeId>, argmax: usize },
    MeanScalars { parts: Vec<NodeId> },
    SumScalars { parts: Vec<NodeId> },
}

struct Node {
    op: Op,
    value: Array2<f64>,
}

const LN_EPS: f64 = 1e-5;
const NORM_EPS: f64 = 1e-12;

pub struct Graph<'p> {
    params: &'p ParamSet,
    nodes: Vec<Node>,
}

impl<'p> Graph<'p> {
    pub fn new(params: &'p ParamSet) -> Self {
        Graph {
            params,
            nodes: Vec::new(),
        }
    }

    pub fn params(&self) -> &ParamSet {
        self.params
    }

    pub fn value(&self, id: NodeId) -> &Array2<f64> {
        &self.nodes[id].value
    }

    pub fn scalar(&self, id: NodeId) -> f64 {
        debug_assert_eq!(self.nodes[id].value.dim(), (1, 1));
        self.nodes[id].value[(0, 0)]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, op: Op, value: Array2<f64>) -> NodeId {
        self.nodes.push(Node { op, value });
        self.nodes.len() - 1
    }

    pub fn constant(&mut self, value: Array2<f64>) -> NodeId {
        self.push(Op::Const, value)
    }

    pub fn constant_row(&mut self, row: &[f64]) -> NodeId {
        let value = Array2::from_shape_vec((1, row.len()), row.to_vec()).unwrap();
        self.push(Op::Const, value)
    }

    pub fn scalar_const(&mut self, v: f64) -> NodeId {
        self.push(Op::Const, Array2::from_elem((1, 1), v))
    }

    pub fn param(&mut self, name: &str) -> NodeId {
        let value = self.params.get(name).clone();
        self.push(
            Op::Param {
                name: name.to_string(),
            },
            value,
        )
    }

    /// Embedding lookup: one row of a named table.
    pub fn param_row(&mut self, name: &str, row: usize) -> NodeId {
        let table = self.params.get(name);
        let value = table.slice(s![row..row + 1, ..]).to_owned();
        self.push(
            Op::ParamRow {
                name: name.to_string(),
                row,
            },
            value,
        )
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let value = self.nodes[a].value.dot(&self.nodes[b].value);
        self.push(Op::MatMul { a, b }, value)
    }

    pub fn transpose(&mut self, a: NodeId) -> NodeId {
        let value = self.nodes[a].value.t().to_owned();
        self.push(Op::Transpose { a }, value)
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let value = &self.nodes[a].value + &self.nodes[b].value;
        self.push(Op::Add { a, b }, value)
    }

    /// Broadcast-adds a 1xD row to every row of an NxD tensor.
    pub fn add_row(&mut self, a: NodeId, row: NodeId) -> NodeId {
        debug_assert_eq!(self.nodes[row].value.nrows(), 1);
        let value = &self.nodes[a].value + &self.nodes[row].value;
        self.push(Op::AddRow { a, row }, value)
    }

    pub fn affine(&mut self, a: NodeId, mul: f64, add: f64) -> NodeId {
        let value = self.nodes[a].value.mapv(|v| v * mul + add);
        self.push(Op::Affine { a, mul, add }, value)
    }

    pub fn scale(&mut self, a: NodeId, mul: f64) -> NodeId {
        self.affine(a, mul, 0.0)
    }

    pub fn neg(&mut self, a: NodeId) -> NodeId {
        self.affine(a, -1.0, 0.0)
    }

    pub fn relu(&mut self, a: NodeId) -> NodeId {
        let value = self.nodes[a].value.mapv(|v| v.max(0.0));
        self.push(Op::Relu { a }, value)
    }

    pub fn exp(&mut self, a: NodeId) -> NodeId {
        let value = self.nodes[a].value.mapv(f64::exp);
        self.push(Op::Exp { a }, value)
    }

    pub fn ln(&mut self, a: NodeId) -> NodeId {
        let value = self.nodes[a].value.mapv(f64::ln);
        self.push(Op::Ln { a }, value)
    }

    pub fn div_elem(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let value = &self.nodes[a].value / &self.nodes[b].value;
        self.push(Op::DivElem { a, b }, value)
    }

    pub fn sigmoid(&mut self, a: NodeId) -> NodeId {
        let value = self.nodes[a].value.mapv(|v| 1.0 / (1.0 + (-v).exp()));
        self.push(Op::Sigmoid { a }, value)
    }

    pub fn softmax_rows(&mut self, a: NodeId) -> NodeId {
        let mut value = self.nodes[a].value.clone();
        for mut row in value.rows_mut() {
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            row.mapv_inplace(|v| (v - max).exp());
            let sum: f64 = row.sum();
            row.mapv_inplace(|v| v / sum);
        }
        self.push(Op::SoftmaxRows { a }, value)
    }

    /// Per-row layer normalization over columns, with learned gain and bias
    /// (both 1xD).
    pub fn layer_norm_rows(&mut self, x: NodeId, gamma: NodeId, beta: NodeId) -> NodeId {
        let input = &self.nodes[x].value;
        let g = &self.nodes[gamma].value;
        let b = &self.nodes[beta].value;
        let d = input.ncols() as f64;
        let mut value = input.clone();
        for mut row in value.rows_mut() {
            let mean = row.sum() / d;
            let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / d;
            let inv = 1.0 / (var + LN_EPS).sqrt();
            for (j, v) in row.iter_mut().enumerate() {
                *v = (*v - mean) * inv * g[(0, j)] + b[(0, j)];
            }
        }
        self.push(Op::LayerNormRows { x, gamma, beta }, value)
    }

    pub fn concat_rows(&mut self, parts: &[NodeId]) -> NodeId {
        debug_assert!(!parts.is_empty());
        let cols = self.nodes[parts[0]].value.ncols();
        let total: usize = parts.iter().map(|&p| self.nodes[p].value.nrows()).sum();
        let mut value = Array2::zeros((total, cols));
        let mut at = 0;
        for &p in parts {
            let v = &self.nodes[p].value;
            value.slice_mut(s![at..at + v.nrows(), ..]).assign(v);
            at += v.nrows();
        }
        self.push(
            Op::ConcatRows {
                parts: parts.to_vec(),
            },
            value,
        )
    }

    pub fn slice_rows(&mut self, a: NodeId, start: usize, len: usize) -> NodeId {
        let value = self.nodes[a].value.slice(s![start..start + len, ..]).to_owned();
        self.push(Op::SliceRows { a, start, len }, value)
    }

    pub fn concat_cols(&mut self, parts: &[NodeId]) -> NodeId {
        debug_assert!(!parts.is_empty());
        let rows = self.nodes[parts[0]].value.nrows();
        let total: usize = parts.iter().map(|&p| self.nodes[p].value.ncols()).sum();
        let mut value = Array2::zeros((rows, total));
        let mut at = 0;
        for &p in parts {
            let v = &self.nodes[p].value;
            value.slice_mut(s![.., at..at + v.ncols()]).assign(v);
            at += v.ncols();
        }
        self.push(
            Op::ConcatCols {
                parts: parts.to_vec(),
            },
            value,
        )
    }

    pub fn slice_cols(&mut self, a: NodeId, start: usize, len: usize) -> NodeId {
        let value = self.nodes[a].value.slice(s![.., start..start + len]).to_owned();
        self.push(Op::SliceCols { a, start, len }, value)
    }

    /// Cosine similarity of two 1xD rows, as a 1x1 scalar.
    pub fn row_cosine(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let va = &self.nodes[a].value;
        let vb = &self.nodes[b].value;
        debug_assert_eq!(va.nrows(), 1);
        debug_assert_eq!(vb.nrows(), 1);
        let dot: f64 = va.iter().zip(vb.iter()).map(|(x, y)| x * y).sum();
        let na: f64 = va.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb: f64 = vb.iter().map(|x| x * x).sum::<f64>().sqrt();
        let denom = (na * nb).max(NORM_EPS);
        let value = Array2::from_elem((1, 1), dot / denom);
        self.push(Op::RowCosine { a, b }, value)
    }

    pub fn max_scalars(&mut self, parts: &[NodeId]) -> NodeId {
        debug_assert!(!parts.is_empty());
        let mut best = 0usize;
        let mut best_value = f64::NEG_INFINITY;
        for (i, &p) in parts.iter().enumerate() {
            let v = self.scalar(p);
            if v > best_value {
                best_value = v;
                best = i;
            }
        }
        self.push(
            Op::MaxScalars {
                parts: parts.to_vec(),
                argmax: best,
            },
            Array2::from_elem((1, 1), best_value),
        )
    }

    pub fn mean_scalars(&mut self, parts: &[NodeId]) -> NodeId {
        debug_assert!(!parts.is_empty());
        let sum: f64 = parts.iter().map(|&p| self.scalar(p)).sum();
        self.push(
            Op::MeanScalars {
                parts: parts.to_vec(),
            },
            Array2::from_elem((1, 1), sum / parts.len() as f64),
        )
    }

    pub fn sum_scalars(&mut self, parts: &[NodeId]) -> NodeId {
        debug_assert!(!parts.is_empty());
        let sum: f64 = parts.iter().map(|&p| self.scalar(p)).sum();
        self.push(
            Op::SumScalars {
                parts: parts.to_vec(),
            },
            Array2::from_elem((1, 1), sum),
        )
    }

    /// Linear layer y = x W + b over named parameters.
    pub fn linear(&mut self, prefix: &str, x: NodeId) -> NodeId {
        let w = self.param(&format!("{prefix}.w"));
        let b = self.param(&format!("{prefix}.b"));
        let xw = self.matmul(x, w);
        self.add_row(xw, b)
    }

    /// Backpropagates from a 1x1 seed node; returns parameter gradients.
    pub fn backward(&self, seed: NodeId) -> Grads {
        assert_eq!(
            self.nodes[seed].value.dim(),
            (1, 1),
            "backward seed must be a scalar node"
        );
        let mut node_grads: Vec<Option<Array2<f64>>> = vec![None; self.nodes.len()];
        node_grads[seed] = Some(Array2::from_elem((1, 1), 1.0));
        let mut out = Grads::new();

        for id in (0..=seed).rev() {
            let Some(grad) = node_grads[id].take() else {
                continue;
            };
            let add_to = |slot: &mut Option<Array2<f64>>, g: Array2<f64>| match slot {
                Some(existing) => *existing += &g,
                None => *slot = Some(g),
            };

            match &self.nodes[id].op {
                Op::Const => {}
                Op::Param { name } => out.accumulate(name, &grad),
                Op::ParamRow { name, row } => {
                    let table = self.params.get(name);
                    let mut full = Array2::zeros(table.dim());
                    full.slice_mut(s![*row..*row + 1, ..]).assign(&grad);
                    out.accumulate(name, &full);
                }
                Op::MatMul { a, b } => {
                    let ga = grad.dot(&self.nodes[*b].value.t());
                    let gb = self.nodes[*a].value.t().dot(&grad);
                    add_to(&mut node_grads[*a], ga);
                    add_to(&mut node_grads[*b], gb);
                }
                Op::Transpose { a } => {
                    add_to(&mut node_grads[*a], grad.t().to_owned());
                }
                Op::Add { a, b } => {
                    add_to(&mut node_grads[*a], grad.clone());
                    add_to(&mut node_grads[*b], grad);
                }
                Op::AddRow { a, row } => {
                    let row_grad = grad
                        .sum_axis(Axis(0))
                        .insert_axis(Axis(0));
                    add_to(&mut node_grads[*a], grad);
                    add_to(&mut node_grads[*row], row_grad);
                }
                Op::Affine { a, mul, .. } => {
                    add_to(&mut node_grads[*a], grad.mapv(|v| v * mul));
                }
                Op::Relu { a } => {
                    let mask = self.nodes[*a].value.mapv(|v| if v > 0.0 { 1.0 } else { 0.0 });
                    add_to(&mut node_grads[*a], &grad * &mask);
                }
                Op::Exp { a } => {
                    add_to(&mut node_grads[*a], &grad * &self.nodes[id].value);
                }
                Op::Ln { a } => {
                    let inv = self.nodes[*a].value.mapv(|v| 1.0 / v);
                    add_to(&mut node_grads[*a], &grad * &inv);
                }
                Op::DivElem { a, b } => {
                    let vb = &self.nodes[*b].value;
                    let ga = &grad / vb;
                    let gb = -&(&grad * &self.nodes[id].value) / vb;
                    add_to(&mut node_grads[*a], ga);
                    add_to(&mut node_grads[*b], gb);
                }
                Op::Sigmoid { a } => {
                    let y = &self.nodes[id].value;
                    let dy = y.mapv(|v| v * (1.0 - v));
                    add_to(&mut node_grads[*a], &grad * &dy);
                }
                Op::SoftmaxRows { a } => {
                    let y = &self.nodes[id].value;
                    let mut ga = Array2::zeros(y.dim());
                    for r in 0..y.nrows() {
                        let dot: f64 = (0..y.ncols()).map(|c| grad[(r, c)] * y[(r, c)]).sum();
                        for c in 0..y.ncols() {
                            ga[(r, c)] = y[(r, c)] * (grad[(r, c)] - dot);
                        }
                    }
                    add_to(&mut node_grads[*a], ga);
                }
                Op::LayerNormRows { x, gamma, beta } => {
                    let input = &self.nodes[*x].value;
                    let g = &self.nodes[*gamma].value;
                    let d = input.ncols();
                    let df = d as f64;
                    let mut gx = Array2::zeros(input.dim());
                    let mut ggamma = Array2::zeros((1, d));
                    let mut gbeta = Array2::zeros((1, d));
                    for r in 0..input.nrows() {
                        let row = input.row(r);
                        let mean = row.sum() / df;
                        let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / df;
                        let inv = 1.0 / (var + LN_EPS).sqrt();
                        let xhat: Vec<f64> = row.iter().map(|v| (v - mean) * inv).collect();
                        let gy: Vec<f64> =
                            (0..d).map(|c| grad[(r, c)] * g[(0, c)]).collect();
                        let mean_gy: f64 = gy.iter().sum::<f64>() / df;
                        let mean_gy_xhat: f64 =
                            gy.iter().zip(&xhat).map(|(a, b)| a * b).sum::<f64>() / df;
                        for c in 0..d {
                            gx[(r, c)] = inv * (gy[c] - mean_gy - xhat[c] * mean_gy_xhat);
                            ggamma[(0, c)] += grad[(r, c)] * xhat[c];
                            gbeta[(0, c)] += grad[(r, c)];
                        }
                    }
                    add_to(&mut node_grads[*x], gx);
                    add_to(&mut node_grads[*gamma], ggamma);
                    add_to(&mut node_grads[*beta], gbeta);
                }
                Op::ConcatRows { parts } => {
                    let mut at = 0;
                    for &p in parts {
                        let n = self.nodes[p].value.nrows();
                        let piece = grad.slice(s![at..at + n, ..]).to_owned();
                        add_to(&mut node_grads[p], piece);
                        at += n;
                    }
                }
                Op::SliceRows { a, start, len } => {
                    let mut full = Array2::zeros(self.nodes[*a].value.dim());
                    full.slice_mut(s![*start..*start + *len, ..]).assign(&grad);
                    add_to(&mut node_grads[*a], full);
                }
                Op::ConcatCols { parts } => {
                    let mut at = 0;
                    for &p in parts {
                        let n = self.nodes[p].value.ncols();
                        let piece = grad.slice(s![.., at..at + n]).to_owned();
                        add_to(&mut node_grads[p], piece);
                        at += n;
                    }
                }
                Op::SliceCols { a, start, len } => {
                    let mut full = Array2::zeros(self.nodes[*a].value.dim());
                    full.slice_mut(s![.., *start..*start + *len]).assign(&grad);
                    add_to(&mut node_grads[*a], full);
                }
                Op::RowCosine { a, b } => {
                    let va = &self.nodes[*a].value;
                    let vb = &self.nodes[*b].value;
                    let na = va.iter().map(|x| x * x).sum::<f64>().sqrt();
                    let nb = vb.iter().map(|x| x * x).sum::<f64>().sqrt();
                    let denom = (na * nb).max(NORM_EPS);
                    let cos = self.nodes[id].value[(0, 0)];
                    let g = grad[(0, 0)];
                    let ga = vb.mapv(|v| v / denom) - va.mapv(|v| cos * v / (na * na).max(NORM_EPS));
                    let gb = va.mapv(|v| v / denom) - vb.mapv(|v| cos * v / (nb * nb).max(NORM_EPS));
                    add_to(&mut node_grads[*a], ga.mapv(|v| v * g));
                    add_to(&mut node_grads[*b], gb.mapv(|v| v * g));
                }
                Op::MaxScalars { parts, argmax } => {
                    add_to(&mut node_grads[parts[*argmax]], grad);
                }
                Op::MeanScalars { parts } => {
                    let share = grad.mapv(|v| v / parts.len() as f64);
                    for &p in parts {
                        add_to(&mut node_grads[p], share.clone());
                    }
                }
                Op::SumScalars { parts } => {
                    for &p in parts {
                        add_to(&mut node_grads[p], grad.clone());
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rel_err(a: f64, b: f64) -> f64 {
        let denom = a.abs().max(b.abs());
        if denom < 1e-7 {
            (a - b).abs()
        } else {
            (a - b).abs() / denom
        }
    }

    /// Central-difference check of a scalar-valued builder against the tape.
    fn check_grads<F>(params: &mut ParamSet, build: F, tol: f64)
    where
        F: Fn(&mut Graph) -> NodeId,
    {
        let (loss_id, grads) = {
            let mut g = Graph::new(params);
            let id = build(&mut g);
            let grads = g.backward(id);
            (g.scalar(id), grads)
        };
        assert!(loss_id.is_finite());
        let h = 1e-6;
        let names: Vec<String> = params.names().map(String::from).collect();
        for name in names {
            let dim = params.get(&name).dim();
            for r in 0..dim.0 {
                for c in 0..dim.1 {
                    let orig = params.get(&name)[(r, c)];
                    params.get_mut(&name)[(r, c)] = orig + h;
                    let up = {
                        let mut g = Graph::new(params);
                        let id = build(&mut g);
                        g.scalar(id)
                    };
                    params.get_mut(&name)[(r, c)] = orig - h;
                    let down = {
                        let mut g = Graph::new(params);
                        let id = build(&mut g);
                        g.scalar(id)
                    };
                    params.get_mut(&name)[(r, c)] = orig;
                    let fd = (up - down) / (2.0 * h);
                    let an = grads.get(&name).map(|g| g[(r, c)]).unwrap_or(0.0);
                    assert!(
                        rel_err(fd, an) < tol,
                        "{name}[{r},{c}]: fd={fd} analytic={an}"
                    );
                }
            }
        }
    }

    fn seeded_params(shapes: &[(&str, usize, usize)], seed: u64) -> ParamSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ps = ParamSet::new();
        for (name, r, c) in shapes {
            ps.init_gaussian(*name, *r, *c, 0.5, &mut rng);
        }
        ps
    }

    #[test]
    fn matmul_linear_chain_grads() {
        let mut ps = seeded_params(&[("w", 4, 3), ("x", 2, 4), ("b", 1, 3)], 1);
        check_grads(
            &mut ps,
            |g| {
                let x = g.param("x");
                let w = g.param("w");
                let b = g.param("b");
                let y = g.matmul(x, w);
                let y = g.add_row(y, b);
                let y = g.relu(y);
                // reduce to scalar: sum of elementwise-squared via cosine trick
                let flat = g.slice_rows(y, 0, 1);
                let other = g.slice_rows(y, 1, 1);
                g.row_cosine(flat, other)
            },
            1e-5,
        );
    }

    #[test]
    fn softmax_and_layernorm_grads() {
        let mut ps = seeded_params(&[("x", 3, 5), ("gamma", 1, 5), ("beta", 1, 5)], 2);
        check_grads(
            &mut ps,
            |g| {
                let x = g.param("x");
                let gamma = g.param("gamma");
                let beta = g.param("beta");
                let n = g.layer_norm_rows(x, gamma, beta);
                let sm = g.softmax_rows(n);
                let a = g.slice_rows(sm, 0, 1);
                let b = g.slice_rows(sm, 2, 1);
                g.row_cosine(a, b)
            },
            1e-5,
        );
    }

    #[test]
    fn scalar_chain_grads() {
        let mut ps = seeded_params(&[("a", 1, 4), ("b", 1, 4), ("c", 1, 4)], 3);
        check_grads(
            &mut ps,
            |g| {
                let a = g.param("a");
                let b = g.param("b");
                let c = g.param("c");
                let s1 = g.row_cosine(a, b);
                let s2 = g.row_cosine(a, c);
                let s3 = g.row_cosine(b, c);
                let m = g.max_scalars(&[s1, s2]);
                let z = g.scale(m, 1.0 / 0.07);
                let e = g.exp(z);
                let z3 = g.scale(s3, 1.0 / 0.07);
                let e3 = g.exp(z3);
                let denom = g.sum_scalars(&[e, e3]);
                let ratio = g.div_elem(e, denom);
                let l = g.ln(ratio);
                g.neg(l)
            },
            1e-5,
        );
    }

    #[test]
    fn concat_slice_transpose_grads() {
        let mut ps = seeded_params(&[("x", 2, 3), ("y", 2, 3)], 4);
        check_grads(
            &mut ps,
            |g| {
                let x = g.param("x");
                let y = g.param("y");
                let cat = g.concat_rows(&[x, y]);
                let cols = g.concat_cols(&[x, y]);
                let t = g.transpose(cols);
                let tc = g.slice_cols(t, 0, 2);
                let a = g.slice_rows(cat, 1, 1);
                let b = g.slice_rows(tc, 3, 1);
                let part = g.slice_cols(a, 0, 2);
                let c1 = g.row_cosine(part, b);
                let sg = g.sigmoid(c1);
                let m = g.mean_scalars(&[sg, c1]);
                g.affine(m, 2.0, 0.25)
            },
            1e-5,
        );
    }

    #[test]
    fn param_row_lookup_accumulates_into_table() {
        let mut ps = seeded_params(&[("table", 4, 3), ("q", 1, 3)], 5);
        check_grads(
            &mut ps,
            |g| {
                let r0 = g.param_row("table", 0);
                let r2 = g.param_row("table", 2);
                let q = g.param("q");
                let s = g.add(r0, r2);
                g.row_cosine(s, q)
            },
            1e-5,
        );
    }
}
