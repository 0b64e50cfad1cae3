//! AdamW: adaptive moments with decoupled weight decay.

use std::collections::BTreeMap;

use ndarray::Array2;

use crate::nn::params::{Grads, ParamSet};

#[derive(Debug, Clone)]
pub struct AdamW {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    step: usize,
    m: BTreeMap<String, Array2<f64>>,
    v: BTreeMap<String, Array2<f64>>,
}

impl AdamW {
    pub fn new(lr: f64, weight_decay: f64) -> Self {
        AdamW {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay,
            step: 0,
            m: BTreeMap::new(),
            v: BTreeMap::new(),
        }
    }

    pub fn step_count(&self) -> usize {
        self.step
    }

    /// Norm layers and biases are exempt from decay.
    fn decays(name: &str) -> bool {
        !(name.ends_with(".b") || name.ends_with(".gamma") || name.ends_with(".beta"))
    }

    /// Applies one update; `lr_scale` multiplies the base rate (warmup).
    pub fn step(&mut self, params: &mut ParamSet, grads: &Grads, lr_scale: f64) {
        self.step += 1;
        let lr = self.lr * lr_scale;
        let bc1 = 1.0 - self.beta1.powi(self.step as i32);
        let bc2 = 1.0 - self.beta2.powi(self.step as i32);

        let names: Vec<String> = params.names().map(String::from).collect();
        for name in names {
            let Some(grad) = grads.get(&name) else {
                continue;
            };
            let m = self
                .m
                .entry(name.clone())
                .or_insert_with(|| Array2::zeros(grad.dim()));
            let v = self
                .v
                .entry(name.clone())
                .or_insert_with(|| Array2::zeros(grad.dim()));
            ndarray::Zip::from(&mut *m).and(grad).for_each(|m, &g| {
                *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            });
            ndarray::Zip::from(&mut *v).and(grad).for_each(|v, &g| {
                *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            });
            let tensor = params.get_mut(&name);
            if self.weight_decay > 0.0 && Self::decays(&name) {
                tensor.mapv_inplace(|p| p - lr * self.weight_decay * p);
            }
            ndarray::Zip::from(tensor)
                .and(&*m)
                .and(&*v)
                .for_each(|p, &m, &v| {
                    let mhat = m / bc1;
                    let vhat = v / bc2;
                    *p -= lr * mhat / (vhat.sqrt() + self.eps);
                });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn converges_on_a_quadratic() {
        // minimize (p - 3)^2 elementwise
        let mut ps = ParamSet::new();
        ps.init_zeros("p", 1, 4);
        let mut opt = AdamW::new(0.1, 0.0);
        for _ in 0..400 {
            let grad = ps.get("p").mapv(|p| 2.0 * (p - 3.0));
            let mut grads = Grads::new();
            grads.accumulate("p", &grad);
            opt.step(&mut ps, &grads, 1.0);
        }
        for v in ps.get("p").iter() {
            assert!((v - 3.0).abs() < 1e-2, "got {v}");
        }
    }

    #[test]
    fn weight_decay_shrinks_untouched_directions() {
        let mut ps = ParamSet::new();
        ps.init_ones("w.w", 1, 1);
        let mut opt = AdamW::new(0.01, 0.5);
        let mut grads = Grads::new();
        grads.accumulate("w.w", &Array2::zeros((1, 1)));
        let before = ps.get("w.w")[(0, 0)];
        opt.step(&mut ps, &grads, 1.0);
        assert!(ps.get("w.w")[(0, 0)] < before);
    }
}
