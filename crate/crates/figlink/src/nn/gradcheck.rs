//! Central finite-difference gradient verification.

use crate::nn::params::{Grads, ParamSet};

pub const DEFAULT_STEP: f64 = 1e-5;

/// Largest relative error between analytic and finite-difference gradients
/// over every coordinate of every parameter.
///
/// `eval` must return the scalar objective for the given parameters.
pub fn max_relative_error<F>(params: &mut ParamSet, analytic: &Grads, eval: F, h: f64) -> f64
where
    F: Fn(&ParamSet) -> f64,
{
    let mut worst: f64 = 0.0;
    let names: Vec<String> = params.names().map(String::from).collect();
    for name in names {
        let (rows, cols) = params.get(&name).dim();
        for r in 0..rows {
            for c in 0..cols {
                let orig = params.get(&name)[(r, c)];
                params.get_mut(&name)[(r, c)] = orig + h;
                let up = eval(params);
                params.get_mut(&name)[(r, c)] = orig - h;
                let down = eval(params);
                params.get_mut(&name)[(r, c)] = orig;
                let fd = (up - down) / (2.0 * h);
                let an = analytic.get(&name).map(|g| g[(r, c)]).unwrap_or(0.0);
                let denom = fd.abs().max(an.abs());
                let err = if denom < 1e-7 {
                    (fd - an).abs()
                } else {
                    (fd - an).abs() / denom
                };
                worst = worst.max(err);
            }
        }
    }
    worst
}
