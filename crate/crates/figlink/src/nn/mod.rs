//! Minimal trainable tensor stack: autodiff graph, transformer blocks,
//! AdamW, and gradient verification.

mod adamw;
mod gradcheck;
mod graph;
mod params;
mod transformer;

pub use adamw::AdamW;
pub use gradcheck::{max_relative_error, DEFAULT_STEP};
pub use graph::{Graph, NodeId};
pub use params::{Grads, ParamSet};
pub use transformer::{init_transformer, transformer_stack, TransformerCfg, INIT_SIGMA};
