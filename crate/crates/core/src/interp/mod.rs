//! Reference interpreter over the typed IR.

mod eval;
pub mod linalg;
pub mod quad;
mod value;

pub use eval::{call_builtin, evaluate, fit, EvalResult};
pub use value::{DenseMat, SparseMat, Value};
