// `!(x > 0.0)` is used on purpose so NaN lands on the rejecting side.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod causal;
pub mod corpus;
pub mod driver;
pub mod error;
pub mod evaluation;
pub mod infotheory;
pub mod minilang;
pub mod selection;
pub mod spectrum;

pub use error::{Error, Result};
