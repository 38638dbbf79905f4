//! Fun: a first-order probabilistic functional language with exact
//! enumeration, measure-transformer, imperative and factor-graph backends,
//! and a likelihood-weighting sampler for continuous models.

pub mod ast;
pub mod cli;
pub mod compiler;
pub mod enumerator;
pub mod error;
pub mod factorgraph;
pub mod frontend;
pub mod fun_sem;
pub mod imp;
pub mod measure;
pub mod ops;
pub mod sampler;
pub mod typesys;
pub mod value;

pub use error::{Error, Result};
