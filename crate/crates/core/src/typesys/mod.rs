//! Types, the Fun typing rules, and array unrolling.

mod check;
mod types;
mod unroll;

pub use check::{type_of, type_of_const, type_of_value, typecheck, TypeError};
pub use types::{op_result, op_signatures, BaseType, RangeId, Type, TypeEnv};
pub use unroll::{rename, unroll_arrays};
