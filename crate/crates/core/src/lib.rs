//! Numerical laboratory for Lorentz-Zygmund (Orlicz), Grand Lebesgue and
//! Grand Zygmund norms of functions on the unit interval with Lebesgue
//! measure, together with checkers for the embedding inequalities, tail
//! estimates and sharp constants that relate them.
//!
//! Every random variable is represented by a function on `(0, 1)`; see
//! [`function_model::FunctionModel`].

pub mod corpus;
pub mod embeddings;
pub mod error;
pub mod expr;
pub mod function_model;
pub mod grand_spaces;
pub mod numerics;
pub mod orlicz;
pub mod par;
pub mod report;
pub mod tail_lab;

pub use error::{Error, Result};
pub use function_model::{FunctionModel, Sample, TailFunction};
pub use numerics::{QuadratureResult, Tolerances};
pub use orlicz::YoungOrlicz;
pub use report::{Verdict, VerificationReport};
