//! Conjunctive-query fitting over labeled data examples.
//!
//! - [`model`]: schemas, instances, examples, CQs and their canonical
//!   translations; path examples.
//! - [`text`]: the line-oriented file formats.
//! - [`hom`]: the homomorphism solver and query evaluation, containment
//!   and fit checks.
//! - [`product`]: direct products and most-specific fittings.
//! - [`duality`]: polynomial homomorphism dualities for path examples and
//!   a probe-based duality verifier.
//! - [`pac`]: finite distributions, exact errors and the experiment
//!   harness for extremal fitting algorithms.
//! - [`cli`]: the `cqfit` command line.
//!
//! Runnable walkthroughs live in this crate's `examples/` directory.

pub mod cli;
pub mod duality;
pub mod error;
pub mod hom;
pub mod model;
pub mod pac;
pub mod product;
pub mod text;

pub use error::{Error, Result};
pub use hom::{Homomorphism, Solver, Target};
pub use model::{
    as_path_example, canonical_cq, canonical_example, canonical_instance, Cq, Example, Fact,
    Instance, LabeledCollection, PathExample, Rel, Schema, Value,
};
