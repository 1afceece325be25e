//! Workflow-pattern specification generator and temporal tableau prover.
//!
//! Requirements models are written as nested workflow-pattern expressions
//! (`Seq(a, Branch(b, c, d, e))`). Each pattern carries a fixed set of
//! temporal formula templates; [`specgen`] instantiates them across a model to
//! obtain a logical specification, and [`prover`] decides whether a property
//! follows from it. [`oracle`] evaluates formulas on explicit lasso traces and
//! cross-checks every answer the prover gives.

pub mod cli;
pub mod diag;
pub mod formula;
pub mod oracle;
pub mod pattern;
pub mod prover;
pub mod specgen;
pub mod workflow;
