//! Loan-portfolio selection with and without limited liability.
//!
//! The crate builds four decision models over a loan book: maximize expected
//! return under a risk cap, or minimize risk under a return floor, each with
//! the bank's payoff taken either in full or truncated at zero (limited
//! liability). Capital must cover both a leverage-ratio floor and the IRB
//! requirement. Problems are solved with a multistart augmented-Lagrangian
//! method and can be cross-checked against an exhaustive grid oracle.

pub mod error;
pub mod numerics;
pub mod portfolio;
pub mod problems;
pub mod report;
pub mod solver;

pub use error::{Error, Result};
