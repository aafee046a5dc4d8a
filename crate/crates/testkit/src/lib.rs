//! Independent reference computations for tests.
//!
//! Nothing here shares code with the library crates: instances are plain
//! nested vectors and every quantity is evaluated by the most direct formula
//! available, so agreement with the solver is meaningful.

pub mod brute;
pub mod closed_form;
pub mod info;
pub mod wz;

pub use brute::{random_instance, BruteResult, Instance};
