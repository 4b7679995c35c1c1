//! Predicting student grades and learning strategies from motivational and
//! self-regulation questionnaire scores.
//!
//! The crate covers loading and synthesizing the student table, five model
//! families (random forest, linear/logistic regression, SVM, decision tree,
//! k-nearest neighbours), metrics with cross-validation, and an experiment
//! runner that produces reproducible JSON or CSV reports.

pub mod data;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod knn;
pub mod linear;
pub mod matrix;
pub mod model;
pub mod seed;
pub mod svm;
pub mod tree;

pub use error::{Error, ErrorKind, Result};
pub use matrix::{Matrix, Standardizer};
