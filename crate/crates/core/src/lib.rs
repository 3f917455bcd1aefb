//! Cleaning, normalization, seeded perturbation, unigram subword tokenization,
//! masked-LM data generation, span-label remapping and evaluation metrics for
//! Vietnamese social-media text.
//!
//! The numeric core (tokenizer lattice, metrics, significance tests) is generic
//! over the scalar type via [`scalar::Scalar`]; the aliases at the crate root
//! fix `f64`, which is what the CLI and the file formats use.

pub mod corpus;
pub mod diacritics;
pub mod emoji;
pub mod error;
pub mod masking;
pub mod metrics;
pub mod normalize;
pub mod pipeline;
pub mod scalar;
pub mod seeding;
pub mod span;
pub mod unigram;

pub use error::{Error, Result};

/// Default-precision unigram vocabulary.
pub type UnigramVocab = unigram::UnigramVocab<f64>;
/// Default-precision classification/span report.
pub type EvalReport = metrics::EvalReport<f64>;
/// Default-precision paired t-test result.
pub type PairedTestResult = metrics::PairedTestResult<f64>;
