//! Entity typing with a large vocabulary of free-form noun-phrase types.
//!
//! The crate is organised along the pipeline:
//!
//! - [`corpus`]: CoNLL-U, example JSONL and embedding readers, plus dataset statistics.
//! - [`typespace`]: label normalisation, the granularity-binned type vocabulary and the
//!   mapping to path-style ontologies.
//! - [`supervision`]: distant supervision mined from dependency parses (head words,
//!   definition sentences) and the conservative entity-linking filter.
//! - [`model`]: the neural typer (bi-LSTM context encoder, char-CNN + attention mention
//!   encoder, sigmoid label head), its reverse-mode gradients, trainer and checkpoints.
//! - [`eval`]: macro/micro P-R-F1, strict accuracy, MRR and per-granularity reports.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod model;
pub mod supervision;
pub mod typespace;

pub use error::{Error, Result};
