//! The neural typer: a bi-LSTM context encoder with attention, a char-CNN plus
//! word-attention mention encoder, and one sigmoid output per label.
//!
//! Gradients come from the small tape in [`tape`]; training, checkpointing and
//! a finite-difference checker build on it.

pub mod chars;
pub mod checkpoint;
mod config;
pub mod gradcheck;
mod network;
mod params;
pub mod tape;
mod tensor;
mod train;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, Checkpoint};
pub use config::{ModelConfig, THRESHOLD};
pub use network::{
    bin_mask, decode, loss, predict, target_vector, Encoding, InputOptions, Inputs, Instance, Model, Prediction,
};
pub use params::{AttentionParams, ConvFilter, LstmParams, ModelParams};
pub use tensor::Tensor;
pub use train::{clip_global_norm, train, BalancedSampler, IterationReport, LogEntry, TrainLog};
