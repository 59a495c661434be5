//! Poisoning-attack laboratory for two-tower collaborative-filtering
//! recommenders.
//!
//! The crate implements matrix-factorization recommenders trained with
//! BCE/BPR losses, gradient passing (GP) — a technique that propagates
//! gradients along interacted user-item edges during backpropagation to
//! accelerate surrogate retraining — fake-user attack generators built
//! around it, and an evaluation harness (HR@k, Recall@k, Jaccard top-k,
//! gradient-similarity analysis).

pub mod attack;
pub mod data;
pub mod error;
pub mod eval;
pub mod gpengine;
pub mod recmodel;
pub mod seeds;
pub mod synthetic;

pub use error::{Error, Result};
