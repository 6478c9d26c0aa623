//! Deterministic desk-scale simulator for fleet-trained sequence models on
//! ephemeral streaming data.
//!
//! The pipeline: a synthetic drifting utterance world ([`world`]) streams
//! token-labeled feature sequences month by month; a pretrained teacher model
//! pseudo-labels each round's pool and a confidence-binned subset is selected
//! ([`selection`]); fleet workers train local copies of the student model with
//! gradient accumulation ([`worker`]); the orchestrator averages worker
//! weights, gates the result on a held-out eval set, reverts regressions and
//! purges consumed data from the ephemeral store ([`orchestrator`],
//! [`store`]). [`metrics`] scores everything with edit-distance WER, and
//! [`experiments`] packages the standard scenarios behind a config file.
//!
//! All randomness flows from explicit seeds; reruns are byte-identical.
//! With the default `parallel` feature the per-round worker fan-out and
//! corpus scoring run on rayon; disabling it yields a sequential build with
//! identical results.

pub mod config;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod metrics;
pub mod model;
pub mod orchestrator;
pub mod report;
pub mod seeding;
pub mod selection;
pub mod store;
pub mod worker;
pub mod world;

pub use error::{Error, Result};
