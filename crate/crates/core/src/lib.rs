//! Corpus-level measurement of explicit and implicit bias.
//!
//! Statements that mention a *concept* word together with an *attribute*
//! word carry explicit attitudes; statements that mention an *exemplar* word
//! with an attribute word carry implicit ones. Scoring the sentiment of both
//! collections gives two bias values per concept pair, and a within-side
//! permutation test decides whether they differ. The [`weat`] module adds the
//! embedding-association statistics, including a run on a corpus with every
//! explicit statement removed.
//!
//! Pipeline, bottom-up:
//!
//! - [`lexicon`]: concept / exemplar / attribute word sets
//! - [`corpus`]: ingestion, sentence segmentation, tokenization
//! - [`extract`]: labelling each sentence and building the four collections
//! - [`sentiment`]: {-1, 0, +1} scoring, built-in or via an external adapter
//! - [`biasmeter`]: explicit/implicit bias and their significance
//! - [`weat`]: WEAT statistics, embedding IO and a PPMI-SVD trainer
//! - [`temporal`]: month-by-month evolution and stability
//! - [`robustness`]: consistency of conclusions under procedural changes
//! - [`report`]: run manifests, atomic writes, summary tables

pub mod biasmeter;
pub mod corpus;
mod error;
pub mod extract;
pub mod lexicon;
pub mod report;
pub mod rng;
pub mod robustness;
pub mod sentiment;
pub mod synth;
pub mod temporal;
pub mod weat;

pub use error::{Error, Result};
