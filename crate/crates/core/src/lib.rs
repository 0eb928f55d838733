//! Geometry of contextual word-embedding clouds.
//!
//! The crate measures how much space the contextual embeddings of a word
//! occupy (minimum enclosing balls, pairwise spread), how linearly
//! separable words and contexts are (one-vs-rest logistic probes), and how
//! cosine similarity drifts away from human similarity judgements as those
//! clouds grow. Geographic analyses over country and city names reuse the
//! same machinery.
//!
//! Data-parallel loops (per cohort, per pair, per class) run on rayon when
//! the default `parallel` feature is enabled and fall back to plain
//! iterators otherwise. Results are identical either way: every random draw
//! is keyed by an explicit seed and reductions happen in input order.

pub mod distortion;
pub mod error;
pub mod exec;
pub mod geo;
pub mod geometry;
pub mod io;
pub mod lexicon;
pub mod pipeline;
pub mod point;
pub mod probes;
pub mod seed;
pub mod stats;
pub mod synth;
pub mod theory;

pub use error::{Error, Result};
pub use geometry::{Ball, SiblingCohort};
pub use point::Point;
