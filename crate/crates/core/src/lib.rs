//! Hashtag classification for micro-text.
//!
//! The crate covers the whole offline pipeline: tweet ingestion and label
//! selection ([`corpus`]), deterministic text cleaning ([`cleaning`]), word
//! normalizers ([`normalize`]), character/word n-gram features with FC and
//! TF-IDF weighting ([`features`]), three learners ([`models`]) and the
//! experiment grid that compares them ([`eval`]).

pub mod cleaning;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod models;
pub mod normalize;
pub mod pipeline;
pub mod synthetic;

pub use error::{Error, Result};
