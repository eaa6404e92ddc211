pub mod corpus;
pub mod discourse;
pub mod embeddings;
pub mod error;
pub mod experiments;
pub mod features;
pub mod lexicons;
pub mod ml;
pub mod textproc;
pub mod synth;
pub mod treebank;

pub use error::{Error, Result};
