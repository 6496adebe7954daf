pub mod biclustering;
pub mod cli;
pub mod datagen;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod l1nmf;
pub mod pipeline;
pub mod sampling;
pub mod sketch;
pub mod validation;

pub use error::{Error, Result};
