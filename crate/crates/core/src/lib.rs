pub mod analysis;
pub mod bounds;
pub mod cli;
pub mod construct;
pub mod error;
pub mod fixtures;
pub mod graph;
pub mod linalg;
pub mod rational;
pub mod scheme;
pub mod verify;

pub use error::{Error, Result};
