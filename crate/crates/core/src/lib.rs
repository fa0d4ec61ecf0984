pub mod backbone;
pub mod bench;
pub mod error;
pub mod format;
pub mod harness;
pub mod lab;
pub mod scheme;

pub use error::{KaseError, Result};
