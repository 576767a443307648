pub mod cli;
pub mod error;
pub mod estimation;
pub mod evaluate;
pub mod oracle;
pub mod pwq;
pub mod simulate;
pub mod solver;

pub use error::{Error, Result};
