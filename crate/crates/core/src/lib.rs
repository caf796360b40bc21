pub mod arith;
pub mod error;
pub mod modular;
pub mod quad;
pub mod series;
pub mod special;
pub mod sums;
pub mod verify;

pub use error::{Error, Result};
