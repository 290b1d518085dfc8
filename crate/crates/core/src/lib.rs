pub mod algebra;
pub mod catalog;
pub mod codim;
pub mod definition;
pub mod error;
pub mod exponents;
pub mod field;
pub mod grassmann;
pub mod linalg;
pub mod poly;
pub mod witnesses;

pub use error::{Error, Result};
