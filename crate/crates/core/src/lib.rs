pub mod crossing;
pub mod eigensolve;
pub mod entangle;
pub mod error;
pub mod io;
pub mod model;
pub mod scan;

pub use error::{Error, Result};
