pub mod catalog;
pub mod cli;
pub mod comparison;
pub mod error;
pub mod flow;
pub mod model;
pub mod monotone;
pub mod numerics;
pub mod profiles;
pub mod spectral;
pub mod table;

pub use error::{Error, Result};
