pub mod certify;
pub mod continuous;
pub mod error;
pub mod group;
pub mod interval;
pub mod rational;
pub mod series;
pub mod sigma;
pub mod value;
pub mod weights;

pub use error::{Error, Result};
