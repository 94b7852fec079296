pub mod alpha;
pub mod error;
pub mod fell_bundle;
pub mod group;
pub mod io;
pub mod lab;
pub mod linalg;
pub mod positive_type;
pub mod ucond;

pub use error::{Error, Result};
