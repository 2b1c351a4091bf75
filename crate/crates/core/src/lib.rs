pub mod error;
pub mod fit;
pub mod formula;
pub mod mcmc;
pub mod net;
pub mod operators;
pub mod space;
pub mod terms;

pub use error::{ErgmError, Result};
