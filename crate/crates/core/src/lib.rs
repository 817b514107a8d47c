pub mod error;
pub mod identities;
pub mod noncomm;
pub mod numkernel;
pub mod operators;
pub mod pqcore;
pub mod series;

pub use error::{Error, Result};
pub use numkernel::{approx_equal, Scalar, ToleranceSpec, TruncationPolicy};
