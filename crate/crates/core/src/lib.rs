//! Certified simultaneous Diophantine approximation under alternative
//! height functions.

pub mod cf;
pub mod error;
pub mod experiments;
pub mod exponents;
pub mod heights;
pub mod numerics;
pub mod search;

pub use error::{Error, Result};
