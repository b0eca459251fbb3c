//! Continuous 2-frieze patterns and SL₃-tilings built from closed projective
//! curves, with numerical checks of the identities they satisfy.

pub mod cli;
pub mod curves;
pub mod discrete;
pub mod error;
pub mod frieze2;
pub mod jet;
pub mod linalg;
pub mod projective;
pub mod reduction;
pub mod symplectic;

pub use error::{Error, Result};
