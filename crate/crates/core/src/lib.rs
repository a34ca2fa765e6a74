//! Enhanced opposition differential evolution for multimodal optimization,
//! together with the CEC 2013 niching benchmark it is evaluated on.

pub mod adapt;
pub mod archive;
pub mod balance;
pub mod bench;
pub mod engine;
pub mod error;
pub mod harness;
pub mod localsearch;
pub mod niching;

pub use error::{EodeError, Result};
