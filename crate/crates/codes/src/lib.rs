//! Code constructions for source coding with decoder actions: LDGM action
//! and source codes encoded by message passing, enumerable codebooks with
//! binning, and the multiplexing pipeline that ties them together.

pub mod binning;
pub mod error;
pub mod ldgm;
pub mod multiplex;

pub use error::{CodeError, Result};
