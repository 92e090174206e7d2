pub mod distributions;
pub mod engine;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod mosaic;
pub mod tables;

pub use error::{Error, Result};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
mod book_introduction {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/tables.md")]
mod book_tables {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/tests.md")]
mod book_tests {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/distributions.md")]
mod book_distributions {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/linear-algebra.md")]
mod book_linear_algebra {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/verification.md")]
mod book_verification {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/mosaic.md")]
mod book_mosaic {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book_cli {}
