//! Scheme evaluation and the end-to-end scenarios.

pub mod msb;
pub mod report;
pub mod scenarios;
pub mod scheme;

pub use msb::*;
pub use report::*;
pub use scenarios::*;
pub use scheme::*;
