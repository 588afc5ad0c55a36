//! Timestamped stack, recorded histories and an axiomatic checker for
//! them.

pub mod checker;
pub mod harness;
pub mod history;
pub mod linearize;
pub mod oracle;
pub mod relations;
pub mod stamp;
pub mod tstack;
