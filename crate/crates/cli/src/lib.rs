//! Library surface of the command-line tool, exposed for integration tests.

pub mod report;
pub mod tables;
pub mod verify;
