//! Suites, fixtures and reports behind the `dendron` binary.

pub mod bounds;
pub mod fixtures;
pub mod report;
pub mod suites;

pub use bounds::Bounds;
pub use fixtures::Fixtures;
pub use report::{CheckResult, VerificationReport};
pub use suites::{run_suite, SuiteError, SUITES};
