//! Statistical verdicts and the acceptance suites built on them.

pub mod suites;
pub mod summary;
pub mod verdict;
