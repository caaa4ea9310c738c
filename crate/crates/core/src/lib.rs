pub mod error;
pub mod linalg;
pub mod qstate;
pub mod seqmeas;
pub mod bounds;
pub mod classical;
pub mod tightness;
pub mod harness;

#[cfg(test)]
mod testkit;
