//! Instance generation, fuzz campaigns, tightness sweeps and the acceptance
//! criteria shared by the CLI and the test suite.

pub mod criteria;
pub mod fuzz;
pub mod gen;
pub mod sweep;
