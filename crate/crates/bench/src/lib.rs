//! Benchmark harness: runs a suite of AIGER instances against a solver
//! binary in isolated child processes, gates every solved run through the
//! independent certificate/witness checks, and aggregates PAR2 and
//! solved/timeout statistics into a versioned metrics document.

pub mod report;
pub mod run;

pub use report::{aggregate, par2, BenchReport, BucketStats, GateOutcome, RunRecord, RunVerdict};
pub use run::{run_suite, SolverCmd, SuiteConfig, TimingMode};
