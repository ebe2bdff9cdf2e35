//! Test-corpus tooling: circuit generators and an explicit-state BFS
//! reachability oracle, independent of the SAT-based checking path.

pub mod corpus;
pub mod gen;
pub mod oracle;

pub use corpus::{write_corpus, Instance};
pub use oracle::{bfs_reachability, OracleVerdict};
