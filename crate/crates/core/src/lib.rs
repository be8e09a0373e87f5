pub mod cli;
pub mod data;
pub mod error;
pub mod oracle;
pub mod perm;
pub mod plot;
pub mod report;
pub mod rng;
pub mod runner;
pub mod simulate;
pub mod stats;
pub mod summarize;
