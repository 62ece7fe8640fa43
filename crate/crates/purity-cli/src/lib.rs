//! Report builders behind the `purity` binary: every subcommand produces a
//! [`report::RunReport`] whose serialized bytes are identical across reruns
//! with the same input, seed and flags.

pub mod report;
