//! Library side of the `shadowtail` command: input parsing, the fitting
//! pipeline, the JSON report and the subcommands.

pub mod args;
pub mod commands;
pub mod input;
pub mod pipeline;
pub mod report;
