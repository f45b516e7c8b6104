//! File formats, the `gas-inar` command-line tool and the parallel
//! replication studies built on [`gas_inar_core`].

pub mod cli;
pub mod document;
pub mod io;
pub mod replicate;
