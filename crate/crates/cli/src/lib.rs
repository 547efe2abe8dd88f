//! Library surface of the partition selection toolkit's std side: the
//! weighted selection pipeline, CSV output helpers, and config-file
//! expansion. The `snaps` binary is a thin dispatcher over these.

pub mod config;
pub mod output;
pub mod pipeline;
