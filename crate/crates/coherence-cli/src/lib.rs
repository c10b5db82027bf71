//! JSON document layer for the `coherence` command-line tool.

pub mod docs;
