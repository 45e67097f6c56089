//! Experiment presets, artifact writers, and plotting for the `tvws-shaper`
//! command-line tool.

pub mod artifacts;
pub mod experiments;
pub mod plot;
