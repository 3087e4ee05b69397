//! Experiment harness for `mlcs-core`: configuration, image and table
//! formats, synthetic phantoms and the experiment runners behind the `mlcs`
//! binary.

pub mod config;
pub mod error;
pub mod experiments;
pub mod formats;
pub mod pgm;
pub mod phantom;
pub mod report;
