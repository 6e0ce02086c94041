//! Evolutionary multitasking over text prompts for 3D shape generation.
//!
//! Genotypes are natural-language prompts. A generator turns each prompt into
//! a mesh, evaluators score the mesh physically and visually against every
//! task, and language-model operators recombine prompts within and across
//! tasks.

pub mod config;
pub mod domain;
pub mod emt;
pub mod error;
pub mod evaluators;
pub mod lexicon;
pub mod mesh;
pub mod metrics;
pub mod oracles;
pub mod phenogen;
pub mod prompt_ops;
pub mod remote;
pub mod report;
pub mod seed;
pub mod store;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use oracles::Oracles;
