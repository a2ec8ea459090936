//! Simulation of a double slit whose wall is itself a quantum object.
//!
//! The particle and the wall share one periodic grid. After the slits the
//! joint state is kept as two factored branches, which is enough to get the
//! screen pattern, the conditional wall momentum and the fringe visibility
//! without ever forming the two-body wavefunction.
//!
//! ```no_run
//! use slitwall::{load_config, run_pipeline, screen_distribution};
//!
//! let scenario = load_config("crates/core/examples/paper_default.json")?;
//! let pair = run_pipeline(&scenario)?;
//! let screen = screen_distribution(&pair)?;
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod entangle;
pub mod error;
pub mod grid;
pub mod observables;
pub mod oracle;
pub mod recoil;
pub mod runner;
pub mod selftest;
pub mod slits;
pub mod states;
pub mod sweep;

pub use config::{load_config, parse_config, Scenario, ScenarioConfig};
pub use error::{ConfigError, Error, FieldError, Result};
pub use grid::{GridSpec, Representation, WaveFunction, HBAR};
pub use observables::{
    classification_accuracy, conditional_momentum, kennard_audit, screen_distribution, visibility,
    PathInferenceRule, PathLabel, VisibilityReport,
};
pub use slits::{run_pipeline, BranchPair, Pipeline, SlitModel};
pub use states::{build_state, support_width, StateSpec};
pub use sweep::{run_sweep, SweepDescriptor, SweepResult, SweepRow};

/// Crate version, stamped into every emitted artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
