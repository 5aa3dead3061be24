//! Configuration-driven sweeps, output files, bundled figure datasets and the
//! identity suite. Concrete in `f64`.

pub mod config;
pub mod figures;
pub mod output;
pub mod random;
pub mod sweep;
pub mod verify;

pub use config::{ExperimentConfig, ModelKind, ReferenceSpec, MAX_SITES};
pub use output::{write_outputs, Metadata, CSV_HEADER};
pub use sweep::{run_sweep, SweepResult, SweepRow};
pub use verify::{verify_suite, VerifyOptions, VerifyReport};
