//! Batch driver around `specaug_core`: manifest-driven augmentation with a
//! replayable audit log, patchwise evaluation, transform diagnostics and a
//! small procedural dataset generator.

pub mod augment;
pub mod error;
pub mod eval;
pub mod inspect;
pub mod manifest;
pub mod policy;
pub mod synth;

pub use augment::{replay, run_augment, AuditLog, OutputRecord, AUDIT_FILE};
pub use error::{CliError, Result};
pub use eval::{run_eval, EvalOptions, EvalReport};
pub use inspect::{inspect, InspectReport};
pub use manifest::{Entry, Manifest};
pub use policy::{parse_methods, MethodOptions, PolicyConfig, ReplicationFilter};
pub use synth::{generate_dataset, SynthOptions};
