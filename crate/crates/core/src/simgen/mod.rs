//! Deterministic synthetic workload generator and observation sampling.

mod generate;
pub mod rng;
mod sample;
mod spec;

pub use generate::{generate, GroundTruthStream, StepState};
pub use sample::{observation_steps, replay_id, sample, sample_owned, SamplingPolicy};
pub use spec::{FieldModel, FieldSpec, PlaneModel, PlaneSpec, ScalarModel, ScalarSpec, WorkloadSpec};
