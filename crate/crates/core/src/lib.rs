//! Estimation of distribution algorithms (EDAs) with Gaussian and
//! Student's t sampling models, single and mixture, plus a benchmark suite
//! and an experiment harness.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the scalar for the common cases.

pub mod distributions;
pub mod engine;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod mixture;
pub mod objectives;
pub mod scalar;

pub use distributions::{EllipticalParams, ScaledDraw, SplitStreams, Variates};
pub use engine::{
    run_eda, Algorithm, BoundsPolicy, EdaConfig, Model, RunRecord, RunState, RunStatus,
};
pub use error::{EdaError, Result};
pub use harness::{ExperimentSpec, ScoreRule, ScoreTable, SummaryStats};
pub use linalg::{Cholesky, SymMatrix};
pub use mixture::{EmNormalizer, EmOptions, Family, MixtureModel};
pub use objectives::{BenchmarkFunction, FunctionId};
pub use scalar::Scalar;

pub type ParamsF64 = EllipticalParams<f64>;
pub type ParamsF32 = EllipticalParams<f32>;
pub type MixtureF64 = MixtureModel<f64>;
pub type MixtureF32 = MixtureModel<f32>;
pub type ConfigF64 = EdaConfig<f64>;
pub type ConfigF32 = EdaConfig<f32>;
pub type RecordF64 = RunRecord<f64>;
pub type RecordF32 = RunRecord<f32>;
pub type MatrixF64 = SymMatrix<f64>;
