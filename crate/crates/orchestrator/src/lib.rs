//! Pipeline orchestration: configuration, the question-answering loop over
//! the agent stages, clarification handling, and the trace artifact.

pub mod config;
pub mod pipeline;
pub mod trace;

pub use config::{
    AblationFlags, BackendChoice, ClarificationMode, ConfigError, PipelineConfig,
};
pub use pipeline::{Clarifier, Pipeline, PipelineError};
pub use trace::{
    AttemptTrace, ClarificationTurn, PipelineTrace, QueryAttempt, SubgoalTrace, TokenAccounting,
};
