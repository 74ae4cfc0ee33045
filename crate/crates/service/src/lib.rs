//! HTTP service, persistence and command line for the reasoning-trace
//! pipeline in `retrace-core`.

pub mod cli;
pub mod http;
pub mod service;
pub mod store;
pub mod transport;

pub use service::{Backend, PipelineError, Service, ServiceError, Stage, SubmitOptions, Submitted};
pub use store::{TraceRecord, TraceStore};
