//! Tools around the agarcl environment: trajectory recording and replay,
//! throughput benchmarks, golden fixtures, and a websocket session server.

pub mod client;
pub mod commands;
pub mod error;
pub mod golden;
pub mod protocol;
pub mod server;
pub mod trajectory;

pub use error::{HarnessError, Result};
