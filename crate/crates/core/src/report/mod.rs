//! Run configuration, the five report commands and their CSV/JSON output.

mod commands;
mod config;
mod format;

pub use commands::*;
pub use config::{LoanRecord, ParamsConfig, RunConfig, TABLE3_JSON};
pub use format::{format_pct, format_sig};
