//! Front end of odeforge: subcommands wrapping the core library, and the
//! reconstruction and factoring pipelines with their manifests.

pub mod cli;
pub mod cmd_cont;
pub mod cmd_fit;
pub mod cmd_local;
pub mod cmd_op;
pub mod io;
pub mod pipeline;

pub use cli::{dispatch, Cli, Outcome};
