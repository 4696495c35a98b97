//! Session service and command-line front end for `kbdebug`.

pub mod api;
pub mod cli;
pub mod input;
pub mod snapshot;
