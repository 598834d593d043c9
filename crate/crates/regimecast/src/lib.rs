// SPDX-License-Identifier: MIT OR Apache-2.0

//! Ingestion, file formats, configuration and the command pipeline around
//! [`regimecast_core`].

pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod incidents;
pub mod ingest;

pub use error::{Error, Result};
