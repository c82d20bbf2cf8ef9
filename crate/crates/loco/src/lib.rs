//! Command-line driver for LoCo: file IO, diagnostics rendering and the JSON
//! output documents.

pub mod commands;
pub mod document;
pub mod schema;
