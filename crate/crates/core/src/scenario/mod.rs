//! Built-in scenarios.

pub mod bos;
