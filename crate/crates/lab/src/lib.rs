//! Scenario files, pipelines, artifacts and the acceptance suite on top of
//! `kleinflow-core`.

pub mod acceptance;
pub mod artifact;
pub mod builtin;
pub mod catalog;
pub mod config;
pub mod pipelines;
pub mod profile;
pub mod runner;
