//! Inter-plane inter-satellite link establishment for Walker-star LEO
//! constellations: geometry, link budgets, satellite matching, resource
//! allocation and the Monte Carlo harness around them.

pub mod allocation;
pub mod config;
pub mod design;
pub mod error;
pub mod geometry;
pub mod graph;
pub mod linkbudget;
pub mod matching;
pub mod oracle;
pub mod report;
pub mod sim;

pub use error::{Error, Result};
