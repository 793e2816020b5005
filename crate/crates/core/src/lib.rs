//! Adversarial viewpoint distributions and viewpoint-invariant adversarial
//! training, closed over an analytic volume renderer and a small classifier.

pub mod classifier;
pub mod evalbench;
pub mod error;
pub mod geometry;
pub mod gmvfool;
pub mod library;
pub mod optim;
pub mod oracle;
pub mod renderer;
pub mod viat;

pub use error::{Error, Result};
